//! Detection, classification and numerical verification of degenerate Hopf
//! bifurcations (violated eigenvalue-crossing condition) in scalar delay
//! differential equations
//!
//! ```text
//! x'(t) = rhs(x(t), x(t - tau), lam, mu)
//! ```
//!
//! The pipeline is: [`modelkit`] parses the model and evaluates it over
//! Taylor jets, [`equilibria`] resolves the equilibrium and its linear
//! coefficients `alpha`, `beta` with parameter derivatives, [`spectrum`]
//! handles the characteristic equation, [`normalform`] locates the
//! degenerate point and computes the unfolding coefficients, and
//! [`simulate`] integrates the delay equation to produce bifurcation
//! diagrams.

pub mod modelkit;
pub mod equilibria;
pub mod spectrum;
pub mod normalform;
pub mod simulate;
