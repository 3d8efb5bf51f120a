//! Quadratic and cubic Taylor coefficients of the model about its equilibrium.

use crate::equilibria::LinearizationPoint;

use super::expr::{DomainError, Point};
use super::model::ModelSpec;

/// Linear coefficients re-derived here must match the linearization to this bound.
pub const CONSISTENCY_TOL: f64 = 1e-10;

/// Coefficients `f(j,k)` of `x^j xd^k`, `2 <= j + k <= 3`, in the nonlinear
/// part of `rhs(ybar + x, ybar + xd, lam, mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaylorTable {
    c: [[f64; 4]; 4],
}

impl TaylorTable {
    /// All retained `(j, k)` pairs: quadratic first, then cubic.
    pub const MONOMIALS: [(usize, usize); 7] = [(2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];

    pub fn get(&self, j: usize, k: usize) -> f64 {
        if (2..=3).contains(&(j + k)) {
            self.c[j][k]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        assert!((2..=3).contains(&(j + k)), "f({j},{k}) is not a nonlinear coefficient");
        self.c[j][k] = v;
    }

    pub fn from_pairs(pairs: &[((usize, usize), f64)]) -> TaylorTable {
        let mut t = TaylorTable::default();
        for &((j, k), v) in pairs {
            t.set(j, k, v);
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        Self::MONOMIALS.iter().all(|&(j, k)| self.get(j, k) == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaylorError {
    #[error("linear part ({alpha}, {beta}) disagrees with the linearization ({expected_alpha}, {expected_beta})")]
    InconsistentLinearization { alpha: f64, beta: f64, expected_alpha: f64, expected_beta: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Nonlinear Taylor coefficients of the model at a linearization point.
pub fn taylor_coeffs(m: &ModelSpec, at: &LinearizationPoint) -> Result<TaylorTable, TaylorError> {
    let y = at.ybar;
    let jet = m.rhs.eval_jet(&Point::new(y, y, at.lam, at.mu))?;
    let (alpha, beta) = (jet.coeff(1, 0, 0, 0), jet.coeff(0, 1, 0, 0));
    let scale = 1.0f64.max(at.alpha.abs()).max(at.beta.abs());
    if (alpha - at.alpha).abs() > CONSISTENCY_TOL * scale || (beta - at.beta).abs() > CONSISTENCY_TOL * scale {
        return Err(TaylorError::InconsistentLinearization {
            alpha,
            beta,
            expected_alpha: at.alpha,
            expected_beta: at.beta,
        });
    }
    let mut t = TaylorTable::default();
    for (j, k) in TaylorTable::MONOMIALS {
        t.set(j, k, jet.coeff(j, k, 0, 0));
    }
    Ok(t)
}
