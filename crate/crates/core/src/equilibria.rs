//! Equilibrium resolution and linearization along the parameter path.
//!
//! The equilibrium `ybar(lam, mu)` is expanded as a parameter jet to second
//! order (implicit function theorem carried out in jet arithmetic), and the
//! right-hand side is then evaluated at `ybar(lam, mu) + x`. The linear
//! coefficients `alpha = d rhs/dx`, `beta = d rhs/dxd` and all their
//! parameter derivatives are read straight off that one jet.

use crate::modelkit::{DomainError, Equilibrium, Jet, ModelSpec, Point, Var};

pub const ROOT_TOL: f64 = 1e-13;
pub const ROOT_MAX_ITER: usize = 100;
/// Bound on `|g(ybar)| / max(1, |g'(ybar)|)` accepted as an equilibrium.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EquilibriumError {
    #[error("no sign change of the equilibrium residual on [{lo}, {hi}] (g = {g_lo}, {g_hi})")]
    NoRootInBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("equilibrium solve did not converge in {iterations} iterations (|g| = {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("equilibrium residual has zero slope at ybar = {ybar} (fold of equilibria)")]
    SingularImplicit { ybar: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Linear coefficients of the model about its equilibrium, with their
/// derivatives along the parameter path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationPoint {
    pub lam: f64,
    pub mu: f64,
    pub ybar: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_lam: f64,
    pub beta_lam: f64,
    pub alpha_mu: f64,
    pub beta_mu: f64,
    pub alpha_lamlam: f64,
    pub beta_lamlam: f64,
}

fn param_vars(lam: f64, mu: f64) -> (Jet, Jet) {
    (Jet::variable(Var::Lam, lam), Jet::variable(Var::Mu, mu))
}

/// Solve for the equilibrium at `(lam, mu)`.
pub fn solve_equilibrium(m: &ModelSpec, lam: f64, mu: f64) -> Result<f64, EquilibriumError> {
    match &m.equilibrium {
        Equilibrium::Explicit(e) => Ok(e.eval_real(&Point::new(0.0, 0.0, lam, mu))?),
        Equilibrium::Implicit { residual, bracket } => {
            let at = Point::new(0.0, 0.0, lam, mu);
            let lo = bracket.lo.eval_real(&at)?;
            let hi = bracket.hi.eval_real(&at)?;
            let g = |x: f64| -> Result<(f64, f64), DomainError> {
                let j = residual.eval_jet(&Point::new(x, x, lam, mu))?;
                Ok((j.value(), j.coeff(1, 0, 0, 0)))
            };
            bracketed_newton(g, lo, hi)
        }
    }
}

/// Newton's method safeguarded by bisection; the bracket always keeps a sign change.
fn bracketed_newton<G>(g: G, lo: f64, hi: f64) -> Result<f64, EquilibriumError>
where
    G: Fn(f64) -> Result<(f64, f64), DomainError>,
{
    let (g_lo, _) = g(lo)?;
    let (g_hi, _) = g(hi)?;
    if !(lo < hi) || !(g_lo * g_hi <= 0.0) {
        return Err(EquilibriumError::NoRootInBracket { lo, hi, g_lo, g_hi });
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    // Orient so that g(a) < 0 < g(b).
    let (mut a, mut b) = if g_lo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = 0.5 * (lo + hi);
    let mut last = f64::INFINITY;
    for it in 0..ROOT_MAX_ITER {
        let (gx, dg) = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - gx / dg;
        let inside = newton.is_finite() && (newton - a) * (newton - b) < 0.0;
        let next = if inside { newton } else { 0.5 * (a + b) };
        let step = (next - x).abs();
        x = next;
        if step <= ROOT_TOL * x.abs().max(1.0) || (step == last && !inside) {
            // The residual is judged against the slope: a root of `c·g` is the same root.
            let (gx, dg) = g(x)?;
            if gx.abs() < RESIDUAL_TOL * dg.abs().max(1.0) {
                return Ok(x);
            }
            return Err(EquilibriumError::NonConvergence { iterations: it + 1, residual: gx.abs() });
        }
        last = step;
    }
    let (gx, _) = g(x)?;
    Err(EquilibriumError::NonConvergence { iterations: ROOT_MAX_ITER, residual: gx.abs() })
}

/// `ybar(lam + dl, mu + dm)` as a second-order parameter jet.
pub fn equilibrium_jet(m: &ModelSpec, lam: f64, mu: f64) -> Result<Jet, EquilibriumError> {
    let (l, u) = param_vars(lam, mu);
    match &m.equilibrium {
        Equilibrium::Explicit(e) => {
            let zero = Jet::constant(0.0);
            Ok(e.eval_jet_with(&[zero.clone(), zero, l, u])?.param_part())
        }
        Equilibrium::Implicit { residual, .. } => {
            let ybar = solve_equilibrium(m, lam, mu)?;
            let slope = residual.eval_jet(&Point::new(ybar, ybar, lam, mu))?.coeff(1, 0, 0, 0);
            if slope == 0.0 || !slope.is_finite() {
                return Err(EquilibriumError::SingularImplicit { ybar });
            }
            // Chord iteration in the jet ring: each pass fixes one more order.
            let mut y = Jet::constant(ybar);
            for _ in 0..=crate::modelkit::PARAM_ORDER {
                let g = residual.eval_jet_with(&[y.clone(), y.clone(), l.clone(), u.clone()])?;
                y = &y - &g.param_part().scale(1.0 / slope);
            }
            Ok(y)
        }
    }
}

/// Jet of `x, xd -> rhs(ybar(lam, mu) + x, ybar(lam, mu) + xd, lam, mu)`.
pub fn shifted_rhs_jet(m: &ModelSpec, lam: f64, mu: f64) -> Result<Jet, EquilibriumError> {
    let y = equilibrium_jet(m, lam, mu)?;
    let (l, u) = param_vars(lam, mu);
    let x = &y + &Jet::variable(Var::X, 0.0);
    let xd = &y + &Jet::variable(Var::Xd, 0.0);
    Ok(m.rhs.eval_jet_with(&[x, xd, l, u])?)
}

pub fn linearize(m: &ModelSpec, lam: f64, mu: f64) -> Result<LinearizationPoint, EquilibriumError> {
    let ybar = equilibrium_jet(m, lam, mu)?.value();
    let j = shifted_rhs_jet(m, lam, mu)?;
    Ok(LinearizationPoint {
        lam,
        mu,
        ybar,
        alpha: j.coeff(1, 0, 0, 0),
        beta: j.coeff(0, 1, 0, 0),
        alpha_lam: j.coeff(1, 0, 1, 0),
        beta_lam: j.coeff(0, 1, 1, 0),
        alpha_mu: j.coeff(1, 0, 0, 1),
        beta_mu: j.coeff(0, 1, 0, 1),
        alpha_lamlam: 2.0 * j.coeff(1, 0, 2, 0),
        beta_lamlam: 2.0 * j.coeff(0, 1, 2, 0),
    })
}
