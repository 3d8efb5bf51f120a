//! Locating the point where the λ-path touches the Hopf curve.

use super::NormalFormError;
use crate::equilibria::{linearize, LinearizationPoint};
use crate::modelkit::ModelSpec;

pub const NEWTON_TOL: f64 = 1e-9;
pub const NEWTON_MAX_ITER: usize = 50;
pub const FD_REL_STEP: f64 = 1e-6;

/// `(r1, r2)`: on the Hopf curve, and tangent to it along λ.
pub fn tangency_residuals(lp: &LinearizationPoint, tau: f64) -> Result<(f64, f64), NormalFormError> {
    let (a, b) = (lp.alpha, lp.beta);
    let gap = b * b - a * a;
    if !(gap > 0.0) {
        return Err(NormalFormError::PreconditionFailed { gap });
    }
    let r1 = a + b * (tau * gap.sqrt()).cos();
    let r2 = b * lp.alpha_lam * (1.0 - a * tau) + lp.beta_lam * (tau * b * b - a);
    Ok((r1, r2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneratePoint {
    pub lam: f64,
    pub mu: f64,
    pub point: LinearizationPoint,
    pub omega: f64,
    pub residuals: (f64, f64),
    pub iterations: usize,
}

fn residuals_at(m: &ModelSpec, tau: f64, lam: f64, mu: f64) -> Result<((f64, f64), LinearizationPoint), NormalFormError> {
    let lp = linearize(m, lam, mu).map_err(|e| NormalFormError::LeftDomain { lam, mu, reason: e.to_string() })?;
    let r = tangency_residuals(&lp, tau).map_err(|e| NormalFormError::LeftDomain { lam, mu, reason: e.to_string() })?;
    if !(r.0.is_finite() && r.1.is_finite()) {
        return Err(NormalFormError::LeftDomain { lam, mu, reason: "non-finite residual".into() });
    }
    Ok((r, lp))
}

fn fd_step(x: f64) -> f64 {
    if x == 0.0 {
        FD_REL_STEP
    } else {
        FD_REL_STEP * x.abs()
    }
}

fn norm(r: (f64, f64)) -> f64 {
    r.0.abs().max(r.1.abs())
}

/// Newton's method on `(r1, r2)` in `(λ, μ)` with a central-difference Jacobian.
pub fn find_degenerate_point(m: &ModelSpec, guess: (f64, f64), tau: f64) -> Result<DegeneratePoint, NormalFormError> {
    let (mut lam, mut mu) = guess;
    let (mut r, mut lp) = residuals_at(m, tau, lam, mu)?;
    for it in 0..=NEWTON_MAX_ITER {
        if norm(r) < NEWTON_TOL {
            let omega = (lp.beta * lp.beta - lp.alpha * lp.alpha).sqrt();
            return Ok(DegeneratePoint { lam, mu, point: lp, omega, residuals: r, iterations: it });
        }
        if it == NEWTON_MAX_ITER {
            break;
        }
        let (hl, hm) = (fd_step(lam), fd_step(mu));
        let (rlp, _) = residuals_at(m, tau, lam + hl, mu)?;
        let (rlm, _) = residuals_at(m, tau, lam - hl, mu)?;
        let (rmp, _) = residuals_at(m, tau, lam, mu + hm)?;
        let (rmm, _) = residuals_at(m, tau, lam, mu - hm)?;
        let j11 = (rlp.0 - rlm.0) / (2.0 * hl);
        let j21 = (rlp.1 - rlm.1) / (2.0 * hl);
        let j12 = (rmp.0 - rmm.0) / (2.0 * hm);
        let j22 = (rmp.1 - rmm.1) / (2.0 * hm);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(NormalFormError::NonConvergence { iterations: it, residual: norm(r) });
        }
        let dl = -(j22 * r.0 - j12 * r.1) / det;
        let dm = -(-j21 * r.0 + j11 * r.1) / det;
        // Halve the step until the residual drops; a full step that leaves the
        // domain is retried shorter before giving up.
        let mut t = 1.0;
        let mut last_err = None;
        loop {
            match residuals_at(m, tau, lam + t * dl, mu + t * dm) {
                Ok((rn, lpn)) if norm(rn) < norm(r) || t < 1.0 / 64.0 => {
                    lam += t * dl;
                    mu += t * dm;
                    r = rn;
                    lp = lpn;
                    break;
                }
                Ok(_) => {}
                Err(e) => last_err = Some(e),
            }
            t /= 2.0;
            if t < 1.0 / 1024.0 {
                return Err(last_err.unwrap_or(NormalFormError::NonConvergence { iterations: it, residual: norm(r) }));
            }
        }
    }
    Err(NormalFormError::NonConvergence { iterations: NEWTON_MAX_ITER, residual: norm(r) })
}

/// Coarse search for a starting guess: along each `μ` row, locate the Hopf
/// crossings in λ by bisection on `r1`, then look for a sign change of `r2`
/// between neighbouring rows. Returns the crossing with the smallest `|r2|`
/// adjacent to such a sign change.
pub fn scan_for_guess(
    m: &ModelSpec,
    tau: f64,
    lam_range: (f64, f64),
    mu_range: (f64, f64),
    n: usize,
) -> Option<(f64, f64)> {
    let n = n.max(2);
    let grid = |r: (f64, f64), i: usize| r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64;
    let r_at = |l: f64, u: f64| residuals_at(m, tau, l, u).ok().map(|(r, _)| r);
    let mut rows: Vec<Vec<(f64, f64, f64)>> = Vec::new();
    for i in 0..n {
        let mu = grid(mu_range, i);
        let mut crossings = Vec::new();
        for k in 0..n - 1 {
            let (mut a, mut b) = (grid(lam_range, k), grid(lam_range, k + 1));
            let (Some(ra), Some(rb)) = (r_at(a, mu), r_at(b, mu)) else { continue };
            if ra.0 * rb.0 > 0.0 {
                continue;
            }
            let mut fa = ra.0;
            for _ in 0..50 {
                let c = 0.5 * (a + b);
                let Some(rc) = r_at(c, mu) else { break };
                if fa * rc.0 <= 0.0 {
                    b = c;
                } else {
                    a = c;
                    fa = rc.0;
                }
            }
            let c = 0.5 * (a + b);
            if let Some(rc) = r_at(c, mu) {
                crossings.push((c, mu, rc.1));
            }
        }
        rows.push(crossings);
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for w in rows.windows(2) {
        for &(l0, u0, s0) in &w[0] {
            for &(_, _, s1) in &w[1] {
                if s0 * s1 <= 0.0 && best.is_none_or(|b| s0.abs() < b.2.abs()) {
                    best = Some((l0, u0, s0));
                }
            }
        }
    }
    best.map(|(l, u, _)| (l, u))
}
