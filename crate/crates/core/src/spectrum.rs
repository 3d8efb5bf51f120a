//! The characteristic equation `Δ(ξ) = ξ - α - β e^{-ξτ}`: Hopf curve,
//! imaginary-axis roots, a rightmost-root scan and the two curvatures whose
//! difference measures how a parameter path touches the Hopf curve.

use num_complex::Complex64;

use crate::equilibria::LinearizationPoint;

/// Tolerance on the phase conditions `α + β cos τω = 0`, `ω + β sin τω = 0`.
pub const PHASE_TOL: f64 = 1e-8;
/// Roots with `|Re ξ|` below this are reported as lying on the imaginary axis.
pub const AXIS_TOL: f64 = 1e-8;
/// Roots closer than this are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// A Newton iterate is accepted as a root when `|Δ(ξ)|` is below this.
pub const ROOT_RESIDUAL: f64 = 1e-10;

const NEWTON_MAX_ITER: usize = 60;
const REAL_SEEDS: usize = 26;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("sin(tau*omega) vanishes at omega = {omega}: the Hopf curve is not parametrized there")]
    SingularParametrization { omega: f64 },
    #[error("beta^2 - alpha^2 = {gap} is not positive: no purely imaginary root")]
    PreconditionFailed { gap: f64 },
    #[error("(alpha, beta) is off the Hopf curve (phase residuals {cos_residual:e}, {sin_residual:e})")]
    NotOnCurve { omega: f64, cos_residual: f64, sin_residual: f64 },
    #[error("no seed converged to a characteristic root")]
    EmptyResult,
    #[error("curvature is singular: {0}")]
    SingularCurvature(&'static str),
    #[error("tau must be positive, got {0}")]
    BadDelay(f64),
}

/// `Δ(ξ) = ξ - α - β e^{-ξτ}`.
pub fn char_eval(alpha: f64, beta: f64, tau: f64, xi: Complex64) -> Complex64 {
    xi - alpha - beta * (-xi * tau).exp()
}

/// `Δ'(ξ) = 1 + βτ e^{-ξτ}`.
pub fn char_deriv(beta: f64, tau: f64, xi: Complex64) -> Complex64 {
    1.0 + beta * tau * (-xi * tau).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub tau: f64,
}

impl HopfPoint {
    pub fn char_residual(&self) -> f64 {
        char_eval(self.alpha, self.beta, self.tau, Complex64::new(0.0, self.omega)).norm()
    }
}

/// The Hopf-curve point with frequency `omega`.
pub fn hopf_point(tau: f64, omega: f64) -> Result<HopfPoint, SpectrumError> {
    if !(tau > 0.0) {
        return Err(SpectrumError::BadDelay(tau));
    }
    let s = (tau * omega).sin();
    // Relative guard: near the zeros of sin the curve runs off to infinity.
    if s.abs() <= 1e-12 * (tau * omega).abs().max(1.0) || !omega.is_finite() || omega <= 0.0 {
        return Err(SpectrumError::SingularParametrization { omega });
    }
    let beta = -omega / s;
    let alpha = -beta * (tau * omega).cos();
    Ok(HopfPoint { alpha, beta, omega, tau })
}

/// Trace the Hopf curve over `omegas`; fails on the first singular frequency.
pub fn hopf_curve(tau: f64, omegas: &[f64]) -> Result<Vec<HopfPoint>, SpectrumError> {
    omegas.iter().map(|&w| hopf_point(tau, w)).collect()
}

/// `ω = sqrt(β² - α²)`, provided `(α, β)` actually lies on the Hopf curve.
pub fn find_imaginary_root(alpha: f64, beta: f64, tau: f64) -> Result<f64, SpectrumError> {
    find_imaginary_root_tol(alpha, beta, tau, PHASE_TOL)
}

pub fn find_imaginary_root_tol(alpha: f64, beta: f64, tau: f64, tol: f64) -> Result<f64, SpectrumError> {
    if !(tau > 0.0) {
        return Err(SpectrumError::BadDelay(tau));
    }
    let gap = beta * beta - alpha * alpha;
    if !(gap > 0.0) {
        return Err(SpectrumError::PreconditionFailed { gap });
    }
    let omega = gap.sqrt();
    let cos_residual = alpha + beta * (tau * omega).cos();
    let sin_residual = omega + beta * (tau * omega).sin();
    let scale = beta.abs().max(1.0);
    if cos_residual.abs() > tol * scale || sin_residual.abs() > tol * scale {
        return Err(SpectrumError::NotOnCurve { omega, cos_residual, sin_residual });
    }
    Ok(omega)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub rightmost_real_part: f64,
    /// Frequencies `ω >= 0` of roots within `AXIS_TOL` of the axis, ascending.
    pub imaginary_axis_roots: Vec<f64>,
    pub verified_hypothesis1: bool,
    /// Every distinct root found with `Im ξ >= 0`, rightmost first.
    pub roots: Vec<Complex64>,
}

fn newton(alpha: f64, beta: f64, tau: f64, mut xi: Complex64) -> Option<Complex64> {
    for _ in 0..NEWTON_MAX_ITER {
        let d = char_deriv(beta, tau, xi);
        let step = char_eval(alpha, beta, tau, xi) / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        xi -= step;
        if step.norm() <= 1e-15 * xi.norm().max(1.0) {
            break;
        }
    }
    let r = char_eval(alpha, beta, tau, xi).norm();
    (r < ROOT_RESIDUAL && xi.re.is_finite() && xi.im.is_finite()).then_some(xi)
}

/// Scan for the rightmost characteristic roots by Newton's method from a grid
/// of seeds covering `count` root branches.
pub fn rightmost_roots(alpha: f64, beta: f64, tau: f64, count: usize) -> Result<StabilityReport, SpectrumError> {
    if !(tau > 0.0) {
        return Err(SpectrumError::BadDelay(tau));
    }
    let (lo, hi) = (-20.0 / tau, 5.0);
    let mut found: Vec<Complex64> = Vec::new();
    for k in 0..=2 * count.max(1) + 1 {
        let im = k as f64 * std::f64::consts::PI / tau;
        for i in 0..REAL_SEEDS {
            let re = lo + (hi - lo) * i as f64 / (REAL_SEEDS - 1) as f64;
            if let Some(z) = newton(alpha, beta, tau, Complex64::new(re, im)) {
                found.push(if z.im < 0.0 { z.conj() } else { z });
            }
        }
    }
    if found.is_empty() {
        return Err(SpectrumError::EmptyResult);
    }
    found.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let mut roots: Vec<Complex64> = Vec::new();
    for z in found {
        if roots.iter().all(|r| (r - z).norm() > DEDUP_RADIUS) {
            roots.push(z);
        }
    }
    let rightmost_real_part = roots[0].re;
    let mut axis: Vec<f64> = roots.iter().filter(|z| z.re.abs() < AXIS_TOL).map(|z| z.im.abs()).collect();
    axis.sort_by(f64::total_cmp);
    let pair = axis.len() == 1 && axis[0] > AXIS_TOL;
    let rest_stable = roots.iter().filter(|z| z.re.abs() >= AXIS_TOL).all(|z| z.re < -AXIS_TOL);
    Ok(StabilityReport {
        rightmost_real_part,
        imaginary_axis_roots: axis,
        verified_hypothesis1: pair && rest_stable,
        roots,
    })
}

fn curvature_denominator(alpha: f64, beta: f64, tau: f64) -> Result<f64, SpectrumError> {
    let d = (beta * beta * tau * tau + 1.0) * (alpha * alpha + beta * beta) - 4.0 * alpha * beta * beta * tau;
    if !(d > 0.0) {
        return Err(SpectrumError::SingularCurvature("(b^2 t^2 + 1)(a^2 + b^2) - 4 a b^2 t vanishes"));
    }
    Ok(d.powf(1.5))
}

/// Signed curvature of the Hopf curve at `p`, oriented by increasing `ω`.
pub fn curvature_hopf(p: &HopfPoint) -> Result<f64, SpectrumError> {
    let (a, b, t) = (p.alpha, p.beta, p.tau);
    let den = curvature_denominator(a, b, t)?;
    Ok(b * (a * a - b * b) * (b * b * t * t + a * t - 2.0) * t / den)
}

/// Signed curvature of the parameter path `λ -> (α, β)` at a tangency with the Hopf curve.
pub fn curvature_path(lp: &LinearizationPoint, tau: f64) -> Result<f64, SpectrumError> {
    let (a, b, t) = (lp.alpha, lp.beta, tau);
    if lp.beta_lam == 0.0 {
        return Err(SpectrumError::SingularCurvature("beta_lam vanishes"));
    }
    let den = curvature_denominator(a, b, t)?;
    Ok((a * t - 1.0).powi(2) * b * b * (b * (a * t - 1.0) * lp.alpha_lamlam + (a - b * b * t) * lp.beta_lamlam)
        / (lp.beta_lam * lp.beta_lam * den))
}
