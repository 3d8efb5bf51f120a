//! Linear normal-form coefficients `σ₁..σ₅` and the curvature invariant `G`.

use num_complex::Complex64;

use super::NormalFormError;
use crate::equilibria::LinearizationPoint;

/// `ψ₁(0) = 1/((1 - ατ) + iωτ)`.
pub fn psi1_zero(alpha: f64, tau: f64, omega: f64) -> Complex64 {
    Complex64::new(1.0 - alpha * tau, omega * tau).inv()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub s5: f64,
}

impl Sigma {
    pub fn as_array(&self) -> [f64; 5] {
        [self.s1, self.s2, self.s3, self.s4, self.s5]
    }
}

fn check_denominators(lp: &LinearizationPoint, tau: f64) -> Result<(), NormalFormError> {
    let (a, b) = (lp.alpha, lp.beta);
    if b == 0.0 {
        return Err(NormalFormError::SingularDenominator("beta"));
    }
    if a * tau - 1.0 == 0.0 {
        return Err(NormalFormError::SingularDenominator("alpha tau - 1"));
    }
    if -b * b * tau * tau + 2.0 * a * tau - 1.0 == 0.0 {
        return Err(NormalFormError::SingularDenominator("-beta^2 tau^2 + 2 alpha tau - 1"));
    }
    Ok(())
}

/// Curvature invariant `G(α, β, τ)` along the λ-path.
pub fn curvature_invariant(lp: &LinearizationPoint, tau: f64) -> f64 {
    let (a, b, t) = (lp.alpha, lp.beta, tau);
    (a * t - 1.0).powi(3) * b * b * lp.alpha_lamlam + b * (a * t - 1.0).powi(2) * (a - b * b * t) * lp.beta_lamlam
        - lp.beta_lam * lp.beta_lam * t * (a * a - b * b) * (b * b * t * t + a * t - 2.0)
}

/// `e^{-iωτ}`: the operator `L` applied to `e^{iωθ}` per unit `β`.
fn phase(omega: f64, tau: f64) -> Complex64 {
    Complex64::from_polar(1.0, -omega * tau)
}

pub fn sigma_coefficients(lp: &LinearizationPoint, tau: f64, omega: f64) -> Result<Sigma, NormalFormError> {
    check_denominators(lp, tau)?;
    let (a, b, t, w) = (lp.alpha, lp.beta, tau, omega);
    let psi = psi1_zero(a, t, w);
    let e = phase(w, t);
    let s1 = (b * lp.alpha_mu * (1.0 - a * t) + lp.beta_mu * (t * b * b - a))
        / (b * ((1.0 - a * t).powi(2) + w * w * t * t));
    let s2 = (psi * (lp.alpha_mu + lp.beta_mu * e)).im;
    let s3 = (psi * (lp.alpha_lam + lp.beta_lam * e)).im;
    let g = curvature_invariant(lp, tau);
    let s4 = g / (b * b * (a * t - 1.0).powi(2) * (-b * b * t * t + 2.0 * a * t - 1.0)) / 2.0;
    let s5 = sigma4_via_xi(lp, tau, omega)?.im;
    Ok(Sigma { s1, s2, s3, s4, s5 })
}

/// `½ ξ_λλ`, assembled from the operator evaluations; its real part is `σ₄`.
pub fn sigma4_via_xi(lp: &LinearizationPoint, tau: f64, omega: f64) -> Result<Complex64, NormalFormError> {
    check_denominators(lp, tau)?;
    let (b, t) = (lp.beta, tau);
    let psi = psi1_zero(lp.alpha, t, omega);
    let e = phase(omega, t);
    let xi_lam = psi * (lp.alpha_lam + lp.beta_lam * e);
    let l_lamlam = lp.alpha_lamlam + lp.beta_lamlam * e;
    let l_lam_theta = -t * lp.beta_lam * e;
    let l0_theta2 = t * t * b * e;
    let xi_lamlam = psi * (l_lamlam + 2.0 * xi_lam * l_lam_theta + xi_lam * xi_lam * l0_theta2);
    Ok(xi_lamlam / 2.0)
}
