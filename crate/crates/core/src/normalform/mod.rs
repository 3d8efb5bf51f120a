//! Normal form of the degenerate Hopf point: where the λ-path touches the
//! Hopf curve, the σ coefficients, the first Lyapunov coefficient and the
//! resulting unfolding `r(ε(λ² + η) + r²) = 0`.

mod degenerate;
mod lyapunov;
mod poly;
mod sigma;

use std::fmt;

use num_complex::Complex64;

use crate::equilibria::LinearizationPoint;
use crate::modelkit::{taylor_coeffs, ModelSpec, TaylorError, TaylorTable};
use crate::spectrum::{self, SpectrumError};

pub use degenerate::{
    find_degenerate_point, scan_for_guess, tangency_residuals, DegeneratePoint, FD_REL_STEP, NEWTON_MAX_ITER,
    NEWTON_TOL,
};
pub use lyapunov::{b_coefficients, lyapunov_k1_closed, lyapunov_k1_general, K1Normalization};
pub use poly::Poly4;
pub use sigma::{curvature_invariant, psi1_zero, sigma4_via_xi, sigma_coefficients, Sigma};

/// `|σ₁|`, `|σ₄|` at or below this count as zero.
pub const SIGMA_ZERO_TOL: f64 = 1e-10;
/// `|K₁|` at or below this counts as zero.
pub const K1_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormalFormError {
    #[error("beta^2 - alpha^2 = {gap} is not positive: not on a Hopf curve")]
    PreconditionFailed { gap: f64 },
    #[error("degenerate-point search did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("iterate left the admissible region at (lam, mu) = ({lam}, {mu}): {reason}")]
    LeftDomain { lam: f64, mu: f64, reason: String },
    #[error("denominator factor `{0}` vanishes")]
    SingularDenominator(&'static str),
    #[error("non-degeneracy condition violated: `{0}` vanishes")]
    NonDegeneracyViolated(&'static str),
    #[error("degenerate beyond scope: {quantity} = {value:e} is zero within tolerance")]
    DegenerateBeyondScope { quantity: &'static str, value: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Taylor(#[from] TaylorError),
}

/// The six unfolding diagrams, by `ε` and the sign of `η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagramClass {
    PlusEtaNegative,
    PlusEtaZero,
    PlusEtaPositive,
    MinusEtaNegative,
    MinusEtaZero,
    MinusEtaPositive,
}

impl DiagramClass {
    pub fn new(epsilon: i8, eta: f64) -> DiagramClass {
        use DiagramClass::*;
        match (epsilon > 0, eta.partial_cmp(&0.0)) {
            (true, Some(std::cmp::Ordering::Less)) => PlusEtaNegative,
            (true, Some(std::cmp::Ordering::Greater)) => PlusEtaPositive,
            (true, _) => PlusEtaZero,
            (false, Some(std::cmp::Ordering::Less)) => MinusEtaNegative,
            (false, Some(std::cmp::Ordering::Greater)) => MinusEtaPositive,
            (false, _) => MinusEtaZero,
        }
    }

    pub fn epsilon(self) -> i8 {
        use DiagramClass::*;
        match self {
            PlusEtaNegative | PlusEtaZero | PlusEtaPositive => 1,
            _ => -1,
        }
    }

    /// Two Hopf points joined by a branch of periodic orbits.
    pub fn has_bubble(self) -> bool {
        self == DiagramClass::PlusEtaNegative
    }

    pub fn label(self) -> &'static str {
        use DiagramClass::*;
        match self {
            PlusEtaNegative => "eps=+1,eta<0",
            PlusEtaZero => "eps=+1,eta=0",
            PlusEtaPositive => "eps=+1,eta>0",
            MinusEtaNegative => "eps=-1,eta<0",
            MinusEtaZero => "eps=-1,eta=0",
            MinusEtaPositive => "eps=-1,eta>0",
        }
    }
}

impl fmt::Display for DiagramClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub epsilon: i8,
    pub eta: f64,
    pub class: DiagramClass,
    /// Predicted bubble width in λ, when there is a bubble.
    pub bubble_width: Option<f64>,
}

fn check_nonzero(s1: f64, s4: f64, k1: f64) -> Result<(), NormalFormError> {
    if !(s1.abs() > SIGMA_ZERO_TOL) {
        return Err(NormalFormError::DegenerateBeyondScope { quantity: "sigma1", value: s1 });
    }
    if !(s4.abs() > SIGMA_ZERO_TOL) {
        return Err(NormalFormError::DegenerateBeyondScope { quantity: "sigma4", value: s4 });
    }
    if !(k1.abs() > K1_ZERO_TOL) {
        return Err(NormalFormError::DegenerateBeyondScope { quantity: "K1", value: k1 });
    }
    Ok(())
}

/// Classify the unfolding at `μ = μ* + mu_offset`.
pub fn classify(s1: f64, s4: f64, k1: f64, mu_offset: f64) -> Result<Classification, NormalFormError> {
    check_nonzero(s1, s4, k1)?;
    let epsilon: i8 = if s4.signum() == k1.signum() { 1 } else { -1 };
    let eta = s1 * mu_offset / (k1.abs() * s4.signum());
    let class = DiagramClass::new(epsilon, eta);
    let bubble_width = class.has_bubble().then(|| 2.0 * (s1 * mu_offset / s4).abs().sqrt());
    Ok(Classification { epsilon, eta, class, bubble_width })
}

/// Everything known about a degenerate Hopf point.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub model: String,
    pub tau: f64,
    pub lam_star: f64,
    pub mu_star: f64,
    pub point: LinearizationPoint,
    pub omega_star: f64,
    pub residuals: (f64, f64),
    pub iterations: usize,
    pub psi10: Complex64,
    pub sigma: Sigma,
    /// `½ ξ_λλ`; its real part is a second route to `σ₄`.
    pub half_xi_lamlam: Complex64,
    pub g_value: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub taylor: TaylorTable,
    /// `K₁` from the closed form.
    pub k1: f64,
    /// `K₁` from the general formula in the closed form's normalization.
    pub k1_general: f64,
    /// `K₁` from the general formula with the delay-scaled `ψ₁(0)`.
    pub k1_delay_scaled: f64,
    /// `K₂ = Im H(0,0,0)` is not computed.
    pub k2: Option<f64>,
    pub epsilon: i8,
    /// `η = eta_slope · (μ - μ*)`.
    pub eta_slope: f64,
    /// Bubble width ≈ `bubble_coeff · sqrt|μ - μ*|` on the bubble side.
    pub bubble_coeff: f64,
    pub class_above: DiagramClass,
    pub class_below: DiagramClass,
    pub hypothesis1: bool,
}

impl DegeneracyReport {
    /// Which side of `μ*` has the bubble, as `+1`/`-1`.
    pub fn bubble_side(&self) -> Option<i8> {
        if self.class_above.has_bubble() {
            Some(1)
        } else if self.class_below.has_bubble() {
            Some(-1)
        } else {
            None
        }
    }

    pub fn classify_at(&self, mu: f64) -> Classification {
        classify(self.sigma.s1, self.sigma.s4, self.k1, mu - self.mu_star).expect("checked at construction")
    }

    /// Leading-order bubble width at `mu`, or `None` outside the bubble side.
    pub fn predicted_width(&self, mu: f64) -> Option<f64> {
        self.classify_at(mu).bubble_width
    }

    /// `key = value` lines with fixed field names.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        let n = |v: f64| format!("{v:.16e}");
        let p = &self.point;
        let s = &self.sigma;
        vec![
            ("model", self.model.clone()),
            ("tau", n(self.tau)),
            ("lam_star", n(self.lam_star)),
            ("mu_star", n(self.mu_star)),
            ("ybar", n(p.ybar)),
            ("alpha", n(p.alpha)),
            ("beta", n(p.beta)),
            ("alpha_lam", n(p.alpha_lam)),
            ("beta_lam", n(p.beta_lam)),
            ("alpha_mu", n(p.alpha_mu)),
            ("beta_mu", n(p.beta_mu)),
            ("alpha_lamlam", n(p.alpha_lamlam)),
            ("beta_lamlam", n(p.beta_lamlam)),
            ("omega_star", n(self.omega_star)),
            ("period", n(2.0 * std::f64::consts::PI / self.omega_star)),
            ("residual_r1", n(self.residuals.0)),
            ("residual_r2", n(self.residuals.1)),
            ("newton_iterations", self.iterations.to_string()),
            ("psi10_re", n(self.psi10.re)),
            ("psi10_im", n(self.psi10.im)),
            ("sigma1", n(s.s1)),
            ("sigma2", n(s.s2)),
            ("sigma3", n(s.s3)),
            ("sigma4", n(s.s4)),
            ("sigma5", n(s.s5)),
            ("sigma4_via_xi", n(self.half_xi_lamlam.re)),
            ("G", n(self.g_value)),
            ("kappa1", n(self.kappa1)),
            ("kappa2", n(self.kappa2)),
            ("f20", n(self.taylor.get(2, 0))),
            ("f11", n(self.taylor.get(1, 1))),
            ("f02", n(self.taylor.get(0, 2))),
            ("f30", n(self.taylor.get(3, 0))),
            ("f21", n(self.taylor.get(2, 1))),
            ("f12", n(self.taylor.get(1, 2))),
            ("f03", n(self.taylor.get(0, 3))),
            ("K1", n(self.k1)),
            ("K1_general", n(self.k1_general)),
            ("K1_delay_scaled", n(self.k1_delay_scaled)),
            ("K2", "unavailable".into()),
            ("epsilon", format!("{:+}", self.epsilon)),
            ("eta_slope", n(self.eta_slope)),
            ("bubble_coeff", n(self.bubble_coeff)),
            ("class_mu_above", self.class_above.to_string()),
            ("class_mu_below", self.class_below.to_string()),
            ("bubble_side", match self.bubble_side() {
                Some(1) => "mu>mu_star".into(),
                Some(_) => "mu<mu_star".into(),
                None => "none".into(),
            }),
            ("hypothesis1", self.hypothesis1.to_string()),
        ]
    }
}

impl fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.point;
        let s = &self.sigma;
        writeln!(f, "degenerate Hopf point of `{}` (tau = {})", self.model, self.tau)?;
        writeln!(f, "  lam* = {:.6}  mu* = {:.6}  ybar = {:.6}", self.lam_star, self.mu_star, p.ybar)?;
        writeln!(f, "  alpha* = {:.6}  beta* = {:.6}  omega* = {:.6}  (2pi/omega* = {:.4})",
            p.alpha, p.beta, self.omega_star, 2.0 * std::f64::consts::PI / self.omega_star)?;
        writeln!(f, "  residuals r1 = {:.2e}  r2 = {:.2e}  ({} Newton steps)",
            self.residuals.0, self.residuals.1, self.iterations)?;
        writeln!(f, "  psi1(0) = {:.6} {:+.6}i", self.psi10.re, self.psi10.im)?;
        writeln!(f, "  sigma1..5 = {:.6}, {:.6}, {:.6}, {:.6}, {:.6}", s.s1, s.s2, s.s3, s.s4, s.s5)?;
        writeln!(f, "  G = {:.6e}  kappa1 = {:.6}  kappa2 = {:.6}", self.g_value, self.kappa1, self.kappa2)?;
        writeln!(f, "  K1 = {:.6}  (general formula {:.6}; delay-scaled psi {:.6})",
            self.k1, self.k1_general, self.k1_delay_scaled)?;
        writeln!(f, "  K2 unavailable")?;
        writeln!(f, "  epsilon = {:+}  eta = {:.6} (mu - mu*)", self.epsilon, self.eta_slope)?;
        match self.bubble_side() {
            Some(side) => writeln!(f, "  endemic bubble for mu {} mu*, width ~ {:.4} sqrt|mu - mu*|",
                if side > 0 { ">" } else { "<" }, self.bubble_coeff)?,
            None => writeln!(f, "  no bubble on either side of mu*")?,
        }
        write!(f, "  hypothesis 1 (only +-i omega* on the axis): {}", if self.hypothesis1 { "verified" } else { "NOT verified" })
    }
}

/// Locate the degenerate point near `guess` and compute the full report.
pub fn analyze(m: &ModelSpec, guess: (f64, f64)) -> Result<DegeneracyReport, NormalFormError> {
    let tau = m.tau;
    let d = find_degenerate_point(m, guess, tau)?;
    let p = d.point;
    let omega = spectrum::find_imaginary_root(p.alpha, p.beta, tau)?;
    let sigma = sigma_coefficients(&p, tau, omega)?;
    let half_xi_lamlam = sigma4_via_xi(&p, tau, omega)?;
    let g_value = curvature_invariant(&p, tau);
    let hopf = spectrum::HopfPoint { alpha: p.alpha, beta: p.beta, omega, tau };
    let kappa1 = spectrum::curvature_hopf(&hopf)?;
    let kappa2 = spectrum::curvature_path(&p, tau)?;
    let taylor = taylor_coeffs(m, &p)?;
    let k1 = lyapunov_k1_closed(p.alpha, p.beta, omega, tau, &taylor)?;
    let k1_general = lyapunov_k1_general(p.alpha, p.beta, omega, tau, &taylor, K1Normalization::ClosedForm)?;
    let k1_delay_scaled = lyapunov_k1_general(p.alpha, p.beta, omega, tau, &taylor, K1Normalization::DelayScaled)?;
    let above = classify(sigma.s1, sigma.s4, k1, 1.0)?;
    let below = classify(sigma.s1, sigma.s4, k1, -1.0)?;
    let stability = spectrum::rightmost_roots(p.alpha, p.beta, tau, 6)?;
    Ok(DegeneracyReport {
        model: m.name.clone(),
        tau,
        lam_star: d.lam,
        mu_star: d.mu,
        point: p,
        omega_star: omega,
        residuals: d.residuals,
        iterations: d.iterations,
        psi10: psi1_zero(p.alpha, tau, omega),
        sigma,
        half_xi_lamlam,
        g_value,
        kappa1,
        kappa2,
        taylor,
        k1,
        k1_general,
        k1_delay_scaled,
        k2: None,
        epsilon: above.epsilon,
        eta_slope: sigma.s1 / (k1.abs() * sigma.s4.signum()),
        bubble_coeff: 2.0 * (sigma.s1 / sigma.s4).abs().sqrt(),
        class_above: above.class,
        class_below: below.class,
        hypothesis1: stability.verified_hypothesis1,
    })
}
