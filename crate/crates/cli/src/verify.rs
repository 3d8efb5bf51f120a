//! Numerical cross-checks: every quantity that has two independent routes is
//! computed both ways and compared.

use std::fmt;

use ddehopf::equilibria::{linearize, LinearizationPoint};
use ddehopf::modelkit::{builtin_models, taylor_coeffs, ModelSpec, Point, TaylorTable};
use ddehopf::normalform::{
    curvature_invariant, find_degenerate_point, lyapunov_k1_closed, lyapunov_k1_general, sigma4_via_xi,
    sigma_coefficients, K1Normalization,
};
use ddehopf::spectrum::{curvature_hopf, curvature_path, find_imaginary_root, hopf_point, HopfPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const K1_TOL: f64 = 1e-8;
pub const SIGMA4_TOL: f64 = 1e-10;
pub const IMPLICIT_TOL: f64 = 1e-5;
pub const KAPPA_TOL: f64 = 1e-8;
pub const TAYLOR_TOL: f64 = 1e-5;

pub const RANDOM_CASES: usize = 100;
pub const SEED: u64 = 0x5eed_d0e5;
/// Finite-difference steps for implicit first and second derivatives; at the
/// smaller step, round-off swamps a vanishing second derivative.
pub const FD_STEP: f64 = 1e-4;
pub const FD_STEP_SECOND: f64 = 1e-3;
/// Finite-difference step for Taylor coefficients (third derivatives need a larger one).
pub const TAYLOR_FD_STEP: f64 = 1e-2;
/// Relative errors are taken against `max(|value|, SCALE_FLOOR)`.
pub const SCALE_FLOOR: f64 = 1e-3;

/// Starting guesses for the built-in models' degenerate points.
pub const BUILTIN_GUESSES: [(&str, (f64, f64)); 2] = [("sis-inverse", (1.8, 2.6)), ("sis-exp", (2.1, 1.7))];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// Worst residual over all cases; NaN if a case could not be evaluated.
    pub residual: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub note: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} residual {:.3e}  tolerance {:.1e}  ({} cases)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.tolerance,
            self.cases
        )?;
        if let Some(n) = &self.note {
            write!(f, "  {n}")?;
        }
        Ok(())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(SCALE_FLOOR)
}

/// Relative gap between the closed-form `K₁` evaluated on `closed` and the
/// general formula evaluated on `general`. Both tables are normally the same;
/// they are separate so that a corrupted input is detectable.
pub fn k1_two_path(p: &HopfPoint, closed: &TaylorTable, general: &TaylorTable) -> Result<f64, String> {
    let c = lyapunov_k1_closed(p.alpha, p.beta, p.omega, p.tau, closed).map_err(|e| e.to_string())?;
    let g = lyapunov_k1_general(p.alpha, p.beta, p.omega, p.tau, general, K1Normalization::ClosedForm)
        .map_err(|e| e.to_string())?;
    Ok((c - g).abs() / c.abs().max(g.abs()).max(f64::MIN_POSITIVE))
}

/// `σ₄` from the curvature invariant against `Re ½ξ_λλ`.
pub fn sigma4_two_path(lp: &LinearizationPoint, tau: f64, omega: f64) -> Result<f64, String> {
    let s = sigma_coefficients(lp, tau, omega).map_err(|e| e.to_string())?;
    let x = sigma4_via_xi(lp, tau, omega).map_err(|e| e.to_string())?;
    Ok((s.s4 - x.re).abs() / s.s4.abs().max(1.0))
}

/// `κ₂ - κ₁` against `β G / (β_λ² D^{3/2})`.
pub fn kappa_gap(lp: &LinearizationPoint, tau: f64) -> Result<f64, String> {
    let omega = (lp.beta * lp.beta - lp.alpha * lp.alpha).sqrt();
    let hp = HopfPoint { alpha: lp.alpha, beta: lp.beta, omega, tau };
    let k1 = curvature_hopf(&hp).map_err(|e| e.to_string())?;
    let k2 = curvature_path(lp, tau).map_err(|e| e.to_string())?;
    let (a, b, t) = (lp.alpha, lp.beta, tau);
    let d = (b * b * t * t + 1.0) * (a * a + b * b) - 4.0 * a * b * b * t;
    let expect = b * curvature_invariant(lp, tau) / (lp.beta_lam * lp.beta_lam * d.powf(1.5));
    Ok(((k2 - k1) - expect).abs() / expect.abs().max(1.0))
}

/// Richardson-extrapolated central first and second differences of `f` at `x`.
fn fd12(f: impl Fn(f64) -> Result<f64, String>, x: f64, h: f64) -> Result<(f64, f64), String> {
    let at = |h: f64| -> Result<(f64, f64), String> {
        let (fp, f0, fm) = (f(x + h)?, f(x)?, f(x - h)?);
        Ok(((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)))
    };
    let (d1, d2) = at(h)?;
    let (e1, e2) = at(h / 2.0)?;
    Ok(((4.0 * e1 - d1) / 3.0, (4.0 * e2 - d2) / 3.0))
}

/// Worst relative error of the implicit-function derivatives against finite differences.
pub fn implicit_derivatives(m: &ModelSpec, lam: f64, mu: f64) -> Result<f64, String> {
    let lp = linearize(m, lam, mu).map_err(|e| e.to_string())?;
    let ab = |l: f64, u: f64| linearize(m, l, u).map(|p| (p.alpha, p.beta)).map_err(|e| e.to_string());
    let (al, _) = fd12(|l| ab(l, mu).map(|v| v.0), lam, FD_STEP)?;
    let (bl, _) = fd12(|l| ab(l, mu).map(|v| v.1), lam, FD_STEP)?;
    let (_, all) = fd12(|l| ab(l, mu).map(|v| v.0), lam, FD_STEP_SECOND)?;
    let (_, bll) = fd12(|l| ab(l, mu).map(|v| v.1), lam, FD_STEP_SECOND)?;
    let (am, _) = fd12(|u| ab(lam, u).map(|v| v.0), mu, FD_STEP)?;
    let (bm, _) = fd12(|u| ab(lam, u).map(|v| v.1), mu, FD_STEP)?;
    Ok([
        rel(lp.alpha_lam, al),
        rel(lp.beta_lam, bl),
        rel(lp.alpha_mu, am),
        rel(lp.beta_mu, bm),
        rel(lp.alpha_lamlam, all),
        rel(lp.beta_lamlam, bll),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

/// Central-difference mixed partial `∂ʲ_x ∂ᵏ_xd f` by tensor-product stencils.
fn mixed_partial(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, j: usize, k: usize, h: f64) -> f64 {
    // Stencils for orders 0..=3 with offsets in units of h.
    fn stencil(n: usize) -> &'static [(f64, f64)] {
        match n {
            0 => &[(0.0, 1.0)],
            1 => &[(-1.0, -0.5), (1.0, 0.5)],
            2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
            _ => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        }
    }
    let mut s = 0.0;
    for &(ox, wx) in stencil(j) {
        for &(oy, wy) in stencil(k) {
            s += wx * wy * f(x + ox * h, y + oy * h);
        }
    }
    s / h.powi((j + k) as i32)
}

/// Worst relative error of the Taylor table against finite differences of the rhs.
pub fn taylor_vs_fd(m: &ModelSpec, lp: &LinearizationPoint) -> Result<f64, String> {
    let t = taylor_coeffs(m, lp).map_err(|e| e.to_string())?;
    let f = |x: f64, xd: f64| m.rhs.eval_real(&Point::new(x, xd, lp.lam, lp.mu)).unwrap_or(f64::NAN);
    let y = lp.ybar;
    let mut worst: f64 = 0.0;
    for &(j, k) in TaylorTable::MONOMIALS.iter() {
        let d1 = mixed_partial(&f, y, y, j, k, TAYLOR_FD_STEP);
        let d2 = mixed_partial(&f, y, y, j, k, TAYLOR_FD_STEP / 2.0);
        let fd = (4.0 * d2 - d1) / 3.0 / (factorial(j) * factorial(k));
        let r = rel(t.get(j, k), fd);
        if r.is_nan() {
            return Err(format!("f{j}{k}: non-finite finite difference"));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

/// A random point on the Hopf curve away from the closed form's singular factors.
pub fn random_hopf_point(rng: &mut impl Rng) -> HopfPoint {
    loop {
        let tau = rng.gen_range(0.5..12.0);
        let frac: f64 = rng.gen_range(0.03..0.97);
        let Ok(p) = hopf_point(tau, frac * std::f64::consts::PI / tau) else { continue };
        if (p.alpha + p.beta).abs() > 1e-3 * p.beta.abs() && (4.0 * p.alpha - 5.0 * p.beta).abs() > 1e-3 * p.beta.abs() {
            return p;
        }
    }
}

pub fn random_table(rng: &mut impl Rng) -> TaylorTable {
    let mut t = TaylorTable::default();
    for &(j, k) in TaylorTable::MONOMIALS.iter() {
        t.set(j, k, rng.gen_range(-2.0..2.0));
    }
    t
}

/// A random path tangent to the Hopf curve at a random point.
pub fn random_tangent_path(rng: &mut impl Rng) -> (LinearizationPoint, HopfPoint) {
    loop {
        let p = random_hopf_point(rng);
        let (a, b, t) = (p.alpha, p.beta, p.tau);
        let den = t * b * b - a;
        if den.abs() < 1e-3 {
            continue;
        }
        let alpha_lam: f64 = rng.gen_range(-1.0..1.0);
        let lp = LinearizationPoint {
            lam: 0.0,
            mu: 0.0,
            ybar: 0.0,
            alpha: a,
            beta: b,
            alpha_lam,
            beta_lam: -b * alpha_lam * (1.0 - a * t) / den,
            alpha_mu: rng.gen_range(-1.0..1.0),
            beta_mu: rng.gen_range(-1.0..1.0),
            alpha_lamlam: rng.gen_range(-1.0..1.0),
            beta_lamlam: rng.gen_range(-1.0..1.0),
        };
        if lp.beta_lam.abs() > 1e-3 && sigma_coefficients(&lp, t, p.omega).is_ok() {
            return (lp, p);
        }
    }
}

/// Linearization points on a 5×5 grid of half-width `0.1` around `(lam, mu)`.
fn grid_around(lam: f64, mu: f64) -> Vec<(f64, f64)> {
    let off = [-0.1, -0.05, 0.0, 0.05, 0.1];
    off.iter().flat_map(|&dl| off.iter().map(move |&dm| (lam + dl, mu + dm))).collect()
}

struct Acc {
    worst: f64,
    cases: usize,
    error: Option<String>,
}

impl Acc {
    fn new() -> Acc {
        Acc { worst: 0.0, cases: 0, error: None }
    }

    fn add(&mut self, label: &str, r: Result<f64, String>) {
        self.cases += 1;
        match r {
            Ok(v) if v.is_finite() => self.worst = self.worst.max(v),
            Ok(v) => {
                self.worst = f64::NAN;
                self.error.get_or_insert(format!("{label}: residual {v}"));
            }
            Err(e) => {
                self.worst = f64::NAN;
                self.error.get_or_insert(format!("{label}: {e}"));
            }
        }
    }

    fn finish(self, name: &str, default_tol: f64, tol: Option<f64>) -> CheckResult {
        CheckResult {
            name: name.into(),
            residual: self.worst,
            tolerance: tol.unwrap_or(default_tol),
            cases: self.cases,
            note: self.error,
        }
    }
}

/// Every check; `tol` replaces the per-check default tolerances.
pub fn run_all(tol: Option<f64>) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut degenerate = Vec::new();
    let mut setup_errors = Vec::new();
    for (name, guess) in BUILTIN_GUESSES {
        let m = builtin_models().into_iter().find(|m| m.name == name).expect("built-in");
        match find_degenerate_point(&m, guess, m.tau) {
            Ok(d) => degenerate.push((m, d)),
            Err(e) => setup_errors.push(format!("{name}: {e}")),
        }
    }

    let mut out = Vec::new();
    if !setup_errors.is_empty() {
        out.push(CheckResult {
            name: "degenerate-point search".into(),
            residual: f64::NAN,
            tolerance: 0.0,
            cases: BUILTIN_GUESSES.len(),
            note: Some(setup_errors.join("; ")),
        });
    }

    let mut k1 = Acc::new();
    for (m, d) in &degenerate {
        let r = taylor_coeffs(m, &d.point).map_err(|e| e.to_string()).and_then(|t| {
            let omega = find_imaginary_root(d.point.alpha, d.point.beta, m.tau).map_err(|e| e.to_string())?;
            let hp = HopfPoint { alpha: d.point.alpha, beta: d.point.beta, omega, tau: m.tau };
            k1_two_path(&hp, &t, &t)
        });
        k1.add(&m.name, r);
    }
    for i in 0..RANDOM_CASES {
        let p = random_hopf_point(&mut rng);
        let t = random_table(&mut rng);
        k1.add(&format!("random case {i}"), k1_two_path(&p, &t, &t));
    }
    out.push(k1.finish("K1 closed vs general", K1_TOL, tol));

    let mut s4 = Acc::new();
    for (m, d) in &degenerate {
        s4.add(&m.name, sigma4_two_path(&d.point, m.tau, d.omega));
    }
    for i in 0..RANDOM_CASES {
        let (lp, p) = random_tangent_path(&mut rng);
        s4.add(&format!("random path {i}"), sigma4_two_path(&lp, p.tau, p.omega));
    }
    out.push(s4.finish("sigma4 invariant vs xi", SIGMA4_TOL, tol));

    let mut imp = Acc::new();
    for (m, d) in &degenerate {
        for (l, u) in grid_around(d.lam, d.mu) {
            imp.add(&format!("{} at ({l}, {u})", m.name), implicit_derivatives(m, l, u));
        }
    }
    out.push(imp.finish("implicit derivatives vs FD", IMPLICIT_TOL, tol));

    let mut kap = Acc::new();
    for (m, d) in &degenerate {
        kap.add(&m.name, kappa_gap(&d.point, m.tau));
    }
    for i in 0..RANDOM_CASES {
        let (lp, p) = random_tangent_path(&mut rng);
        kap.add(&format!("random path {i}"), kappa_gap(&lp, p.tau));
    }
    out.push(kap.finish("kappa gap vs G", KAPPA_TOL, tol));

    let mut tay = Acc::new();
    for (m, d) in &degenerate {
        for (l, u) in grid_around(d.lam, d.mu) {
            let r = linearize(m, l, u).map_err(|e| e.to_string()).and_then(|lp| taylor_vs_fd(m, &lp));
            tay.add(&format!("{} at ({l}, {u})", m.name), r);
        }
    }
    out.push(tay.finish("Taylor coefficients vs FD", TAYLOR_TOL, tol));
    out
}
