//! Method-of-steps integration, attractor classification and parameter sweeps.
//!
//! The delay is resolved exactly on the grid `h = τ/N`: the RK4 stages at
//! `t` and `t + h` read stored nodes, and the two midpoint stages read the
//! cubic Hermite interpolant of the stored values and slopes.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::equilibria::{solve_equilibrium, EquilibriumError};
use crate::modelkit::{DomainError, ModelSpec, Point};

pub const BLOWUP_BOUND: f64 = 1e6;
pub const MIN_STEPS_PER_DELAY: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation settings: {0}")]
    InvalidConfig(String),
    #[error("solution blew up (|x| > {BLOWUP_BOUND:e}) at t = {t}")]
    BlowUp { t: f64 },
    #[error("oscillating (amplitude {amplitude:e}) but only {crossings} mean crossings in the record window")]
    Unclassifiable { amplitude: f64, crossings: usize },
    #[error("lam grid must be non-empty and strictly ascending")]
    BadGrid,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

/// Initial function on `[-τ, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum History {
    Constant(f64),
    /// `ȳ(λ, μ) + perturbation`.
    EquilibriumPlus(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// `N` in `h = τ/N`.
    pub steps_per_delay: usize,
    pub t_transient: f64,
    pub t_record: f64,
    pub history: History,
    pub amplitude_threshold: f64,
    /// An envelope shrinking faster than this rate (1/time) over the record
    /// window counts as settling to equilibrium; `None` uses amplitude alone.
    pub decay_rate_threshold: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            steps_per_delay: 200,
            t_transient: 2000.0,
            t_record: 500.0,
            history: History::EquilibriumPlus(1e-3),
            amplitude_threshold: 1e-6,
            decay_rate_threshold: Some(1e-6),
        }
    }
}

impl SimConfig {
    pub fn step(&self, tau: f64) -> f64 {
        tau / self.steps_per_delay as f64
    }

    /// `N` for a requested step size, which must divide `τ` exactly.
    pub fn steps_for(tau: f64, step: f64) -> Result<usize, SimError> {
        let n = (tau / step).round();
        if !(step > 0.0) || !n.is_finite() || n < 1.0 || ((n * step - tau).abs() > 1e-9 * tau) {
            return Err(SimError::InvalidConfig(format!("step {step} does not divide tau = {tau}")));
        }
        Ok(n as usize)
    }

    /// Check the settings; `omega` is the expected angular frequency, if known.
    pub fn validate(&self, omega: Option<f64>) -> Result<(), SimError> {
        if self.steps_per_delay < MIN_STEPS_PER_DELAY {
            return Err(SimError::InvalidConfig(format!(
                "need at least {MIN_STEPS_PER_DELAY} steps per delay, got {}",
                self.steps_per_delay
            )));
        }
        if !(self.t_transient >= 0.0 && self.t_transient.is_finite()) {
            return Err(SimError::InvalidConfig("transient time must be finite and non-negative".into()));
        }
        let min_record = match omega {
            Some(w) if w > 0.0 => 20.0 * 2.0 * std::f64::consts::PI / w,
            _ => 500.0,
        };
        if !(self.t_record >= min_record && self.t_record.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "record window {} is shorter than {min_record:.1}",
                self.t_record
            )));
        }
        if !(self.amplitude_threshold > 0.0) {
            return Err(SimError::InvalidConfig("amplitude threshold must be positive".into()));
        }
        Ok(())
    }
}

/// Samples `values[i] = x(t0 + i h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }
}

fn history_value(m: &ModelSpec, lam: f64, mu: f64, h: History) -> Result<f64, SimError> {
    Ok(match h {
        History::Constant(c) => c,
        History::EquilibriumPlus(d) => solve_equilibrium(m, lam, mu)? + d,
    })
}

/// Integrate from constant history and return the samples over
/// `[t_transient, t_transient + t_record]`.
pub fn integrate(m: &ModelSpec, lam: f64, mu: f64, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    if cfg.steps_per_delay < 1 {
        return Err(SimError::InvalidConfig("steps per delay must be positive".into()));
    }
    let n = cfg.steps_per_delay;
    let h = cfg.step(m.tau);
    let x0 = history_value(m, lam, mu, cfg.history)?;
    let f = |x: f64, xd: f64| m.rhs.eval_real(&Point::new(x, xd, lam, mu));

    let start = (cfg.t_transient / h).round() as usize;
    let stop = start + (cfg.t_record / h).round() as usize;

    // Past nodes k - N .. k - 1 as (value, left slope, right slope). The slopes
    // differ only at t = 0, where the constant history meets the solution.
    let mut past: VecDeque<(f64, f64, f64)> = std::iter::repeat_n((x0, 0.0, 0.0), n).collect();
    let mut x = x0;
    let mut values = Vec::with_capacity(stop - start + 1);
    for k in 0..=stop {
        if k >= start {
            values.push(x);
        }
        if k == stop {
            break;
        }
        let (y0, _, d0) = past[0];
        let k1 = f(x, y0)?;
        let left = if k == 0 { 0.0 } else { k1 };
        // Node k + 1 - N; with N = 1 that is the current node itself.
        let (y1, d1, _) = if n > 1 { past[1] } else { (x, left, k1) };
        let ymid = 0.5 * (y0 + y1) + h * (d0 - d1) / 8.0;
        let k2 = f(x + 0.5 * h * k1, ymid)?;
        let k3 = f(x + 0.5 * h * k2, ymid)?;
        let k4 = f(x + h * k3, y1)?;
        past.pop_front();
        past.push_back((x, left, k1));
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(x.abs() <= BLOWUP_BOUND) {
            return Err(SimError::BlowUp { t: (k + 1) as f64 * h });
        }
    }
    Ok(Trajectory { t0: start as f64 * h, h, values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Equilibrium { y_eq: f64 },
    Oscillation { y_min: f64, y_max: f64, period: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attractor {
    pub outcome: Outcome,
    pub amplitude: f64,
    /// Log-linear slope of the peak-to-trough envelope, when there are enough cycles.
    pub growth_rate: Option<f64>,
}

/// Upward crossings of `level`, linearly interpolated.
fn upward_crossings(s: &Trajectory, level: f64) -> Vec<f64> {
    s.values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < level && w[1] >= level)
        .map(|(i, w)| s.time(i) + s.h * (level - w[0]) / (w[1] - w[0]))
        .collect()
}

/// Least-squares slope of `log(peak - trough)` against time, one point per cycle.
fn envelope_growth(s: &Trajectory) -> Option<f64> {
    let v = &s.values;
    let mut pts = Vec::new();
    let mut last_min: Option<f64> = None;
    for i in 1..v.len().saturating_sub(1) {
        if v[i] < v[i - 1] && v[i] <= v[i + 1] {
            last_min = Some(v[i]);
        } else if v[i] > v[i - 1] && v[i] >= v[i + 1] {
            if let Some(lo) = last_min {
                let a = v[i] - lo;
                if a > 0.0 {
                    pts.push((s.time(i), a.ln()));
                }
            }
        }
    }
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mt, ma) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mt) * (p.1 - ma), b + (p.0 - mt).powi(2)));
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn classify_attractor(s: &Trajectory, cfg: &SimConfig) -> Result<Attractor, SimError> {
    let v = &s.values;
    if v.is_empty() {
        return Err(SimError::InvalidConfig("empty record window".into()));
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let amplitude = hi - lo;
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let growth_rate = envelope_growth(s);
    let settled = amplitude < cfg.amplitude_threshold
        || matches!((cfg.decay_rate_threshold, growth_rate), (Some(th), Some(g)) if g < -th);
    if settled {
        return Ok(Attractor { outcome: Outcome::Equilibrium { y_eq: mean }, amplitude, growth_rate });
    }
    let ups = upward_crossings(s, mean);
    if ups.len() < 3 {
        return Err(SimError::Unclassifiable { amplitude, crossings: ups.len() });
    }
    let period = (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64;
    Ok(Attractor { outcome: Outcome::Oscillation { y_min: lo, y_max: hi, period }, amplitude, growth_rate })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Settled(Attractor),
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub lam: f64,
    pub mu: f64,
    pub outcome: SweepOutcome,
}

impl SweepRecord {
    pub fn is_oscillation(&self) -> bool {
        matches!(self.outcome, SweepOutcome::Settled(Attractor { outcome: Outcome::Oscillation { .. }, .. }))
    }

    pub fn tag(&self) -> &'static str {
        match &self.outcome {
            SweepOutcome::Settled(Attractor { outcome: Outcome::Equilibrium { .. }, .. }) => "equilibrium",
            SweepOutcome::Settled(_) => "oscillation",
            SweepOutcome::Error(_) => "error",
        }
    }
}

pub fn run_point(m: &ModelSpec, lam: f64, mu: f64, cfg: &SimConfig) -> Result<Attractor, SimError> {
    let traj = integrate(m, lam, mu, cfg)?;
    classify_attractor(&traj, cfg)
}

/// One record per grid value, in grid order, run on `workers` threads.
pub fn sweep(
    m: &ModelSpec,
    mu: f64,
    lam_grid: &[f64],
    cfg: &SimConfig,
    workers: usize,
) -> Result<Vec<SweepRecord>, SimError> {
    if lam_grid.is_empty() || lam_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SimError::BadGrid);
    }
    let job = |&lam: &f64| SweepRecord {
        lam,
        mu,
        outcome: match run_point(m, lam, mu, cfg) {
            Ok(a) => SweepOutcome::Settled(a),
            Err(e) => SweepOutcome::Error(e.to_string()),
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| lam_grid.par_iter().map(job).collect()))
}

/// Contiguous runs of oscillation records as `(left, right)` edges placed
/// halfway between neighbouring grid points.
pub fn oscillation_bands(records: &[SweepRecord]) -> Vec<(f64, f64)> {
    let mut bands = Vec::new();
    let mut i = 0;
    while i < records.len() {
        if !records[i].is_oscillation() {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < records.len() && records[j + 1].is_oscillation() {
            j += 1;
        }
        let left = if i > 0 { 0.5 * (records[i - 1].lam + records[i].lam) } else { records[i].lam };
        let right = if j + 1 < records.len() { 0.5 * (records[j].lam + records[j + 1].lam) } else { records[j].lam };
        bands.push((left, right));
        i = j + 1;
    }
    bands
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelkit::{sis_exp, sis_inverse};

    fn synthetic(f: impl Fn(f64) -> f64, h: f64, n: usize) -> Trajectory {
        Trajectory { t0: 0.0, h, values: (0..n).map(|i| f(i as f64 * h)).collect() }
    }

    #[test]
    fn constant_samples_are_equilibrium() {
        let s = synthetic(|_| 0.42, 0.05, 1000);
        let a = classify_attractor(&s, &SimConfig::default()).unwrap();
        let Outcome::Equilibrium { y_eq } = a.outcome else { panic!("{a:?}") };
        assert!((y_eq - 0.42).abs() < 1e-14);
    }

    #[test]
    fn sine_period() {
        let h = 0.05;
        let s = synthetic(|t| (2.0 * std::f64::consts::PI * t / 25.0).sin(), h, 10_001);
        let a = classify_attractor(&s, &SimConfig::default()).unwrap();
        let Outcome::Oscillation { y_min, y_max, period } = a.outcome else { panic!("{a:?}") };
        assert!((period - 25.0).abs() < h);
        assert!((y_min + 1.0).abs() < 1e-3 && (y_max - 1.0).abs() < 1e-3);
        assert!(a.growth_rate.unwrap().abs() < 1e-6);
    }

    #[test]
    fn decaying_envelope_is_equilibrium() {
        let s = synthetic(|t| 0.3 + 1e-2 * (-1e-3 * t).exp() * (0.25 * t).sin(), 0.05, 10_001);
        let a = classify_attractor(&s, &SimConfig::default()).unwrap();
        assert!(matches!(a.outcome, Outcome::Equilibrium { .. }));
        assert!((a.growth_rate.unwrap() + 1e-3).abs() < 1e-5);
        let strict = SimConfig { decay_rate_threshold: None, ..SimConfig::default() };
        assert!(matches!(classify_attractor(&s, &strict).unwrap().outcome, Outcome::Oscillation { .. }));
    }

    #[test]
    fn short_window_is_unclassifiable() {
        let s = synthetic(|t| (t / 5.0).sin(), 0.05, 400);
        assert!(matches!(classify_attractor(&s, &SimConfig::default()), Err(SimError::Unclassifiable { .. })));
    }

    #[test]
    fn config_validation() {
        let c = SimConfig::default();
        assert!(c.validate(None).is_ok());
        assert!(c.validate(Some(0.254)).is_ok());
        assert!(SimConfig { steps_per_delay: 49, ..c }.validate(None).is_err());
        assert!(SimConfig { t_record: 400.0, ..c }.validate(None).is_err());
        assert!(c.validate(Some(0.2)).is_err());
        assert_eq!(SimConfig::steps_for(10.0, 0.05).unwrap(), 200);
        assert!(SimConfig::steps_for(10.0, 0.03).is_err());
    }

    #[test]
    fn equilibrium_history_is_a_fixed_point() {
        for (m, lam, mu) in [(sis_inverse(), 1.784, 2.7), (sis_exp(), 2.14, 1.662)] {
            let y = solve_equilibrium(&m, lam, mu).unwrap();
            let cfg = SimConfig { history: History::EquilibriumPlus(0.0), t_transient: 0.0, ..SimConfig::default() };
            let tr = integrate(&m, lam, mu, &cfg).unwrap();
            assert!(tr.values.iter().all(|v| (v - y).abs() < 1e-9));
        }
    }

    #[test]
    fn linear_decay_matches_exponential() {
        // x' = -x with a delay term that vanishes: RK4 error is O(h^4).
        let m = ModelSpec::new(
            "decay",
            crate::modelkit::parse("-x + 0*xd").unwrap(),
            1.0,
            crate::modelkit::Equilibrium::Explicit(crate::modelkit::parse("0").unwrap()),
        )
        .unwrap();
        let cfg = SimConfig { history: History::Constant(1.0), t_transient: 0.0, t_record: 5.0, ..SimConfig::default() };
        let tr = integrate(&m, 0.0, 0.0, &cfg).unwrap();
        for (i, v) in tr.values.iter().enumerate() {
            assert!((v - (-tr.time(i)).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_delay_matches_method_of_steps() {
        // x' = -x(t-1), x = 1 on [-1, 0]: x(t) = 1 - t on [0, 1],
        // x(t) = 1 - t + (t-1)^2/2 on [1, 2].
        let m = ModelSpec::new(
            "delay",
            crate::modelkit::parse("-xd").unwrap(),
            1.0,
            crate::modelkit::Equilibrium::Explicit(crate::modelkit::parse("0").unwrap()),
        )
        .unwrap();
        let cfg = SimConfig { history: History::Constant(1.0), t_transient: 0.0, t_record: 2.0, ..SimConfig::default() };
        let tr = integrate(&m, 0.0, 0.0, &cfg).unwrap();
        for (i, v) in tr.values.iter().enumerate() {
            let t = tr.time(i);
            let exact = if t <= 1.0 { 1.0 - t } else { 1.0 - t + (t - 1.0).powi(2) / 2.0 };
            assert!((v - exact).abs() < 1e-12, "t = {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let m = ModelSpec::new(
            "grow",
            crate::modelkit::parse("x*x").unwrap(),
            1.0,
            crate::modelkit::Equilibrium::Explicit(crate::modelkit::parse("0").unwrap()),
        )
        .unwrap();
        let cfg = SimConfig { history: History::Constant(1.0), t_transient: 0.0, t_record: 5.0, ..SimConfig::default() };
        assert!(matches!(integrate(&m, 0.0, 0.0, &cfg), Err(SimError::BlowUp { t }) if t < 1.1));
    }

    #[test]
    fn bands_from_records() {
        let osc = SweepOutcome::Settled(Attractor {
            outcome: Outcome::Oscillation { y_min: 0.1, y_max: 0.2, period: 25.0 },
            amplitude: 0.1,
            growth_rate: None,
        });
        let eq = SweepOutcome::Settled(Attractor { outcome: Outcome::Equilibrium { y_eq: 0.1 }, amplitude: 0.0, growth_rate: None });
        let recs: Vec<SweepRecord> = [(1.0, &eq), (1.1, &osc), (1.2, &osc), (1.3, &eq)]
            .iter()
            .map(|(l, o)| SweepRecord { lam: *l, mu: 0.0, outcome: (*o).clone() })
            .collect();
        let b = oscillation_bands(&recs);
        assert_eq!(b.len(), 1);
        assert!((b[0].0 - 1.05).abs() < 1e-12 && (b[0].1 - 1.25).abs() < 1e-12);
    }

    #[test]
    fn unsorted_grid_rejected() {
        assert!(matches!(sweep(&sis_inverse(), 2.7, &[1.8, 1.7], &SimConfig::default(), 1), Err(SimError::BadGrid)));
        assert!(matches!(sweep(&sis_inverse(), 2.7, &[], &SimConfig::default(), 1), Err(SimError::BadGrid)));
    }
}
