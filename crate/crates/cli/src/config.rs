//! Run-config files: TOML with one optional section per subcommand.
//!
//! ```toml
//! model = "sis-exp"      # built-in name or path to a model file
//! tau = 10.0
//!
//! [sweep]
//! mu = 1.662
//! lam_range = [2.0, 2.3]
//! lam_step = 0.0075
//!
//! [sim]
//! step = 0.05
//! transient = 2000.0
//! record = 500.0
//! ```
//!
//! Flags given on the command line override values read here.

use std::path::PathBuf;

use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "run config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    pub tau: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub no_header: Option<bool>,
    #[serde(default)]
    pub analyze: AnalyzeSection,
    #[serde(default, rename = "hopf-curve")]
    pub hopf_curve: HopfCurveSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    pub guess: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfCurveSection {
    pub omega_range: Option<[f64; 2]>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub mu: Option<f64>,
    pub lam_range: Option<[f64; 2]>,
    pub lam_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub lam: Option<f64>,
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub step: Option<f64>,
    pub transient: Option<f64>,
    pub record: Option<f64>,
    pub perturbation: Option<f64>,
    pub amplitude_threshold: Option<f64>,
    /// Negative disables the envelope-trend test.
    pub decay_rate_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub tolerance: Option<f64>,
}

fn finite(name: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !x.is_finite() => Err(ConfigError(format!("`{name}` must be finite"))),
        _ => Ok(()),
    }
}

fn range(name: &str, r: Option<[f64; 2]>) -> Result<(), ConfigError> {
    match r {
        Some([lo, hi]) if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
            Err(ConfigError(format!("`{name}` must be an increasing pair of finite numbers")))
        }
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<RunConfig, ConfigError> {
        let c: RunConfig = toml::from_str(src).map_err(|e| ConfigError(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError("`tau` must be positive".into()));
            }
        }
        if self.workers == Some(0) {
            return Err(ConfigError("`workers` must be at least 1".into()));
        }
        if let Some(g) = self.analyze.guess {
            finite("analyze.guess", Some(g[0]))?;
            finite("analyze.guess", Some(g[1]))?;
        }
        range("hopf-curve.omega_range", self.hopf_curve.omega_range)?;
        if self.hopf_curve.points == Some(0) {
            return Err(ConfigError("`hopf-curve.points` must be at least 1".into()));
        }
        finite("sweep.mu", self.sweep.mu)?;
        range("sweep.lam_range", self.sweep.lam_range)?;
        if let Some(s) = self.sweep.lam_step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(ConfigError("`sweep.lam_step` must be positive".into()));
            }
        }
        finite("simulate.lam", self.simulate.lam)?;
        finite("simulate.mu", self.simulate.mu)?;
        let s = &self.sim;
        for (name, v) in [
            ("sim.step", s.step),
            ("sim.transient", s.transient),
            ("sim.record", s.record),
            ("sim.perturbation", s.perturbation),
            ("sim.amplitude_threshold", s.amplitude_threshold),
            ("sim.decay_rate_threshold", s.decay_rate_threshold),
            ("verify.tolerance", self.verify.tolerance),
        ] {
            finite(name, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config_parses() {
        let src = r#"
model = "sis-exp"
tau = 10.0
workers = 2
no_header = true

[analyze]
guess = [2.1, 1.7]

[hopf-curve]
omega_range = [0.0, 0.314]
points = 50

[sweep]
mu = 1.662
lam_range = [2.0, 2.3]
lam_step = 0.0075

[simulate]
lam = 2.14
mu = 1.662

[sim]
step = 0.05
transient = 2000.0
record = 500.0
perturbation = 1e-3

[verify]
tolerance = 1e-8
"#;
        let c = RunConfig::from_toml(src).unwrap();
        assert_eq!(c.model.as_deref(), Some("sis-exp"));
        assert_eq!(c.analyze.guess, Some([2.1, 1.7]));
        assert_eq!(c.hopf_curve.points, Some(50));
        assert_eq!(c.sweep.lam_step, Some(0.0075));
        assert_eq!(c.sim.record, Some(500.0));
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn bad_configs_are_rejected() {
        for src in [
            "tau = -1.0",
            "workers = 0",
            "unknown = 1",
            "[sweep]\nlam_range = [2.0, 1.0]",
            "[sweep]\nlam_step = 0.0",
            "[sim]\nstep = nan",
            "[analyze]\nguess = [1.0]",
            "[hopf-curve]\npoints = 0",
            "model = 3",
        ] {
            assert!(RunConfig::from_toml(src).is_err(), "{src}");
        }
    }
}
