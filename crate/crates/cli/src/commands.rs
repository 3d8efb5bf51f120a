//! Subcommand implementations.

use std::io::Write;
use std::path::PathBuf;

use ddehopf::modelkit::{builtin, ModelSpec};
use ddehopf::normalform::{self, NormalFormError};
use ddehopf::simulate::{self, History, Outcome, SimConfig, SimError, SweepOutcome};
use ddehopf::spectrum::{self, SpectrumError};

use crate::config::RunConfig;
use crate::output::{self, fmt_num};
use crate::{verify as checks, CliError, Cli, Exit, LamRange, SimArgs};

/// Default number of grid points when a λ range has no step.
pub const DEFAULT_SWEEP_POINTS: usize = 40;
pub const DEFAULT_HOPF_POINTS: usize = 100;

/// Command-line flags merged over the run-config file.
#[derive(Debug, Clone)]
pub struct Context {
    pub model: Option<ModelSpec>,
    pub tau: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub header: bool,
    pub file: RunConfig,
}

/// A built-in name, else a path to a model file.
pub fn load_model(source: &str) -> Result<ModelSpec, CliError> {
    if let Some(m) = builtin(source) {
        return Ok(m);
    }
    let src = std::fs::read_to_string(source)
        .map_err(|e| CliError::usage(format!("`{source}` is neither a built-in model nor a readable file: {e}")))?;
    ModelSpec::from_toml(&src).map_err(|e| CliError::usage(format!("{source}: {e}")))
}

impl Context {
    pub fn merge(cli: &Cli, file: RunConfig) -> Result<Context, CliError> {
        let tau = cli.tau.or(file.tau);
        if let Some(t) = tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::usage("--tau must be positive"));
            }
        }
        let model = match cli.model.as_deref().or(file.model.as_deref()) {
            Some(src) => {
                let m = load_model(src)?;
                Some(match tau {
                    Some(t) => m.with_tau(t).map_err(|e| CliError::usage(e.to_string()))?,
                    None => m,
                })
            }
            None => None,
        };
        let workers = match cli.workers.or(file.workers) {
            Some(0) => return Err(CliError::usage("--workers must be at least 1")),
            Some(w) => w,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        Ok(Context {
            model,
            tau,
            out: cli.out.clone().or_else(|| file.out.clone()),
            workers,
            header: !(cli.no_header || file.no_header.unwrap_or(false)),
            file,
        })
    }

    fn model(&self) -> Result<&ModelSpec, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::usage("no model given (use --model or `model` in the config)"))
    }

    fn comment(&self, what: &str) -> Option<String> {
        self.header.then(|| output::header_comment(what))
    }

    fn writer(&self) -> Result<Box<dyn Write>, CliError> {
        output::open_out(self.out.as_deref())
            .map_err(|e| CliError::usage(format!("cannot open output: {e}")))
    }

    /// Summaries go to stdout when the data goes to a file, else to stderr.
    fn note(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }

    /// Simulation settings: flags, then the `[sim]` section, then defaults.
    pub fn sim_config(&self, tau: f64, args: &SimArgs) -> Result<SimConfig, CliError> {
        let s = &self.file.sim;
        let mut cfg = SimConfig::default();
        if let Some(h) = args.step.or(s.step) {
            cfg.steps_per_delay = SimConfig::steps_for(tau, h).map_err(|e| CliError::usage(e.to_string()))?;
        }
        if let Some(t) = args.transient.or(s.transient) {
            cfg.t_transient = t;
        }
        if let Some(t) = args.record.or(s.record) {
            cfg.t_record = t;
        }
        if let Some(p) = args.perturbation.or(s.perturbation) {
            cfg.history = History::EquilibriumPlus(p);
        }
        if let Some(a) = s.amplitude_threshold {
            cfg.amplitude_threshold = a;
        }
        if let Some(d) = s.decay_rate_threshold {
            cfg.decay_rate_threshold = (d >= 0.0).then_some(d);
        }
        cfg.validate(None).map_err(|e| CliError::usage(e.to_string()))?;
        Ok(cfg)
    }
}

pub fn normal_form_exit(e: &NormalFormError) -> Exit {
    match e {
        NormalFormError::DegenerateBeyondScope { .. }
        | NormalFormError::NonDegeneracyViolated(_)
        | NormalFormError::SingularDenominator(_)
        | NormalFormError::Spectrum(SpectrumError::SingularCurvature(_)) => Exit::Degenerate,
        _ => Exit::NonConvergence,
    }
}

pub fn sim_exit(e: &SimError) -> Exit {
    match e {
        SimError::BlowUp { .. } => Exit::BlowUp,
        SimError::InvalidConfig(_) | SimError::BadGrid => Exit::Usage,
        _ => Exit::NonConvergence,
    }
}

pub fn analyze(ctx: &Context, guess: Option<[f64; 2]>) -> Result<(), CliError> {
    let m = ctx.model()?;
    let [lam, mu] = guess
        .or(ctx.file.analyze.guess)
        .ok_or_else(|| CliError::usage("analyze needs --guess LAM,MU"))?;
    let report = normalform::analyze(m, (lam, mu)).map_err(|e| CliError::new(normal_form_exit(&e), e.to_string()))?;
    let kv: String = report.key_values().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    println!("{report}\n\n{kv}");
    if let Some(path) = &ctx.out {
        let mut w = ctx.writer()?;
        if let Some(c) = ctx.comment("analyze") {
            w.write_all(c.as_bytes())?;
        }
        w.write_all(kv.as_bytes())?;
        w.flush()?;
        println!("key-value block written to {}", path.display());
    }
    Ok(())
}

/// `n` interior points of the open interval `(lo, hi)`.
pub fn open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

pub fn hopf_curve(ctx: &Context, range: Option<[f64; 2]>, points: Option<usize>) -> Result<(), CliError> {
    let tau = ctx
        .tau
        .or(ctx.model.as_ref().map(|m| m.tau))
        .ok_or_else(|| CliError::usage("hopf-curve needs --tau or --model"))?;
    let [lo, hi] = range.or(ctx.file.hopf_curve.omega_range).unwrap_or([0.0, std::f64::consts::PI / tau]);
    if !(lo < hi) {
        return Err(CliError::usage("omega range is empty"));
    }
    let n = points.or(ctx.file.hopf_curve.points).unwrap_or(DEFAULT_HOPF_POINTS);
    if n == 0 {
        return Err(CliError::usage("--points must be at least 1"));
    }
    let mut rows = Vec::with_capacity(n);
    for w in open_grid(lo, hi, n) {
        match spectrum::hopf_point(tau, w) {
            Ok(p) => rows.push((w, Some(p))),
            Err(SpectrumError::SingularParametrization { .. }) => rows.push((w, None)),
            Err(e) => return Err(CliError::usage(e.to_string())),
        }
    }
    output::write_hopf(ctx.writer()?, &rows, ctx.comment("hopf-curve").as_deref())?;
    Ok(())
}

/// `lo, lo + step, ...` up to `hi`, or `DEFAULT_SWEEP_POINTS` evenly spaced points.
pub fn lam_grid(r: LamRange) -> Vec<f64> {
    match r.step {
        Some(h) => {
            let n = ((r.hi - r.lo) / h + 1e-9).floor() as usize;
            (0..=n).map(|i| r.lo + i as f64 * h).collect()
        }
        None => {
            let n = DEFAULT_SWEEP_POINTS;
            (0..n).map(|i| r.lo + (r.hi - r.lo) * i as f64 / (n - 1) as f64).collect()
        }
    }
}

pub fn sweep(ctx: &Context, mu: Option<f64>, range: Option<LamRange>, args: &SimArgs) -> Result<(), CliError> {
    let m = ctx.model()?;
    let mu = mu.or(ctx.file.sweep.mu).ok_or_else(|| CliError::usage("sweep needs --mu"))?;
    let range = range
        .or_else(|| ctx.file.sweep.lam_range.map(|[lo, hi]| LamRange { lo, hi, step: ctx.file.sweep.lam_step }))
        .ok_or_else(|| CliError::usage("sweep needs --lam-range LO,HI[,STEP]"))?;
    let cfg = ctx.sim_config(m.tau, args)?;
    let grid = lam_grid(range);
    let records = simulate::sweep(m, mu, &grid, &cfg, ctx.workers).map_err(|e| CliError::new(sim_exit(&e), e.to_string()))?;
    output::write_sweep(ctx.writer()?, &records, ctx.comment("sweep").as_deref())?;

    let errors: Vec<&str> = records
        .iter()
        .filter_map(|r| match &r.outcome {
            SweepOutcome::Error(e) => Some(e.as_str()),
            _ => None,
        })
        .collect();
    let bands = simulate::oscillation_bands(&records);
    if bands.is_empty() {
        ctx.note(&format!("mu = {}: no oscillation band ({} points, {} errors)", mu, records.len(), errors.len()));
    } else {
        let desc: Vec<String> = bands
            .iter()
            .map(|(a, b)| format!("[{}, {}] width {}", fmt_num(*a), fmt_num(*b), fmt_num(b - a)))
            .collect();
        ctx.note(&format!("mu = {}: oscillation band {} ({} errors)", mu, desc.join(", "), errors.len()));
    }
    if errors.len() == records.len() {
        let blew_up = errors.iter().any(|e| e.contains("blew up"));
        let exit = if blew_up { Exit::BlowUp } else { Exit::NonConvergence };
        return Err(CliError::new(exit, format!("every run failed; first error: {}", errors[0])));
    }
    Ok(())
}

pub fn simulate(ctx: &Context, lam: Option<f64>, mu: Option<f64>, args: &SimArgs) -> Result<(), CliError> {
    let m = ctx.model()?;
    let lam = lam.or(ctx.file.simulate.lam).ok_or_else(|| CliError::usage("simulate needs --lam"))?;
    let mu = mu.or(ctx.file.simulate.mu).ok_or_else(|| CliError::usage("simulate needs --mu"))?;
    let cfg = ctx.sim_config(m.tau, args)?;
    let traj = simulate::integrate(m, lam, mu, &cfg).map_err(|e| CliError::new(sim_exit(&e), e.to_string()))?;
    output::write_trajectory(ctx.writer()?, &traj, ctx.comment("simulate").as_deref())?;
    match simulate::classify_attractor(&traj, &cfg) {
        Ok(a) => match a.outcome {
            Outcome::Equilibrium { y_eq } => ctx.note(&format!("equilibrium y = {}", fmt_num(y_eq))),
            Outcome::Oscillation { y_min, y_max, period } => ctx.note(&format!(
                "oscillation y in [{}, {}], period {}",
                fmt_num(y_min),
                fmt_num(y_max),
                fmt_num(period)
            )),
        },
        Err(e) => return Err(CliError::new(sim_exit(&e), e.to_string())),
    }
    Ok(())
}

pub fn verify(ctx: &Context, tolerance: Option<f64>) -> Result<(), CliError> {
    let tol = tolerance.or(ctx.file.verify.tolerance);
    if tol.is_some_and(|t| !(t >= 0.0)) {
        return Err(CliError::usage("--tolerance must be non-negative"));
    }
    let results = checks::run_all(tol);
    let mut failed = 0;
    for r in &results {
        println!("{r}");
        if !r.passed() {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::new(Exit::VerifyFailed, format!("{failed} of {} checks failed", results.len())));
    }
    println!("all {} checks passed", results.len());
    Ok(())
}
