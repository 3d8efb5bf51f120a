//! Number formatting and CSV emission.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ddehopf::simulate::{Outcome, SweepOutcome, SweepRecord, Trajectory};
use ddehopf::spectrum::HopfPoint;

/// 17 significant digits, positional for moderate exponents (like `%.17g`);
/// enough to round-trip every double.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let s = format!("{:.*}", (16 - exp) as usize, v);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Destination for a subcommand's main output.
pub fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// `# ddehopf <version> <what>, unix time <secs>`.
pub fn header_comment(what: &str) -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# ddehopf {} {what}, unix time {secs}\n", env!("CARGO_PKG_VERSION"))
}

pub const SWEEP_HEADER: [&str; 7] = ["lam", "mu", "outcome", "y_eq", "y_min", "y_max", "period"];
pub const HOPF_HEADER: [&str; 3] = ["omega", "alpha", "beta"];
pub const TRAJECTORY_HEADER: [&str; 2] = ["t", "x"];

pub fn sweep_row(r: &SweepRecord) -> [String; 7] {
    let (y_eq, y_min, y_max, period) = match &r.outcome {
        SweepOutcome::Settled(a) => match a.outcome {
            Outcome::Equilibrium { y_eq } => (fmt_num(y_eq), String::new(), String::new(), String::new()),
            Outcome::Oscillation { y_min, y_max, period } => {
                (String::new(), fmt_num(y_min), fmt_num(y_max), fmt_num(period))
            }
        },
        SweepOutcome::Error(_) => Default::default(),
    };
    [fmt_num(r.lam), fmt_num(r.mu), r.tag().to_string(), y_eq, y_min, y_max, period]
}

fn row<W: Write, S: AsRef<str>>(w: &mut W, fields: &[S]) -> io::Result<()> {
    let line: Vec<&str> = fields.iter().map(|f| f.as_ref()).collect();
    writeln!(w, "{}", line.join(","))
}

fn preamble<W: Write>(w: &mut W, comment: Option<&str>, header: &[&str]) -> io::Result<()> {
    if let Some(c) = comment {
        w.write_all(c.as_bytes())?;
    }
    row(w, header)
}

pub fn write_sweep<W: Write>(mut w: W, records: &[SweepRecord], comment: Option<&str>) -> io::Result<()> {
    preamble(&mut w, comment, &SWEEP_HEADER)?;
    for r in records {
        row(&mut w, &sweep_row(r))?;
    }
    w.flush()
}

/// One row per point; `None` entries become `# skipped` comment lines.
pub fn write_hopf<W: Write>(mut w: W, rows: &[(f64, Option<HopfPoint>)], comment: Option<&str>) -> io::Result<()> {
    preamble(&mut w, comment, &HOPF_HEADER)?;
    for (omega, p) in rows {
        match p {
            Some(p) => row(&mut w, &[fmt_num(p.omega), fmt_num(p.alpha), fmt_num(p.beta)])?,
            None => writeln!(w, "# skipped omega = {}: sin(tau*omega) = 0", fmt_num(*omega))?,
        }
    }
    w.flush()
}

pub fn write_trajectory<W: Write>(mut w: W, tr: &Trajectory, comment: Option<&str>) -> io::Result<()> {
    preamble(&mut w, comment, &TRAJECTORY_HEADER)?;
    for (i, x) in tr.values.iter().enumerate() {
        row(&mut w, &[fmt_num(tr.time(i)), fmt_num(*x)])?;
    }
    w.flush()
}
