//! Command-line driver for the `fpoct` analyzer.
//!
//! Exit codes: 0 when the analysis is certified and raised no alarm, 1 when
//! it raised alarms, 2 when `--verify` is given and the post-fixpoint check
//! failed, 3 on usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use fpoct::engine::{analyze, Domain, SolverConfig};
use fpoct::fp::{parse_exact, round, FloatFormat, RoundingMode};
use fpoct::frontend::compile;
use fpoct::interval::Thresholds;

pub mod report;

pub use report::Report;
use report::{ConfigEcho, ErrorEntry};

pub const EXIT_CLEAN: u8 = 0;
pub const EXIT_ALARMS: u8 = 1;
pub const EXIT_UNCERTIFIED: u8 = 2;
pub const EXIT_USAGE: u8 = 3;

/// Static analysis of floating-point run-time errors.
#[derive(Debug, Parser)]
#[command(name = "fpoct", version)]
pub struct Args {
    /// Program to analyze (`.fga`).
    pub file: PathBuf,
    /// Abstract domain: interval, interval+lin or octagon.
    #[arg(long, default_value = "octagon", value_parser = parse_domain)]
    pub domain: Domain,
    /// `builtin` for the ±2^i ramp over doubles, or a file of numbers
    /// separated by whitespace or commas (`#` starts a comment).
    #[arg(long, default_value = "builtin")]
    pub thresholds: String,
    /// Relative perturbation for widening and narrowing.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Rounds at one loop head before its invariant is set to top.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Decreasing steps per loop head.
    #[arg(long = "max-narrow")]
    pub max_narrow: Option<usize>,
    /// Rounds of plain joins at a loop head before widening.
    #[arg(long = "widening-delay")]
    pub widening_delay: Option<usize>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Include the invariant of every program point.
    #[arg(long = "dump-invariants")]
    pub dump_invariants: bool,
    /// Exit with 2 unless the result is a certified post-fixpoint.
    #[arg(long)]
    pub verify: bool,
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    Domain::from_name(s).ok_or_else(|| format!("unknown domain `{s}` (expected interval, interval+lin or octagon)"))
}

/// Parse a thresholds file. Values are rounded to the nearest double.
pub fn parse_thresholds(text: &str) -> Result<Thresholds, String> {
    let mut values = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for word in line.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()) {
            let exact = parse_exact(word).map_err(|e| format!("line {}: `{word}`: {e}", n + 1))?;
            let v = round(FloatFormat::DOUBLE, RoundingMode::NearestEven, &exact)
                .map_err(|_| format!("line {}: `{word}` is not a finite double", n + 1))?;
            values.push(v);
        }
    }
    Ok(Thresholds::new(values))
}

/// Run the analyzer with command-line `args` (program name first) and
/// return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{shown}");
                    EXIT_CLEAN
                }
                _ => {
                    let _ = write!(err, "{shown}");
                    EXIT_USAGE
                }
            };
        }
    };
    let program = args.file.display().to_string();
    let defaults = SolverConfig::with_domain(args.domain);
    let mut config = SolverConfig {
        eps: args.eps.unwrap_or(defaults.eps),
        max_increasing: args.max_iter.unwrap_or(defaults.max_increasing),
        max_decreasing: args.max_narrow.unwrap_or(defaults.max_decreasing),
        widening_delay: args.widening_delay.unwrap_or(defaults.widening_delay),
        ..defaults
    };
    let echo = ConfigEcho {
        domain: args.domain.name().to_string(),
        thresholds: args.thresholds.clone(),
        eps: config.eps,
        max_iter: config.max_increasing,
        max_narrow: config.max_decreasing,
        widening_delay: config.widening_delay,
    };
    let fail = |out: &mut dyn Write, err: &mut dyn Write, errors: Vec<ErrorEntry>| {
        for e in &errors {
            if e.line == 0 {
                let _ = writeln!(err, "{program}: error: {}", e.message);
            } else {
                let _ = writeln!(err, "{program}:{}:{}: error: {}", e.line, e.col, e.message);
            }
        }
        if args.json {
            let _ = writeln!(out, "{}", Report::failed(program.clone(), echo.clone(), errors).to_json());
        }
        EXIT_USAGE
    };
    let general = |message: String| vec![ErrorEntry { line: 0, col: 0, message }];

    if args.thresholds != "builtin" {
        let parsed = std::fs::read_to_string(&args.thresholds)
            .map_err(|e| format!("cannot read thresholds `{}`: {e}", args.thresholds))
            .and_then(|t| parse_thresholds(&t).map_err(|e| format!("thresholds `{}`: {e}", args.thresholds)));
        match parsed {
            Ok(t) => config.thresholds = t,
            Err(m) => return fail(out, err, general(m)),
        }
    }
    if let Err(e) = config.validate() {
        return fail(out, err, general(e.to_string()));
    }
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => return fail(out, err, general(format!("cannot read program: {e}"))),
    };
    let cfg = match compile(&text) {
        Ok(c) => c,
        Err(diags) => {
            let errors = diags.iter().map(|d| ErrorEntry { line: d.span.line, col: d.span.col, message: d.message.clone() }).collect();
            return fail(out, err, errors);
        }
    };

    let start = Instant::now();
    let analysis = analyze(&cfg, &config);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let report = Report::from_analysis(program, echo, &cfg, &analysis, args.dump_invariants, ms);
    let shown = if args.json { report.to_json() + "\n" } else { report.to_text() };
    let _ = write!(out, "{shown}");
    exit_code(&report, args.verify)
}

/// The exit code of a completed analysis.
pub fn exit_code(report: &Report, verify: bool) -> u8 {
    if verify && !report.certified {
        EXIT_UNCERTIFIED
    } else if !report.alarms.is_empty() {
        EXIT_ALARMS
    } else {
        EXIT_CLEAN
    }
}
