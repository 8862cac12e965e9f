//! Command-line front end: `solve`, `table` and `validate`.
//!
//! Every command returns an [`Outcome`] holding the exit code and the text for
//! stdout and stderr, so the binary only prints and exits.
//!
//! Exit codes: 0 success, 1 usage, 2 precondition or unsupported parameter,
//! 3 envelope violation, failed validation or failed cross-check.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use peakseq::algebra::Affine;
use peakseq::linsys::{
    a_lambda, envelope_from_certificate, p_q, table_run, to_csv, PowerNormSource, TablePath,
    TableRow, BENCHMARK_LAMBDAS,
};
use peakseq::sequences::{
    collatz_envelope_check, factorial_solve_with, fibonacci_solve_with, logistic_solve_with,
    syracuse_excursion, CollatzCheck, Excursion, FactorialChoice, FactorialConstantEnvelope,
    FactorialRatio, FactorialSequenceEnvelope, FibonacciRatio, Logistic, LogisticEnvelope,
};
use peakseq::{
    solve_traced, validate, ConstantEnvelope, PeakError, PeakSolution, SolverConfig, TieRule,
    TraceStep, Violation,
};

/// Environment variable overriding the useful-index scan cap.
pub const SCAN_LIMIT_VAR: &str = "PEAKSEQ_SCAN_LIMIT";

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_VIOLATION: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "peakseq", version, about = "Certified peaks of real sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the supremum and a maximizer of a bundled sequence.
    Solve(SolveArgs),
    /// Peak of `||A_lambda^k||_2^2` for a list of `lambda` values.
    Table(TableArgs),
    /// Check an envelope against its sequence on a finite horizon.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tie {
    Min,
    Max,
}

impl From<Tie> for TieRule {
    fn from(t: Tie) -> Self {
        match t {
            Tie::Min => TieRule::MinArgmax,
            Tie::Max => TieRule::MaxArgmax,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FactorialEnvelopeKind {
    Sequence,
    Constant,
}

impl From<FactorialEnvelopeKind> for FactorialChoice {
    fn from(k: FactorialEnvelopeKind) -> Self {
        match k {
            FactorialEnvelopeKind::Sequence => FactorialChoice::Sequence,
            FactorialEnvelopeKind::Constant => FactorialChoice::Constant,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(subcommand)]
    pub adapter: SolveAdapter,
    #[arg(long, value_enum, default_value_t = Tie::Min, global = true)]
    pub tie: Tie,
    /// Record one line per scanned index.
    #[arg(long, global = true)]
    pub trace: bool,
    #[arg(long, value_enum, default_value_t = SolveFormat::Json, global = true)]
    pub format: SolveFormat,
}

#[derive(Debug, Subcommand)]
pub enum SolveAdapter {
    /// `a^n / n!`.
    Factorial {
        #[arg(long)]
        a: u64,
        #[arg(long, value_enum, default_value_t = FactorialEnvelopeKind::Sequence)]
        envelope: FactorialEnvelopeKind,
    },
    /// Ratios of consecutive terms of `u_{n+2} = u_{n+1} + u_n`.
    Fibonacci {
        #[arg(long)]
        u0: u64,
        #[arg(long)]
        u1: u64,
    },
    /// `y_{n+1} = r y_n (1 - y_n)`.
    Logistic {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        y0: f64,
    },
    /// Largest value of an accelerated Syracuse trajectory.
    Syracuse {
        #[arg(long)]
        n0: u128,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
    },
    /// `||A_lambda^k||_2^2` with the certificate `Diag(1, ..., 1, q)`.
    Linsys {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        q: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Comma-separated values; defaults to the benchmark list.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub lambda: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    /// Use the closed forms instead of matrix powers.
    #[arg(long)]
    pub closed_form: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(subcommand)]
    pub adapter: ValidateAdapter,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub horizon: u64,
}

#[derive(Debug, Subcommand)]
pub enum ValidateAdapter {
    Factorial {
        #[arg(long)]
        a: u64,
        #[arg(long, value_enum, default_value_t = FactorialEnvelopeKind::Sequence)]
        envelope: FactorialEnvelopeKind,
        /// Multiplies the declared ratio.
        #[arg(long, default_value_t = 1.0)]
        beta_scale: f64,
    },
    Fibonacci {
        #[arg(long)]
        u0: u64,
        #[arg(long)]
        u1: u64,
        #[arg(long, default_value_t = 1.0)]
        beta_scale: f64,
    },
    Logistic {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        y0: f64,
        #[arg(long, default_value_t = 1.0)]
        beta_scale: f64,
    },
    Linsys {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Direct check of `y_n <= a b^n + c`.
    Syracuse {
        #[arg(long)]
        n0: u128,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        c: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

/// JSON report of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<PeakSolution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excursion: Option<Excursion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStep>>,
    pub timing: Timing,
}

/// JSON report of `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub command: Vec<String>,
    pub horizon: u64,
    pub clean: bool,
    pub first_violation: Option<u64>,
    #[serde(default)]
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collatz: Option<CollatzCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: u8, stderr: String) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &PeakError) -> u8 {
    match err {
        PeakError::EnvelopeViolation { .. }
        | PeakError::NoUsefulIndex { .. }
        | PeakError::CrossCheckFailed(_)
        | PeakError::NotLyapunov => EXIT_VIOLATION,
        _ => EXIT_PRECONDITION,
    }
}

fn error_outcome(err: PeakError) -> Outcome {
    Outcome::fail(exit_code(&err), format!("error: {err}\n"))
}

/// Parse `args` (program name first) and run, reading the scan cap from the
/// environment.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_scan_limit(args, std::env::var(SCAN_LIMIT_VAR).ok())
}

pub fn run_with_scan_limit<I, T>(args: I, scan_limit: Option<String>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::fail(EXIT_USAGE, text)
            } else {
                Outcome::ok(text)
            };
        }
    };
    let mut config = SolverConfig::default();
    if let Some(raw) = scan_limit {
        match raw.trim().parse::<u64>() {
            Ok(limit) => config = config.with_scan_limit(limit),
            Err(_) => {
                return Outcome::fail(
                    EXIT_USAGE,
                    format!("error: {SCAN_LIMIT_VAR} must be a nonnegative integer, got {raw:?}\n"),
                )
            }
        }
    }
    match cli.command {
        Command::Solve(args) => cmd_solve(&args, config, echo),
        Command::Table(args) => cmd_table(&args),
        Command::Validate(args) => cmd_validate(&args, echo),
    }
}

pub fn cmd_solve(args: &SolveArgs, config: SolverConfig, command: Vec<String>) -> Outcome {
    let config = config.with_tie(args.tie.into()).with_trace(args.trace);
    let start = Instant::now();
    let result = match args.adapter {
        SolveAdapter::Factorial { a, envelope } => {
            factorial_solve_with(a, envelope.into(), &config).map(Solved::Peak)
        }
        SolveAdapter::Fibonacci { u0, u1 } => fibonacci_solve_with(u0, u1, &config).map(Solved::Peak),
        SolveAdapter::Logistic { r, y0 } => logistic_solve_with(r, y0, &config).map(Solved::Peak),
        SolveAdapter::Syracuse { n0, max_steps } => {
            syracuse_excursion(n0, max_steps).map(Solved::Excursion)
        }
        SolveAdapter::Linsys { lambda, d, q } => linsys_solve(lambda, d, q, &config).map(Solved::Peak),
    };
    let elapsed_seconds = start.elapsed().as_secs_f64();
    let solved = match result {
        Ok(s) => s,
        Err(e) => return error_outcome(e),
    };
    let mut report = RunReport {
        command,
        solution: None,
        excursion: None,
        trace: None,
        timing: Timing { elapsed_seconds },
    };
    match solved {
        Solved::Peak((solution, trace)) => {
            report.solution = Some(solution);
            if args.trace {
                report.trace = Some(trace);
            }
        }
        Solved::Excursion(e) => report.excursion = Some(e),
    }
    Outcome::ok(match args.format {
        SolveFormat::Json => to_json(&report),
        SolveFormat::Table => render_report(&report),
    })
}

enum Solved {
    Peak((PeakSolution, Vec<TraceStep>)),
    Excursion(Excursion),
}

fn linsys_solve(
    lambda: f64,
    d: usize,
    q: Option<f64>,
    config: &SolverConfig,
) -> peakseq::Result<(PeakSolution, Vec<TraceStep>)> {
    let a = a_lambda(lambda, d)?;
    let env = envelope_from_certificate(&a, &p_q(lambda, d, q)?)?;
    solve_traced(&PowerNormSource { a }, &env, config)
}

pub fn cmd_table(args: &TableArgs) -> Outcome {
    let lambdas = args.lambda.clone().unwrap_or_else(|| BENCHMARK_LAMBDAS.to_vec());
    if lambdas.is_empty() {
        return Outcome::fail(EXIT_USAGE, "error: empty lambda list\n".into());
    }
    let path = if args.closed_form {
        TablePath::ClosedForm
    } else {
        TablePath::Generic
    };
    match table_run(&lambdas, args.d, args.q, path) {
        Ok(rows) => Outcome::ok(match args.format {
            TableFormat::Csv => to_csv(&rows),
            TableFormat::Json => to_json(&rows),
        }),
        Err(e) => error_outcome(e),
    }
}

/// Parse the CSV written by `table`.
pub fn parse_csv(text: &str) -> Option<Vec<TableRow>> {
    let mut lines = text.lines();
    lines.next()?;
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            match cols[..] {
                [lambda, k_s, max, f] => Some(TableRow {
                    lambda: lambda.parse().ok()?,
                    k_s: k_s.parse().ok()?,
                    max_norm_sq: max.parse().ok()?,
                    f_floor: f.parse().ok()?,
                }),
                _ => None,
            }
        })
        .collect()
}

pub fn cmd_validate(args: &ValidateArgs, command: Vec<String>) -> Outcome {
    let horizon = args.horizon;
    let checked = match args.adapter {
        ValidateAdapter::Factorial {
            a,
            envelope,
            beta_scale,
        } => validate_factorial(a, envelope, beta_scale, horizon),
        ValidateAdapter::Fibonacci { u0, u1, beta_scale } => FibonacciRatio::new(u0, u1)
            .and_then(|src| {
                let env = src.envelope();
                let scaled = ConstantEnvelope::new(env.func, env.beta * beta_scale)?;
                Ok(validate(&src, &scaled, horizon))
            }),
        ValidateAdapter::Logistic { r, y0, beta_scale } => Logistic::new(r, y0).map(|src| {
            let env = LogisticEnvelope {
                beta: src.r * beta_scale,
                ..src.envelope()
            };
            validate(&src, &env, horizon)
        }),
        ValidateAdapter::Linsys { lambda, d, q } => a_lambda(lambda, d).and_then(|a| {
            let env = envelope_from_certificate(&a, &p_q(lambda, d, q)?)?;
            Ok(validate(&PowerNormSource { a }, &env, horizon))
        }),
        ValidateAdapter::Syracuse { n0, a, b, c } => {
            return match collatz_envelope_check(n0, a, b, c, horizon) {
                Ok(outcome) => {
                    let first_violation = match outcome {
                        CollatzCheck::Consistent => None,
                        CollatzCheck::ViolatedAt(k) => Some(k),
                    };
                    validation_outcome(ValidationReport {
                        command,
                        horizon,
                        clean: first_violation.is_none(),
                        first_violation,
                        violations: Vec::new(),
                        collatz: Some(outcome),
                    })
                }
                Err(e) => error_outcome(e),
            };
        }
    };
    match checked {
        Ok(violations) => validation_outcome(ValidationReport {
            command,
            horizon,
            clean: violations.is_empty(),
            first_violation: violations.first().map(Violation::index),
            violations,
            collatz: None,
        }),
        Err(e) => error_outcome(e),
    }
}

fn validate_factorial(
    a: u64,
    kind: FactorialEnvelopeKind,
    beta_scale: f64,
    horizon: u64,
) -> peakseq::Result<Vec<Violation>> {
    let src = FactorialRatio::new(a)?;
    let beta = src.beta() * beta_scale;
    Ok(match kind {
        FactorialEnvelopeKind::Sequence => {
            validate(&src, &FactorialSequenceEnvelope::with_beta(a, beta)?, horizon)
        }
        FactorialEnvelopeKind::Constant => {
            let slope = FactorialConstantEnvelope::new(a)?.slope();
            validate(&src, &ConstantEnvelope::new(Affine::new(slope, 0.0)?, beta)?, horizon)
        }
    })
}

fn validation_outcome(report: ValidationReport) -> Outcome {
    let stdout = to_json(&report);
    match report.first_violation {
        None => Outcome::ok(stdout),
        Some(k) => Outcome {
            code: EXIT_VIOLATION,
            stdout,
            stderr: format!("validation failed: first violation at k={k}\n"),
        },
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Human-readable rendering of a [`RunReport`].
pub fn render_report(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command           {}", report.command.join(" "));
    if let Some(s) = &report.solution {
        let _ = writeln!(out, "sup_value         {}", s.sup_value);
        let _ = writeln!(out, "argmax            {}", s.argmax());
        let _ = writeln!(out, "argmax_min        {}", s.argmax_min);
        let _ = writeln!(out, "argmax_max        {}", s.argmax_max);
        let _ = writeln!(out, "truncation_index  {}", s.truncation_index);
        let _ = writeln!(out, "terms_evaluated   {}", s.terms_evaluated);
    }
    if let Some(e) = &report.excursion {
        let _ = writeln!(out, "max               {}", e.max);
        let _ = writeln!(out, "argmax            {}", e.argmax_min);
        let _ = writeln!(out, "reached_cycle     {}", e.reached_cycle);
        let _ = writeln!(out, "steps             {}", e.steps);
    }
    let _ = writeln!(out, "elapsed_seconds   {:.6}", report.timing.elapsed_seconds);
    if let Some(trace) = &report.trace {
        let _ = writeln!(out, "\n{:>10}  {:>24}  {:>24}  {:>10}", "k", "u_k", "F", "K");
        for step in trace {
            let f = step.functional.map_or_else(|| "-".into(), |f| f.to_string());
            let k = step.running_k.map_or_else(|| "inf".into(), |k| k.to_string());
            let _ = writeln!(out, "{:>10}  {:>24}  {:>24}  {:>10}", step.k, step.term, f, k);
        }
    }
    out
}
