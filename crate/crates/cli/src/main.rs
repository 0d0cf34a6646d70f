use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use tcp_core::benchmarks::{Benchmark, REFERENCE_ROWS};
use tcp_core::diagnostics::{analyze, DiagnosticsOptions};
use tcp_core::homotopy::HomotopyParams;
use tcp_core::io::{parse_vector_arg, ConfigEcho, ProblemFile, RunReport};
use tcp_core::oracle::{solve_brute_force, OracleOptions};
use tcp_core::{trace, TcpError, TcpProblem, TraceStatus, TracerConfig};

const EXIT_MISMATCH: u8 = 1;
const EXIT_STALLED: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_INPUT: u8 = 4;

/// Homotopy solver for tensor complementarity problems.
#[derive(Parser)]
#[command(name = "tcp-solve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the homotopy path for a problem file and write a JSON run report.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        tracer: TracerFlags,
        /// Include the per-step record in the report.
        #[arg(long)]
        trace: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the effective configuration and exit without solving.
        #[arg(long)]
        echo_config: bool,
    },
    /// Re-run the 24 built-in reference rows and compare with the stored values.
    Tables,
    /// Estimate beta and run the sampled structure checks.
    Check {
        problem: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Grid points per axis for the beta estimate.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the tracer against brute-force active-set enumeration (n <= 3).
    Verify {
        problem: PathBuf,
        #[command(flatten)]
        tracer: TracerFlags,
    },
    /// Write a built-in example as a problem file.
    Example {
        /// One of cubic-pair, quartic-pair, quintic-diagonal, cubic-non-p0.
        name: String,
        /// The vector q, e.g. `--q=-5,-3`.
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct TracerFlags {
    /// Shift vector a: a scalar (broadcast) or a comma list.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    a: String,
    /// Shift vector b: a scalar (broadcast) or a comma list.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    b: String,
    #[arg(long, default_value_t = 0.1)]
    dt0: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps1: f64,
    #[arg(long, default_value_t = 1e-12)]
    eps2: f64,
    #[arg(long, default_value_t = 1000)]
    max_steps: usize,
    /// Trip the divergence guard when |x|_inf exceeds this radius.
    #[arg(long)]
    guard_radius: Option<f64>,
    /// Allow zeros in a (experimental: the path may not be smooth).
    #[arg(long)]
    relaxed: bool,
    /// Scale each entry of b by a seeded uniform factor in [0.9, 1.1].
    #[arg(long)]
    perturb_b: Option<u64>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<TcpError> for Failure {
    fn from(e: TcpError) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

impl TracerFlags {
    fn config(&self, n: usize) -> Result<TracerConfig, Failure> {
        let a = parse_vector_arg(&self.a, n).map_err(|e| input_error(format!("--a: {e}")))?;
        let b = parse_vector_arg(&self.b, n).map_err(|e| input_error(format!("--b: {e}")))?;
        let (a, b) = (a.into(), b.into());
        let mut params = if self.relaxed {
            HomotopyParams::relaxed(a, b)?
        } else {
            HomotopyParams::new(a, b)?
        };
        if let Some(seed) = self.perturb_b {
            params = params.with_perturbed_b(seed);
        }
        let mut cfg = TracerConfig::new(params);
        cfg.dt0 = self.dt0;
        cfg.eps1 = self.eps1;
        cfg.eps2 = self.eps2;
        cfg.max_steps = self.max_steps;
        cfg.guard_radius = self.guard_radius;
        cfg.validate(n)?;
        Ok(cfg)
    }
}

fn load_problem(path: &Path) -> Result<TcpProblem, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let file =
        ProblemFile::parse(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(file.to_problem()?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| input_error(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(input_error(e.to_string()))
                }
                _ => Ok(()),
            }
        }
    }
}

fn fmt_vec(v: &[f64], decimals: usize) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.decimals$}")).collect();
    format!("[{}]", parts.join(", "))
}

fn status_code(status: TraceStatus) -> u8 {
    match status {
        TraceStatus::Converged => 0,
        TraceStatus::Stalled | TraceStatus::MaxSteps => EXIT_STALLED,
        TraceStatus::GuardTripped => EXIT_GUARD,
    }
}

fn cmd_solve(
    problem: &Path,
    flags: &TracerFlags,
    with_trace: bool,
    out: Option<&Path>,
    echo_config: bool,
) -> Result<u8, Failure> {
    let p = load_problem(problem)?;
    let cfg = flags.config(p.dim())?;
    if echo_config {
        let echo = ConfigEcho::from(&cfg);
        emit(
            &serde_json::to_string_pretty(&echo).expect("plain data"),
            out,
        )?;
        return Ok(0);
    }
    let start = Instant::now();
    let result = trace(&p, &cfg)?;
    let report = RunReport::new(&result, &cfg, start.elapsed().as_secs_f64(), with_trace);
    emit(&report.to_json(), out)?;
    eprintln!(
        "{}: x = {}  residue = {:.4e}  itr = {}  nwtitr = {}",
        report.status.as_str(),
        fmt_vec(&report.solution, 4),
        report.residue,
        report.itr,
        report.nwtitr
    );
    if report.status == TraceStatus::Stalled {
        eprintln!("hint: the path for this b may be degenerate; retry with --perturb-b <seed>");
    }
    Ok(status_code(report.status))
}

fn cmd_tables() -> Result<u8, Failure> {
    let results: Vec<_> = REFERENCE_ROWS
        .par_iter()
        .map(|row| {
            let r = trace(&row.problem(), &TracerConfig::with_defaults(row.q.len()));
            (row, r)
        })
        .collect();
    let mut code = 0;
    let mut current = None;
    for (row, r) in results {
        if current != Some(row.benchmark) {
            current = Some(row.benchmark);
            println!("\n{}", row.benchmark.name());
            println!(
                "{:<16} {:>4} {:>7}  {:<28} {:>12}",
                "q", "itr", "nwtitr", "solution", "residue"
            );
        }
        let r = r?;
        let x: Vec<f64> = r.solution.x.iter().copied().collect();
        let dev = x
            .iter()
            .zip(row.solution)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        // Print -0.0000 as 0.0000.
        let shown: Vec<f64> = x
            .iter()
            .map(|v| if v.abs() < 5e-5 { 0.0 } else { *v })
            .collect();
        let flag = if r.status != TraceStatus::Converged || dev > 1e-3 {
            code = EXIT_MISMATCH;
            format!(
                "  MISMATCH (status {}, deviation {dev:.2e})",
                r.status.as_str()
            )
        } else {
            String::new()
        };
        println!(
            "{:<16} {:>4} {:>7}  {:<28} {:>12.4e}{flag}",
            fmt_vec(row.q, 0),
            r.itr,
            r.nwtitr,
            fmt_vec(&shown, 4),
            r.residue
        );
    }
    Ok(code)
}

fn cmd_check(problem: &Path, opts: DiagnosticsOptions, out: Option<&Path>) -> Result<u8, Failure> {
    let p = load_problem(problem)?;
    let q: Vec<f64> = p.q().iter().copied().collect();
    let report = analyze(p.tensor(), &q, &opts)?;
    emit(
        &serde_json::to_string_pretty(&report).expect("plain data"),
        out,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifyReport {
    tracer_status: TraceStatus,
    tracer_solution: Vec<f64>,
    oracle_solutions: Vec<Vec<f64>>,
    max_difference: Option<f64>,
    agree: bool,
    unique: bool,
}

const AGREEMENT_TOL: f64 = 1e-4;

fn cmd_verify(problem: &Path, flags: &TracerFlags) -> Result<u8, Failure> {
    let p = load_problem(problem)?;
    let cfg = flags.config(p.dim())?;
    let oracle = solve_brute_force(&p, &OracleOptions::default())?;
    let r = trace(&p, &cfg)?;
    let tracer_solution: Vec<f64> = r.solution.x.iter().copied().collect();
    let oracle_solutions: Vec<Vec<f64>> = oracle
        .iter()
        .map(|c| c.x.iter().copied().collect())
        .collect();
    let max_difference = oracle_solutions
        .iter()
        .map(|s| {
            s.iter()
                .zip(&tracer_solution)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .min_by(f64::total_cmp);
    let agree =
        r.status == TraceStatus::Converged && max_difference.is_some_and(|d| d <= AGREEMENT_TOL);
    let unique = oracle_solutions.len() == 1;
    let report = VerifyReport {
        tracer_status: r.status,
        tracer_solution,
        oracle_solutions,
        max_difference,
        agree,
        unique,
    };
    emit(
        &serde_json::to_string_pretty(&report).expect("plain data"),
        None,
    )?;
    eprintln!(
        "{}, {}",
        if agree { "agree" } else { "DISAGREE" },
        if unique {
            "unique".to_string()
        } else {
            format!("{} solutions found", report.oracle_solutions.len())
        }
    );
    Ok(if agree && unique { 0 } else { EXIT_MISMATCH })
}

fn cmd_example(name: &str, q: &str, out: Option<&Path>) -> Result<u8, Failure> {
    let names: Vec<&str> = Benchmark::ALL.iter().map(|b| b.name()).collect();
    let bench = Benchmark::from_name(name).ok_or_else(|| {
        input_error(format!(
            "unknown example {name:?}; expected one of {names:?}"
        ))
    })?;
    let n = bench.tensor().dim();
    let q = parse_vector_arg(q, n).map_err(|e| input_error(format!("--q: {e}")))?;
    emit(
        &ProblemFile::from_problem(&bench.problem(&q)).to_json(),
        out,
    )?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve {
            problem,
            tracer,
            trace,
            out,
            echo_config,
        } => cmd_solve(&problem, &tracer, trace, out.as_deref(), echo_config),
        Command::Tables => cmd_tables(),
        Command::Check {
            problem,
            seed,
            samples,
            grid,
            out,
        } => {
            if samples == 0 || grid < 2 {
                return Err(input_error("need --samples >= 1 and --grid >= 2"));
            }
            let opts = DiagnosticsOptions {
                grid_per_axis: grid,
                samples,
                seed,
                ..DiagnosticsOptions::default()
            };
            cmd_check(&problem, opts, out.as_deref())
        }
        Command::Verify { problem, tracer } => cmd_verify(&problem, &tracer),
        Command::Example { name, q, out } => cmd_example(&name, &q, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
