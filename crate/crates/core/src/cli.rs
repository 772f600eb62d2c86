//! Command-line front end and the JSON/CSV file formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{generate, GenParams};
use crate::linalg::Matrix;
use crate::newton::NewtonResult;
use crate::oracle::{grid_refine_min, GridSpec};
use crate::path::{outer_iteration_bound, PathResult};
use crate::problem::{check_psi_convexity, validate, ConvexityStatus, ProblemSpec};
use crate::solver::{
    compute_tau0, phase1_iteration_bound, phase1_tolerance, problem_size, solve_with,
    PathPhaseTrace, Solution, SolveOptions, SolveTrace,
};

/// Environment variable capping phase-1 worker threads.
pub const THREADS_ENV: &str = "NCQPBTR_THREADS";

/// The oracle-compare slack is this many grid spacings.
pub const ORACLE_SLACK_SPACINGS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(rename = "x_L")]
    pub x_lower: Vec<f64>,
    #[serde(rename = "x_R")]
    pub x_upper: Vec<f64>,
    pub delta: f64,
    #[serde(rename = "tau_F")]
    pub tau_f: f64,
    #[serde(rename = "pi_F")]
    pub pi_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl ProblemFile {
    pub fn from_spec(spec: &ProblemSpec, name: Option<String>) -> Self {
        Self {
            n: spec.n(),
            q: spec.q().as_slice().to_vec(),
            c: spec.c().to_vec(),
            x_lower: spec.x_lower().to_vec(),
            x_upper: spec.x_upper().to_vec(),
            delta: spec.delta(),
            tau_f: spec.tau_f(),
            pi_f: spec.pi_f(),
            name,
        }
    }

    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let n = self.n;
        if self.q.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "Q",
                expected: n * n,
                got: self.q.len(),
            });
        }
        for (what, v) in [
            ("c", &self.c),
            ("x_L", &self.x_lower),
            ("x_R", &self.x_upper),
        ] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        ProblemSpec::new(
            Matrix::from_row_major(n, self.q.clone())?,
            self.c.clone(),
            self.x_lower.clone(),
            self.x_upper.clone(),
            self.delta,
            self.tau_f,
            self.pi_f,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

pub fn read_problem(path: &Path) -> Result<ProblemSpec> {
    ProblemFile::read(path)?.to_spec()
}

fn to_json_string<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializing plain data cannot fail");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Summary {
    pub eps: f64,
    pub iteration_bound: usize,
    pub iterations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    /// `τ₀` (phase 2) or `π₀` (phase 3).
    pub start: f64,
    pub end: f64,
    pub eps: f64,
    pub outer_iterations: usize,
    pub outer_iteration_bound: f64,
    pub inner_iterations: Vec<usize>,
    pub final_iterations: usize,
    pub linear_solves: usize,
    pub schedule: Vec<f64>,
}

impl PathSummary {
    fn new(t: &PathPhaseTrace, barrier_weight: f64) -> Self {
        let p: &PathResult = &t.path;
        Self {
            start: t.start,
            end: t.end,
            eps: t.eps,
            outer_iterations: p.outer_iterations,
            outer_iteration_bound: outer_iteration_bound(barrier_weight, t.start, t.end),
            inner_iterations: p.inner_iterations_per_step.clone(),
            final_iterations: p.final_iterations,
            linear_solves: p.total_linear_solves,
            schedule: p.tau_schedule.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub phase1: Phase1Summary,
    pub phase2: PathSummary,
    pub phase3: PathSummary,
    pub total_linear_solves: usize,
    pub psi_convexity: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub x_hat: Vec<f64>,
    pub phi_value: f64,
    pub certified_gap: f64,
    pub trace: TraceSummary,
    pub warnings: Vec<String>,
    #[serde(rename = "L")]
    pub problem_size: f64,
}

impl SolutionFile {
    pub fn new(spec: &ProblemSpec, solution: &Solution, trace: &SolveTrace) -> Self {
        let n = spec.n() as f64;
        Self {
            x_hat: solution.x_hat.clone(),
            phi_value: solution.phi_value,
            certified_gap: solution.certified_gap,
            trace: TraceSummary {
                phase1: Phase1Summary {
                    eps: trace.phase1.eps,
                    iteration_bound: phase1_iteration_bound(trace.phase1.eps),
                    iterations: trace.phase1.iterations(),
                },
                phase2: PathSummary::new(&trace.phase2, 64.0 * n),
                phase3: PathSummary::new(&trace.phase3, 32.0 * n),
                total_linear_solves: trace.total_linear_solves,
                psi_convexity: convexity_name(trace.convexity).into(),
            },
            warnings: trace.warnings.clone(),
            problem_size: trace.problem_size,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

pub fn convexity_name(c: ConvexityStatus) -> &'static str {
    match c {
        ConvexityStatus::Certified => "Certified",
        ConvexityStatus::Unknown => "Unknown",
    }
}

pub const TRACE_HEADER: [&str; 7] = [
    "phase",
    "outer_step",
    "inner_iter",
    "tau_or_pi",
    "lambda_sq",
    "step_length_t",
    "objective_value",
];

/// One CSV row per evaluated Newton iterate. Phase-1 rows use the coordinate
/// index as `outer_step` and leave `tau_or_pi` empty; the final solve of a
/// path phase has `outer_step` one past the last centering step.
pub fn write_trace_csv<W: Write>(out: W, trace: &SolveTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    let mut emit = |phase: u8, step: usize, tau: Option<f64>, r: &NewtonResult| -> Result<()> {
        for (k, s) in r.steps.iter().enumerate() {
            w.write_record([
                phase.to_string(),
                step.to_string(),
                k.to_string(),
                tau.map_or(String::new(), |t| t.to_string()),
                s.lambda_sq.to_string(),
                s.t.to_string(),
                s.value.to_string(),
            ])
            .map_err(csv_err)?;
        }
        Ok(())
    };
    for (j, r) in trace.phase1.runs.iter().enumerate() {
        emit(1, j, None, r)?;
    }
    for (phase, p) in [(2, &trace.phase2.path), (3, &trace.phase3.path)] {
        for s in &p.solves {
            emit(phase, s.outer_step, Some(s.tau), &s.result)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(
    name = "ncqpbtr",
    version,
    about = "Interior-point solver for box- and trust-region-constrained QPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file.
    Solve {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
        /// Write a per-iteration CSV trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Report the domain, convexity certificate and solver constants.
    Check {
        input: PathBuf,
        /// Tolerance used for the problem size `L`.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Solve and compare against the grid oracle (n ≤ 3).
    OracleCompare {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q_min_eig: f64,
    #[arg(long, default_value_t = 2.0)]
    pub box_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau_f: f64,
    #[arg(long, default_value_t = 0.01)]
    pub pi_f: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tightness: f64,
    #[arg(long)]
    pub out: PathBuf,
}

impl GenerateArgs {
    fn params(&self) -> GenParams {
        GenParams {
            n: self.n,
            seed: self.seed,
            q_min_eig: self.q_min_eig,
            box_scale: self.box_scale,
            delta: self.delta,
            tau_f: self.tau_f,
            pi_f: self.pi_f,
            tightness: self.tightness,
        }
    }
}

/// Runs one command and returns the process exit code. Diagnostics go to
/// standard error.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Solve {
            input,
            tol,
            out,
            trace,
        } => cmd_solve(&input, tol, &out, trace.as_deref()),
        Command::Generate(args) => cmd_generate(&args.params(), &args.out),
        Command::Check { input, tol } => cmd_check(&input, tol),
        Command::OracleCompare { input, tol } => cmd_oracle_compare(&input, tol),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// `NCQPBTR_THREADS`, default 1.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t| t > 0)
        .unwrap_or(1)
}

pub fn cmd_solve(input: &Path, tol: f64, out: &Path, trace_path: Option<&Path>) -> Result<i32> {
    let spec = read_problem(input)?;
    let options = SolveOptions {
        tol,
        threads: threads_from_env(),
    };
    let (solution, trace) = solve_with(&spec, &options)?;
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    fs::write(out, SolutionFile::new(&spec, &solution, &trace).to_json())?;
    if let Some(p) = trace_path {
        write_trace_csv(fs::File::create(p)?, &trace)?;
    }
    println!(
        "phi = {}  certified gap = {:e}  linear solves = {}",
        solution.phi_value, solution.certified_gap, trace.total_linear_solves
    );
    Ok(0)
}

pub fn cmd_generate(params: &GenParams, out: &Path) -> Result<i32> {
    let spec = generate(params)?;
    let name = format!("generated n={} seed={}", params.n, params.seed);
    fs::write(out, ProblemFile::from_spec(&spec, Some(name)).to_json())?;
    Ok(0)
}

pub fn cmd_check(input: &Path, tol: f64) -> Result<i32> {
    let spec = read_problem(input)?;
    let geometry = validate(&spec)?;
    let status = check_psi_convexity(&spec);
    println!("delta_min = {}", geometry.shortest_side);
    println!("psi convexity: {}", convexity_name(status));
    println!("|Gamma_hat| = {}", 4 * spec.n());
    println!("tau0 = {}", compute_tau0(&spec));
    println!("phase 1 eps = {:e}", phase1_tolerance(&geometry, &spec));
    println!("L = {}", problem_size(&spec, &geometry, tol));
    if spec.asymmetry_warning() {
        eprintln!("warning: Q is not symmetric; its symmetric part is used");
    }
    Ok(match status {
        ConvexityStatus::Certified => 0,
        ConvexityStatus::Unknown => 1,
    })
}

pub fn cmd_oracle_compare(input: &Path, tol: f64) -> Result<i32> {
    let spec = read_problem(input)?;
    let geometry = validate(&spec)?;
    if spec.n() > 3 {
        return Err(Error::DimensionTooLarge { n: spec.n() });
    }
    let (solution, _) = solve_with(
        &spec,
        &SolveOptions {
            tol,
            threads: threads_from_env(),
        },
    )?;
    let oracle = grid_refine_min(&spec, &geometry, &GridSpec::for_dim(spec.n()))?;
    let gap = solution.phi_value - oracle.phi_star;
    let slack = tol + ORACLE_SLACK_SPACINGS * oracle.resolution;
    println!("solver phi = {}", solution.phi_value);
    println!("oracle phi = {}", oracle.phi_star);
    println!("gap = {gap:e} (allowed {slack:e})");
    Ok(if gap <= slack { 0 } else { 1 })
}
