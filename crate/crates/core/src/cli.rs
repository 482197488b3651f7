//! Command-line front end: `simulate`, `estimate` and `bench`.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, invalid
//! combinations), 2 on runtime errors (I/O, degenerate grids, numerical
//! failures). All diagnostics go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, eval_grid, replications_csv, run_benchmark_with_workers, BenchConfig, ReportFormat};
use crate::competitors::{cv_select, fixed_bandwidth_curve, rot_bandwidth};
use crate::error::Error;
use crate::fmt17;
use crate::gl::{estimate_curve, BandwidthGrid, GlConfig, PointEstimate};
use crate::kernels::Kernel;
use crate::processes::{
    read_sample_csv, simulate, write_sample_csv, DensityModel, DependenceCase, ProcessSpec, Target,
};

/// Environment variable holding the default number of bench workers.
pub const WORKERS_ENV: &str = "GLKDE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "glkde", version, about = "Pointwise-adaptive kernel density estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a sample from one of the target densities under a dependence regime.
    Simulate(SimulateArgs),
    /// Estimate a density from a one-column CSV sample.
    Estimate(EstimateArgs),
    /// Run the Monte-Carlo ISE benchmark.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_target)]
    density: Target,
    /// Dependence case: 1 (i.i.d.), 2 (non-causal linear), 3 (ARCH).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    case: u8,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Gl,
    Cv,
    Rt,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("points").required(true).args(["x0", "grid"])))]
struct EstimateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value = "uniform")]
    kernel: String,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    q: f64,
    /// Single evaluation point.
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    /// Number of equispaced evaluation points on [0, 1].
    #[arg(long)]
    grid: Option<usize>,
    /// Override of δ_n (GL only).
    #[arg(long)]
    delta_n: Option<f64>,
    /// Output CSV `x,f_hat,h_hat`; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-bandwidth GL diagnostics CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON document mirroring the bench configuration; defaults apply to
    /// missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Report format; inferred from the `--out` extension when omitted.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-replication ISE dump (CSV).
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Report mean_seconds as 0 so the output depends only on the config.
    #[arg(long)]
    no_timing: bool,
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse::<Target>().map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => bench::write_file(p, bytes)?,
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn run_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let case = DependenceCase::from_number(a.case).map_err(|e| Failure::Usage(format!("--case: {e}")))?;
    let spec = ProcessSpec::new(case, DensityModel::new(a.density), a.n as usize, a.seed);
    let sample = simulate(&spec)?;
    let mut buf = Vec::new();
    write_sample_csv(&sample, &mut buf).map_err(|e| Error::io("<buffer>", e))?;
    emit(a.out.as_deref(), &buf)
}

fn run_estimate(a: EstimateArgs) -> Result<(), Failure> {
    let kernel = Kernel::by_name(&a.kernel).map_err(|e| Failure::Usage(format!("--kernel: {e}")))?;
    if !(a.q > 0.0 && a.q.is_finite()) {
        return Err(Failure::Usage(format!("--q must be positive, got {}", a.q)));
    }
    if let Some(m) = a.grid {
        if m < 2 {
            return Err(Failure::Usage(format!("--grid needs at least 2 points, got {m}")));
        }
    }
    if let Some(x) = a.x0 {
        if !x.is_finite() {
            return Err(Failure::Usage(format!("--x0 must be finite, got {x}")));
        }
    }
    let is_gl = matches!(a.method, MethodArg::Gl);
    if !is_gl && a.diagnostics.is_some() {
        return Err(Failure::Usage(
            "--diagnostics is only available with --method gl".into(),
        ));
    }
    if !is_gl && a.delta_n.is_some() {
        return Err(Failure::Usage("--delta-n is only available with --method gl".into()));
    }
    let config = GlConfig {
        q: a.q,
        delta_n_override: a.delta_n,
        kernel,
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(format!("--delta-n: {e}")))?;

    let data = read_sample_csv(&a.data)?;
    if data.is_empty() {
        return Err(Failure::Runtime(Error::Parse {
            path: a.data.clone(),
            message: "no observations".into(),
        }));
    }
    let points = match (a.x0, a.grid) {
        (Some(x), _) => vec![x],
        (None, Some(m)) => eval_grid(m),
        (None, None) => unreachable!("clap requires --x0 or --grid"),
    };

    let mut out = String::from("x,f_hat,h_hat\n");
    match a.method {
        MethodArg::Gl => {
            let curve = estimate_curve(&data, &points, &config)?;
            for e in &curve {
                out.push_str(&format!("{},{},{}\n", fmt17(e.x0), fmt17(e.value), fmt17(e.h_hat)));
            }
            if let Some(path) = &a.diagnostics {
                bench::write_file(path, diagnostics_csv(&curve).as_bytes())?;
            }
        }
        MethodArg::Cv | MethodArg::Rt => {
            let h = if matches!(a.method, MethodArg::Cv) {
                let grid = BandwidthGrid::build(data.len(), a.q)?;
                cv_select(&data, &grid, &kernel)?.h
            } else {
                rot_bandwidth(&data)?.h
            };
            let values = fixed_bandwidth_curve(&data, h, &points, &kernel)?;
            for (x, v) in points.iter().zip(values) {
                out.push_str(&format!("{},{},{}\n", fmt17(*x), fmt17(v), fmt17(h)));
            }
        }
    }
    emit(a.out.as_deref(), out.as_bytes())
}

/// `x,h,f_hat_h,j_hat_n,m_hat_n,a_term`, one row per (point, bandwidth).
pub fn diagnostics_csv(curve: &[PointEstimate]) -> String {
    let mut out = String::from("x,h,f_hat_h,j_hat_n,m_hat_n,a_term\n");
    for e in curve {
        for d in &e.per_h {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt17(e.x0),
                fmt17(d.h),
                fmt17(d.f_hat_h),
                fmt17(d.j_hat_n),
                fmt17(d.m_hat_n),
                fmt17(d.a_term)
            ));
        }
    }
    out
}

fn run_bench(a: BenchArgs) -> Result<(), Failure> {
    let mut config = match &a.config {
        Some(p) => bench::read_config_json(p).map_err(|e| Failure::Usage(format!("--config: {e}")))?,
        None => BenchConfig::default(),
    };
    if let Some(p) = a.replications {
        config.replications = p;
    }
    if let Some(n) = a.n {
        config.n = n;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if a.no_timing {
        config.record_timing = false;
    }
    if a.dump.is_some() {
        config.dump_replications = true;
    }
    config
        .validate()
        .map_err(|e| Failure::Usage(format!("bench configuration: {e}")))?;
    let workers = match a.workers {
        Some(0) => return Err(Failure::Usage("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let format = match &a.format {
        Some(f) => f.parse::<ReportFormat>()?,
        None => ReportFormat::from_path(&a.out),
    };

    let report = run_benchmark_with_workers(&config, workers)?;
    for c in &report.aborted {
        eprintln!(
            "warning: cell ({}, case {}, {}) aborted after {} failed replications: {}",
            c.density, c.case, c.method, c.failures, c.first_failure
        );
    }
    for c in report.cells.iter().filter(|c| c.failures > 0) {
        eprintln!(
            "warning: cell ({}, case {}, {}) excluded {} failed replications",
            c.density, c.case, c.method, c.failures
        );
    }
    bench::write_report(&report, &a.out, format)?;
    if let (Some(path), Some(records)) = (&a.dump, &report.replication_ise) {
        bench::write_file(path, replications_csv(records).as_bytes())?;
    }
    Ok(())
}
