//! Monte-Carlo integrated-squared-error comparison of the three selectors.
//!
//! Every replication of every `(density, case, method)` cell draws its own
//! sample from a seed derived from those coordinates, so results do not
//! depend on scheduling or on the number of worker threads.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::competitors::{cv_select, fixed_bandwidth_curve, rot_bandwidth};
use crate::error::{Error, Result};
use crate::fmt17;
use crate::gl::{estimate_curve, BandwidthGrid, GlConfig};
use crate::kernels::Kernel;
use crate::processes::{simulate, ArchParams, DensityModel, DependenceCase, Pdf, ProcessSpec, Target};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    GL,
    CV,
    RT,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::GL, Method::CV, Method::RT];

    pub fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::GL => "GL",
            Method::CV => "CV",
            Method::RT => "RT",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gl" => Ok(Method::GL),
            "cv" => Ok(Method::CV),
            "rt" => Ok(Method::RT),
            _ => Err(Error::UnknownName {
                kind: "method",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub replications: usize,
    pub n: usize,
    pub densities: Vec<Target>,
    pub cases: Vec<DependenceCase>,
    pub methods: Vec<Method>,
    pub eval_grid_size: usize,
    pub kernel: String,
    pub q: f64,
    pub seed: u64,
    pub delta_n_override: Option<f64>,
    /// Case 2 moving-average truncation.
    pub truncation: usize,
    /// Case 3 driving process.
    pub arch: ArchParams,
    pub auxiliary_sample_size: Option<usize>,
    /// When false, `mean_seconds` is reported as 0 so the report is a pure
    /// function of the configuration.
    pub record_timing: bool,
    /// Keep every replication's ISE in the report.
    pub dump_replications: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            replications: 200,
            n: 1000,
            densities: Target::ALL.to_vec(),
            cases: DependenceCase::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            eval_grid_size: 201,
            kernel: "uniform".into(),
            q: 2.0,
            seed: 20_160_101,
            delta_n_override: None,
            truncation: 40,
            arch: ArchParams::default(),
            auxiliary_sample_size: None,
            record_timing: true,
            dump_replications: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.replications < 1 {
            return bad("replications must be at least 1".into());
        }
        if self.n < 2 {
            return bad(format!("sample size must be at least 2, got {}", self.n));
        }
        if self.eval_grid_size < 2 {
            return bad(format!(
                "eval_grid_size must be at least 2, got {}",
                self.eval_grid_size
            ));
        }
        Kernel::by_name(&self.kernel)?;
        self.gl_config()?.validate()?;
        Ok(())
    }

    fn gl_config(&self) -> Result<GlConfig> {
        Ok(GlConfig {
            q: self.q,
            delta_n_override: self.delta_n_override,
            kernel: Kernel::by_name(&self.kernel)?,
        })
    }

    fn process_spec(&self, case: DependenceCase, target: DensityModel, seed: u64) -> ProcessSpec {
        ProcessSpec {
            truncation: self.truncation,
            arch: self.arch,
            auxiliary_sample_size: self.auxiliary_sample_size,
            ..ProcessSpec::new(case, target, self.n, seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub density: Target,
    pub case: DependenceCase,
    pub method: Method,
    pub mean_ise: f64,
    pub se_ise: f64,
    pub mean_seconds: f64,
    /// Replications that entered the mean.
    pub replications: usize,
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

/// A cell where more than 1% of replications failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortedCell {
    pub density: Target,
    pub case: DependenceCase,
    pub method: Method,
    pub failures: usize,
    pub first_failure: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub density: Target,
    pub case: DependenceCase,
    pub method: Method,
    pub replication: usize,
    pub ise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub cells: Vec<CellResult>,
    #[serde(default)]
    pub aborted: Vec<AbortedCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replication_ise: Option<Vec<ReplicationRecord>>,
}

impl BenchReport {
    pub fn cell(&self, density: Target, case: DependenceCase, method: Method) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.density == density && c.case == case && c.method == method)
    }
}

/// `m` equispaced points covering `[0, 1]`.
pub fn eval_grid(m: usize) -> Vec<f64> {
    let last = (m - 1) as f64;
    (0..m).map(|i| i as f64 / last).collect()
}

/// Trapezoid-rule `∫ (f - f̂)²` over the evaluation grid.
pub fn ise<D: Pdf + ?Sized>(true_model: &D, estimate: &[(f64, f64)], grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 || estimate.len() != grid.len() {
        return Err(Error::domain(format!(
            "estimate has {} points but the evaluation grid has {}",
            estimate.len(),
            grid.len()
        )));
    }
    if let Some(i) = estimate.iter().zip(grid).position(|((x, _), g)| (x - g).abs() > 1e-12) {
        return Err(Error::domain(format!(
            "estimate point {i} is at x = {} but the evaluation grid has {}",
            estimate[i].0, grid[i]
        )));
    }
    let sq: Vec<f64> = estimate
        .iter()
        .map(|&(x, v)| {
            let d = true_model.pdf(x) - v;
            d * d
        })
        .collect();
    Ok(grid
        .windows(2)
        .zip(sq.windows(2))
        .map(|(x, s)| 0.5 * (x[1] - x[0]) * (s[0] + s[1]))
        .sum())
}

/// Fits `method` to `data` and returns its values on `grid`.
pub fn fit_curve(method: Method, data: &[f64], grid: &[f64], gl: &GlConfig) -> Result<Vec<f64>> {
    match method {
        Method::GL => Ok(estimate_curve(data, grid, gl)?.into_iter().map(|e| e.value).collect()),
        Method::CV => {
            let bandwidths = BandwidthGrid::build(data.len(), gl.q)?;
            let h = cv_select(data, &bandwidths, &gl.kernel)?.h;
            fixed_bandwidth_curve(data, h, grid, &gl.kernel)
        }
        Method::RT => {
            let h = rot_bandwidth(data)?.h;
            fixed_bandwidth_curve(data, h, grid, &gl.kernel)
        }
    }
}

struct Outcome {
    ise: f64,
    seconds: f64,
}

fn replicate(
    config: &BenchConfig,
    gl: &GlConfig,
    grid: &[f64],
    target: &DensityModel,
    case: DependenceCase,
    method: Method,
    replication: usize,
) -> Result<Outcome> {
    let seed = derive_seed(
        config.seed,
        &[
            target.target().index(),
            case.number() as u64,
            method.index(),
            replication as u64,
        ],
    );
    let data = simulate(&config.process_spec(case, target.clone(), seed))?;
    let start = Instant::now();
    let values = fit_curve(method, &data, grid, gl)?;
    let seconds = start.elapsed().as_secs_f64();
    let pairs: Vec<(f64, f64)> = grid.iter().copied().zip(values).collect();
    Ok(Outcome {
        ise: ise(target, &pairs, grid)?,
        seconds,
    })
}

/// Runs every cell on the current rayon pool.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let gl = config.gl_config()?;
    let grid = eval_grid(config.eval_grid_size);

    let mut cells = Vec::new();
    let mut aborted = Vec::new();
    let mut dump = config.dump_replications.then(Vec::new);

    for &density in &config.densities {
        let target = DensityModel::new(density);
        for &case in &config.cases {
            for &method in &config.methods {
                let outcomes: Vec<Result<Outcome>> = (0..config.replications)
                    .into_par_iter()
                    .map(|r| replicate(config, &gl, &grid, &target, case, method, r))
                    .collect();

                let mut ises = Vec::with_capacity(outcomes.len());
                let mut seconds = 0.0;
                let mut failures = 0;
                let mut first_failure = None;
                for (r, o) in outcomes.into_iter().enumerate() {
                    match o {
                        Ok(o) => {
                            if let Some(d) = dump.as_mut() {
                                d.push(ReplicationRecord {
                                    density,
                                    case,
                                    method,
                                    replication: r,
                                    ise: o.ise,
                                });
                            }
                            ises.push(o.ise);
                            seconds += o.seconds;
                        }
                        Err(e) => {
                            failures += 1;
                            first_failure.get_or_insert_with(|| format!("replication {r}: {e}"));
                        }
                    }
                }

                if failures * 100 > config.replications || ises.is_empty() {
                    aborted.push(AbortedCell {
                        density,
                        case,
                        method,
                        failures,
                        first_failure: first_failure.unwrap_or_default(),
                    });
                    continue;
                }
                let (mean_ise, se_ise) = mean_and_se(&ises);
                cells.push(CellResult {
                    density,
                    case,
                    method,
                    mean_ise,
                    se_ise,
                    mean_seconds: if config.record_timing {
                        seconds / ises.len() as f64
                    } else {
                        0.0
                    },
                    replications: ises.len(),
                    failures,
                    first_failure,
                });
            }
        }
    }

    Ok(BenchReport {
        config: config.clone(),
        cells,
        aborted,
        replication_ise: dump,
    })
}

/// Runs the benchmark on a dedicated pool of `workers` threads.
pub fn run_benchmark_with_workers(config: &BenchConfig, workers: usize) -> Result<BenchReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} worker threads: {e}")))?;
    pool.install(|| run_benchmark(config))
}

/// Sample mean and its standard error (0 for a single value).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::UnknownName {
                kind: "report format",
                name: s.to_string(),
            }),
        }
    }
}

pub const REPORT_CSV_HEADER: &str = "density,case,method,mean_ise,se_ise,mean_seconds,p,n,seed";
pub const DUMP_CSV_HEADER: &str = "density,case,method,replication,ise";

pub fn report_csv(report: &BenchReport) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for c in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.density,
            c.case,
            c.method,
            fmt17(c.mean_ise),
            fmt17(c.se_ise),
            fmt17(c.mean_seconds),
            c.replications,
            report.config.n,
            report.config.seed
        ));
    }
    out
}

pub fn report_json(report: &BenchReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::InvalidConfig(format!("cannot serialize report: {e}")))
}

pub fn replications_csv(records: &[ReplicationRecord]) -> String {
    let mut out = String::from(DUMP_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.density,
            r.case,
            r.method,
            r.replication,
            fmt17(r.ise)
        ));
    }
    out
}

pub fn write_report(report: &BenchReport, path: &Path, format: ReportFormat) -> Result<()> {
    let payload = match format {
        ReportFormat::Csv => report_csv(report),
        ReportFormat::Json => report_json(report)?,
    };
    write_file(path, payload.as_bytes())
}

pub fn read_report_json(path: &Path) -> Result<BenchReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_config_json(path: &Path) -> Result<BenchConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| Error::io(path, e))
}
