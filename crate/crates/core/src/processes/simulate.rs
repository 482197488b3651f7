use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::density::DensityModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DependenceCase {
    Iid,
    LambdaNoncausal,
    Arch,
}

impl DependenceCase {
    pub const ALL: [DependenceCase; 3] = [
        DependenceCase::Iid,
        DependenceCase::LambdaNoncausal,
        DependenceCase::Arch,
    ];

    /// 1, 2 or 3.
    pub fn number(self) -> u8 {
        match self {
            DependenceCase::Iid => 1,
            DependenceCase::LambdaNoncausal => 2,
            DependenceCase::Arch => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(DependenceCase::Iid),
            2 => Ok(DependenceCase::LambdaNoncausal),
            3 => Ok(DependenceCase::Arch),
            _ => Err(Error::UnknownName {
                kind: "dependence case",
                name: n.to_string(),
            }),
        }
    }
}

impl fmt::Display for DependenceCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for DependenceCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse::<u8>()
            .map_err(|_| Error::UnknownName {
                kind: "dependence case",
                name: s.to_string(),
            })
            .and_then(Self::from_number)
    }
}

impl Serialize for DependenceCase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for DependenceCase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = u8::deserialize(d)?;
        Self::from_number(n).map_err(serde::de::Error::custom)
    }
}

/// `σ_i² = γ + α X_{i-1}² + β σ_{i-1}²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub burn_in: usize,
}

impl Default for ArchParams {
    fn default() -> Self {
        ArchParams {
            alpha: 0.5,
            beta: 0.0,
            gamma: 0.5,
            burn_in: 1000,
        }
    }
}

impl ArchParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "ARCH alpha must lie in [0, 1) for stationarity, got {}",
                self.alpha
            )));
        }
        if !(self.beta >= 0.0 && self.alpha + self.beta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ARCH requires beta >= 0 and alpha + beta < 1, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "ARCH gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Stationary `E σ²`, used as the starting volatility.
    pub fn stationary_variance(&self) -> f64 {
        self.gamma / (1.0 - self.alpha - self.beta)
    }
}

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub case: DependenceCase,
    pub target: DensityModel,
    pub n: usize,
    pub seed: u64,
    /// Case 2: the moving average uses lags `|j| <= truncation`.
    pub truncation: usize,
    /// Case 3 driving process.
    pub arch: ArchParams,
    /// Case 3: size of the independent run behind the empirical `G`;
    /// `None` means `n`.
    pub auxiliary_sample_size: Option<usize>,
}

impl ProcessSpec {
    pub fn new(case: DependenceCase, target: DensityModel, n: usize, seed: u64) -> Self {
        ProcessSpec {
            case,
            target,
            n,
            seed,
            truncation: 40,
            arch: ArchParams::default(),
            auxiliary_sample_size: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("sample size must be at least 1".into()));
        }
        if self.case == DependenceCase::LambdaNoncausal && self.truncation == 0 {
            return Err(Error::InvalidConfig(
                "moving-average truncation must be at least 1".into(),
            ));
        }
        if self.case == DependenceCase::Arch {
            self.arch.validate()?;
            if self.auxiliary_sample_size == Some(0) {
                return Err(Error::InvalidConfig("auxiliary sample size must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Draws a sample of length `spec.n` whose marginal is `spec.target`.
pub fn simulate(spec: &ProcessSpec) -> Result<Vec<f64>> {
    let (y, g) = draw(spec)?;
    let f = &spec.target;
    let out = match spec.case {
        DependenceCase::Iid => y.into_iter().map(|u| f.quantile(u)).collect(),
        DependenceCase::LambdaNoncausal => y.into_iter().map(|v| f.quantile(marginal_g_case2(v))).collect(),
        DependenceCase::Arch => {
            let g = g.expect("ARCH draws carry an empirical cdf");
            let half_rank = 0.5 / g.len() as f64;
            y.into_iter()
                .map(|v| f.quantile(g.eval(v).clamp(half_rank, 1.0 - half_rank)))
                .collect()
        }
    };
    Ok(out)
}

/// The latent process `Y` behind [`simulate`] for the same spec and seed:
/// uniforms in Case 1, the moving average in Case 2, the ARCH path in Case 3.
pub fn driving_process(spec: &ProcessSpec) -> Result<Vec<f64>> {
    draw(spec).map(|(y, _)| y)
}

fn draw(spec: &ProcessSpec) -> Result<(Vec<f64>, Option<EmpiricalCdf>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(match spec.case {
        DependenceCase::Iid => ((0..spec.n).map(|_| rng.random::<f64>()).collect(), None),
        DependenceCase::LambdaNoncausal => (moving_average(&mut rng, spec.n, spec.truncation), None),
        DependenceCase::Arch => {
            let y = arch_path(&mut rng, spec.n, &spec.arch);
            let m = spec.auxiliary_sample_size.unwrap_or(spec.n);
            let g = EmpiricalCdf::new(arch_path(&mut rng, m, &spec.arch))?;
            (y, Some(g))
        }
    })
}

/// `Y_i = Σ_{|j| <= J} a_j ξ_{i-j}`, `a_j = (1/3) 2^{-|j|}`.
fn moving_average(rng: &mut ChaCha8Rng, n: usize, truncation: usize) -> Vec<f64> {
    let xi: Vec<f64> = (0..n + 2 * truncation)
        .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
        .collect();
    let weights: Vec<f64> = (0..=2 * truncation)
        .map(|k| {
            let lag = k.abs_diff(truncation) as i32;
            0.5f64.powi(lag) / 3.0
        })
        .collect();
    xi.windows(weights.len())
        .map(|w| w.iter().zip(&weights).map(|(x, a)| x * a).sum())
        .collect()
}

fn arch_path(rng: &mut ChaCha8Rng, n: usize, p: &ArchParams) -> Vec<f64> {
    let mut sigma2 = p.stationary_variance();
    let mut x = sigma2.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let mut out = Vec::with_capacity(n);
    for i in 0..p.burn_in + n {
        sigma2 = p.gamma + p.alpha * x * x + p.beta * sigma2;
        x = sigma2.sqrt() * rng.sample::<f64, _>(StandardNormal);
        if i >= p.burn_in {
            out.push(x);
        }
    }
    out
}

/// Cdf of `U + U'` for independent uniforms.
fn triangular_sum_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= 1.0 {
        0.5 * t * t
    } else if t < 2.0 {
        1.0 - 0.5 * (2.0 - t) * (2.0 - t)
    } else {
        1.0
    }
}

/// Marginal cdf of the Case 2 driving process, the law of `(U + U' + ξ)/3`.
pub fn marginal_g_case2(y: f64) -> f64 {
    0.5 * triangular_sum_cdf(3.0 * y) + 0.5 * triangular_sum_cdf(3.0 * y - 1.0)
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::domain("empirical cdf of an empty sample"));
        }
        if sample.iter().any(|x| x.is_nan()) {
            return Err(Error::domain("empirical cdf of a sample containing NaN"));
        }
        sample.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: sample })
    }

    /// `#{X_i <= t} / n`.
    pub fn eval(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&x| x <= t) as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

pub fn empirical_cdf(sample: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(sample.to_vec())
}

/// Writes a one-column CSV with header `x`, 17 significant digits per value.
pub fn write_sample_csv(sample: &[f64], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "x")?;
    for x in sample {
        writeln!(out, "{}", crate::fmt17(*x))?;
    }
    Ok(())
}

/// Reads a one-column CSV. A non-numeric first line is treated as a header.
pub fn read_sample_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(v) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {}: non-finite value {v}", i + 1),
                })
            }
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {}: cannot parse '{field}' as a number", i + 1),
                })
            }
        }
    }
    Ok(out)
}
