//! The three target marginals on `[0, 1]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature;

/// A function that can be integrated against a kernel.
pub trait Pdf {
    fn pdf(&self, x: f64) -> f64;

    /// Points where `pdf` may jump or kink.
    fn breakpoints(&self) -> &[f64] {
        &[]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Smooth sine arc with a jump at 0.65.
    F1,
    /// Three-component normal mixture restricted to `[0, 1]`, with a sharp
    /// spike at 0.6.
    F2,
    /// Five triangular spikes on `[0, 0.5]` followed by a plateau.
    F3,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::F1, Target::F2, Target::F3];

    pub fn name(self) -> &'static str {
        match self {
            Target::F1 => "f1",
            Target::F2 => "f2",
            Target::F3 => "f3",
        }
    }

    pub fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(Target::F1),
            "f2" => Ok(Target::F2),
            "f3" => Ok(Target::F3),
            _ => Err(Error::UnknownName {
                kind: "density",
                name: s.to_string(),
            }),
        }
    }
}

const F1_SCALE: f64 = 1.28;
const F1_JUMP: f64 = 0.65;

fn f1_frequency() -> f64 {
    1.5 * PI - 1.0
}

/// `(weight, mean, sd)` of the normal components of f2.
const F2_MIXTURE: [(f64, f64, f64); 3] = [(0.5, 0.5, 0.1), (0.25, 0.6, 0.01), (0.25, 0.65, 0.95)];

const F3_PLATEAU: f64 = 0.5;

const NORMALIZER_TOL: f64 = 1e-13;

pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

/// A target marginal with pdf, cdf, and quantile function.
///
/// `normalizer` is the constant that makes the written form a density:
/// the additive `c` for f1 and f2, the multiplicative rescaling for f3.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    target: Target,
    normalizer: f64,
    /// For f1, the point below which the pdf is clipped to zero.
    clip: f64,
    breaks: Vec<f64>,
    cdf_at_breaks: Vec<f64>,
}

impl DensityModel {
    /// Builds (once) and returns the model for `target`.
    pub fn new(target: Target) -> Self {
        static CACHE: [OnceLock<DensityModel>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        CACHE[target as usize]
            .get_or_init(|| Self::build(target).expect("normalizing quadrature of a built-in density"))
            .clone()
    }

    fn build(target: Target) -> Result<Self> {
        let (normalizer, clip, mut breaks) = match target {
            Target::F1 => {
                let c = f1_normalizer()?;
                let clip = f1_clip_point(c);
                (c, clip, vec![0.0, clip, F1_JUMP, 1.0])
            }
            Target::F2 => {
                let mass = quadrature::integrate_piecewise(&f2_mixture, 0.0, 1.0, &[0.5, 0.6, 0.65], NORMALIZER_TOL)?;
                (1.0 - mass, 0.0, vec![0.0, 0.5, 0.6, 0.65, 1.0])
            }
            Target::F3 => {
                let breaks: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).chain([1.0]).collect();
                let mass = quadrature::integrate_piecewise(&f3_written, 0.0, 1.0, &breaks, NORMALIZER_TOL)?;
                (1.0 / mass, 0.0, breaks)
            }
        };
        breaks.dedup();
        let mut model = DensityModel {
            target,
            normalizer,
            clip,
            breaks,
            cdf_at_breaks: Vec::new(),
        };
        model.cdf_at_breaks = model.breaks.iter().map(|&b| model.cdf(b)).collect();
        Ok(model)
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn name(&self) -> &'static str {
        self.target.name()
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match self.target {
            Target::F1 => {
                if x < self.clip {
                    0.0
                } else {
                    (F1_SCALE * (f1_written(x) + self.normalizer)).max(0.0)
                }
            }
            Target::F2 => f2_mixture(x) + self.normalizer,
            Target::F3 => self.normalizer * f3_written(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let raw = match self.target {
            Target::F1 => self.f1_cdf(x),
            Target::F2 => {
                F2_MIXTURE
                    .iter()
                    .map(|&(w, m, s)| w * (normal_cdf(x, m, s) - normal_cdf(0.0, m, s)))
                    .sum::<f64>()
                    + self.normalizer * x
            }
            Target::F3 => self.normalizer * f3_written_cdf(x),
        };
        raw.clamp(0.0, 1.0)
    }

    fn f1_cdf(&self, x: f64) -> f64 {
        let a = f1_frequency();
        let c = self.normalizer;
        let arc = |t: f64| {
            let t = t.max(self.clip);
            F1_SCALE * ((self.clip * a).cos() - (a * t).cos()) / a + F1_SCALE * c * (t - self.clip)
        };
        if x <= F1_JUMP {
            arc(x)
        } else {
            arc(F1_JUMP) + F1_SCALE * (1.0 + c) * (x - F1_JUMP)
        }
    }

    /// Inverse cdf by safeguarded Newton iteration inside the bracketing piece.
    pub fn quantile(&self, u: f64) -> f64 {
        if u.is_nan() {
            return f64::NAN;
        }
        if u <= 0.0 {
            return self.clip;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let piece = self
            .cdf_at_breaks
            .partition_point(|&v| v < u)
            .clamp(1, self.breaks.len() - 1);
        let (mut lo, mut hi) = (self.breaks[piece - 1], self.breaks[piece]);
        let (flo, fhi) = (self.cdf_at_breaks[piece - 1], self.cdf_at_breaks[piece]);
        let mut x = if fhi > flo {
            lo + (u - flo) / (fhi - flo) * (hi - lo)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..200 {
            let fx = self.cdf(x) - u;
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo < 1e-13 {
                break;
            }
            let d = self.pdf(x);
            let newton = x - fx / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}

impl Pdf for DensityModel {
    fn pdf(&self, x: f64) -> f64 {
        DensityModel::pdf(self, x)
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }
}

/// Builds the named density (`f1`, `f2`, or `f3`).
pub fn make_density(name: &str) -> Result<DensityModel> {
    Ok(DensityModel::new(name.parse()?))
}

fn f1_written(x: f64) -> f64 {
    if x <= F1_JUMP {
        (f1_frequency() * x).sin()
    } else {
        1.0
    }
}

fn f1_clip_point(c: f64) -> f64 {
    if c < 0.0 {
        (-c).asin() / f1_frequency()
    } else {
        0.0
    }
}

fn f1_mass(c: f64) -> Result<f64> {
    let clip = f1_clip_point(c);
    quadrature::integrate_piecewise(
        &|x| (F1_SCALE * (f1_written(x) + c)).max(0.0),
        0.0,
        1.0,
        &[clip, F1_JUMP],
        NORMALIZER_TOL,
    )
}

/// The constant `c` with `∫₀¹ 1.28 (w(x) + c)_+ dx = 1`. The mass is
/// nondecreasing in `c`, so bisection converges.
fn f1_normalizer() -> Result<f64> {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f1_mass(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn f2_mixture(x: f64) -> f64 {
    F2_MIXTURE.iter().map(|&(w, m, s)| w * normal_pdf(x, m, s)).sum()
}

fn f3_written(x: f64) -> f64 {
    if x <= 0.0 || x > 1.0 {
        return 0.0;
    }
    if x > 0.5 {
        return F3_PLATEAU;
    }
    let k = (x * 10.0).ceil().clamp(1.0, 5.0);
    let centre = k / 10.0 - 0.05;
    (2.0 - 40.0 * (x - centre).abs()).max(0.0)
}

fn f3_written_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x > 0.5 {
        return 0.5 + F3_PLATEAU * (x.min(1.0) - 0.5);
    }
    let k = (x * 10.0).ceil().clamp(1.0, 5.0);
    let left = (k - 1.0) / 10.0;
    let right = k / 10.0;
    let centre = left + 0.05;
    let done = 0.1 * (k - 1.0);
    if x <= centre {
        done + 20.0 * (x - left) * (x - left)
    } else {
        done + 0.1 - 20.0 * (right - x) * (right - x)
    }
}
