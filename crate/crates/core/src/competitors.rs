//! Global-bandwidth baselines: least-squares leave-one-out cross validation
//! over the dyadic grid, and the normal-reference rule of thumb.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gl::{kernel_estimate, BandwidthGrid};
use crate::kernels::{check_bandwidth, Kernel, KernelShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GlobalMethod {
    #[serde(rename = "CV")]
    Cv,
    #[serde(rename = "RT")]
    Rt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub h: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalBandwidth {
    pub h: f64,
    pub method: GlobalMethod,
    pub criterion_trace: Option<Vec<CvScore>>,
}

/// The two terms of the LSCV criterion at one bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LscvTerms {
    /// `∫ f̂_h²`
    pub quadratic: f64,
    /// `(2/n) Σ_i f̂_h^{(-i)}(X_i)`
    pub resubstitution: f64,
}

impl LscvTerms {
    pub fn score(&self) -> f64 {
        self.quadratic - self.resubstitution
    }
}

/// Both LSCV terms at bandwidth `h`. `sorted` must be sorted ascending.
///
/// `∫ f̂_h² = n⁻² Σ_{i,j} h⁻¹ (K⋆K)((X_i - X_j)/h)`; for the uniform kernel
/// `K⋆K(t) = (2 - |t|)_+ / 4` is the overlap length of two windows, every other
/// kernel goes through [`Kernel::self_convolution`].
pub fn lscv_terms(sorted: &[f64], h: f64, kernel: &Kernel) -> Result<LscvTerms> {
    check_bandwidth(h)?;
    let n = sorted.len();
    if n < 2 {
        return Err(Error::domain(format!(
            "cross validation needs at least 2 observations, got {n}"
        )));
    }
    let radius = kernel.support_radius;
    let conv = |t: f64| -> Result<f64> {
        match kernel.shape {
            KernelShape::Uniform => Ok((2.0 - t.abs()).max(0.0) / 4.0),
            _ => kernel.self_convolution(t),
        }
    };

    let diag = n as f64 * conv(0.0)? / h;
    let mut off_diag = 0.0;
    let mut loo = 0.0;
    for i in 0..n {
        let xi = sorted[i];
        for &xj in &sorted[i + 1..] {
            let d = xj - xi;
            if d > 2.0 * radius * h {
                break;
            }
            off_diag += conv(d / h)? / h;
            loo += kernel.scaled(h, d);
        }
    }
    let nf = n as f64;
    Ok(LscvTerms {
        quadratic: (diag + 2.0 * off_diag) / (nf * nf),
        resubstitution: 2.0 * (2.0 * loo) / (nf * (nf - 1.0)),
    })
}

/// Least-squares cross validation over `grid`; ties go to the larger bandwidth.
pub fn cv_select(data: &[f64], grid: &BandwidthGrid, kernel: &Kernel) -> Result<GlobalBandwidth> {
    if data.len() < 2 {
        return Err(Error::domain(format!(
            "cross validation needs at least 2 observations, got {}",
            data.len()
        )));
    }
    if grid.is_empty() {
        return Err(Error::domain("cross validation over an empty grid"));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);

    let trace = grid
        .bandwidths()
        .iter()
        .map(|&h| lscv_terms(&sorted, h, kernel).map(|t| CvScore { h, score: t.score() }))
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (k, s) in trace.iter().enumerate().skip(1) {
        if s.score < trace[best].score {
            best = k;
        }
    }
    Ok(GlobalBandwidth {
        h: trace[best].h,
        method: GlobalMethod::Cv,
        criterion_trace: Some(trace),
    })
}

/// Linear-interpolation sample quantile of sorted data.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule `1.06 σ̂ n^(-1/5)` with `σ̂ = min(sd, IQR / 1.34)`.
///
/// When the IQR is zero but the standard deviation is not, the standard
/// deviation is used alone.
pub fn rot_bandwidth(data: &[f64]) -> Result<GlobalBandwidth> {
    let n = data.len();
    if n < 2 {
        return Err(Error::domain(format!(
            "rule-of-thumb bandwidth needs at least 2 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let sd = (data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0)).sqrt();

    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = sorted_quantile(&sorted, 0.75) - sorted_quantile(&sorted, 0.25);

    let sigma = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::DegenerateData(format!(
            "rule-of-thumb bandwidth needs dispersed data, got standard deviation {sd} and IQR {iqr}"
        )));
    }
    Ok(GlobalBandwidth {
        h: 1.06 * sigma * nf.powf(-0.2),
        method: GlobalMethod::Rt,
        criterion_trace: None,
    })
}

/// Kernel estimates with a single bandwidth at every evaluation point.
pub fn fixed_bandwidth_curve(data: &[f64], h: f64, eval_points: &[f64], kernel: &Kernel) -> Result<Vec<f64>> {
    eval_points
        .iter()
        .map(|&x| kernel_estimate(data, h, x, kernel))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_hand_values() {
        let k = Kernel::uniform();
        let data = [0.4, 0.6];
        let t = lscv_terms(&data, 0.5, &k).unwrap();
        assert!((t.quadratic - 0.9).abs() < 1e-12);
        assert!((t.resubstitution - 2.0).abs() < 1e-12);
        let t = lscv_terms(&data, 0.25, &k).unwrap();
        assert!((t.quadratic - 1.6).abs() < 1e-12);
        assert!((t.resubstitution - 4.0).abs() < 1e-12);

        let grid = BandwidthGrid::from_bandwidths(vec![0.5, 0.25], 2, 2.0).unwrap();
        let sel = cv_select(&data, &grid, &k).unwrap();
        assert_eq!(sel.h, 0.25);
        let trace = sel.criterion_trace.unwrap();
        assert!((trace[0].score + 1.1).abs() < 1e-12);
        assert!((trace[1].score + 2.4).abs() < 1e-12);
    }

    #[test]
    fn cv_needs_two_points() {
        let grid = BandwidthGrid::build(1000, 2.0).unwrap();
        assert!(cv_select(&[0.5], &grid, &Kernel::uniform()).is_err());
    }

    #[test]
    fn rot_unit_sd() {
        // symmetric sample with sd exactly 1 and a wide IQR
        let n = 1000;
        let mut data: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let nf = n as f64;
        let scale = ((nf - 1.0) / nf).sqrt();
        data.iter_mut().for_each(|x| *x *= scale);
        let h = rot_bandwidth(&data).unwrap().h;
        assert!((h - 0.26626).abs() < 1e-5, "{h}");
    }

    #[test]
    fn rot_scales_and_rejects_constants() {
        let data: Vec<f64> = (0..50).map(|i| ((i * 13) % 50) as f64 / 7.0).collect();
        let h = rot_bandwidth(&data).unwrap().h;
        let scaled: Vec<f64> = data.iter().map(|x| x * 4.0).collect();
        assert!((rot_bandwidth(&scaled).unwrap().h - 4.0 * h).abs() < 1e-12);
        assert!(matches!(rot_bandwidth(&[2.0; 10]), Err(Error::DegenerateData(_))));
        assert!(rot_bandwidth(&[1.0]).is_err());
    }

    #[test]
    fn fixed_curve_zero_outside_data() {
        let k = Kernel::uniform();
        let v = fixed_bandwidth_curve(&[0.1, 0.2], 0.05, &[0.9, 0.15], &k).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], kernel_estimate(&[0.1, 0.2], 0.05, 0.15, &k).unwrap());
    }
}
