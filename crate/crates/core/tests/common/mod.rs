#![allow(dead_code)]

use glkde::KernelShape;

pub fn oracle_kernel(shape: KernelShape, h: f64, u: f64) -> f64 {
    let t = u / h;
    if t.abs() > 1.0 {
        return 0.0;
    }
    let k = match shape {
        KernelShape::Uniform => 0.5,
        KernelShape::Triangular => 1.0 - t.abs(),
        KernelShape::Epanechnikov => 0.75 * (1.0 - t * t),
    };
    k / h
}

pub fn oracle_estimate(data: &[f64], h: f64, x0: f64, shape: KernelShape) -> f64 {
    let mut s = 0.0;
    for &x in data {
        s += oracle_kernel(shape, h, x0 - x);
    }
    s / data.len() as f64
}

pub fn oracle_jn(data: &[f64], h: f64, x0: f64, shape: KernelShape) -> f64 {
    let mut s = 0.0;
    for &x in data {
        let k = oracle_kernel(shape, h, x0 - x);
        s += k * k;
    }
    let n = data.len() as f64;
    s / (n * n)
}

pub fn oracle_threshold(j: f64, h: f64, n: usize, q: f64, delta: f64) -> f64 {
    (2.0 * q * h.ln().abs() * (j + delta / (n as f64 * h))).sqrt()
}

/// Nested-loop `A(h, x0)` straight from the definition.
pub fn oracle_excess(data: &[f64], h: f64, x0: f64, grid: &[f64], shape: KernelShape, q: f64, delta: f64) -> f64 {
    let n = data.len();
    let m = |b: f64| oracle_threshold(oracle_jn(data, b, x0, shape), b, n, q, delta);
    let mut a = 0.0f64;
    for &eta in grid {
        let joint = if h > eta { h } else { eta };
        let diff = (oracle_estimate(data, joint, x0, shape) - oracle_estimate(data, eta, x0, shape)).abs();
        a = a.max(diff - (m(eta) + m(joint)));
    }
    a
}

/// One-sample Kolmogorov–Smirnov statistic against `cdf`.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic; ties are stepped over together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n * m) as f64).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean of a dependent series by non-overlapping
/// batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(size).map(mean).collect();
    let m = mean(&means);
    let b = means.len() as f64;
    let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}
