//! Compactly supported smoothing kernels on `[-1, 1]`.
//!
//! Every registry kernel carries hand-derived analytic constants. They are
//! cross-checked against quadrature the first time the registry is built.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::Pdf;
use crate::quadrature::{self, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelShape {
    /// `1/2` on `[-1, 1]`.
    Uniform,
    /// `(1 - |u|)_+`.
    Triangular,
    /// `3/4 (1 - u^2)_+`.
    Epanechnikov,
}

impl KernelShape {
    pub const ALL: [KernelShape; 3] = [KernelShape::Uniform, KernelShape::Triangular, KernelShape::Epanechnikov];

    pub fn name(self) -> &'static str {
        match self {
            KernelShape::Uniform => "uniform",
            KernelShape::Triangular => "triangular",
            KernelShape::Epanechnikov => "epanechnikov",
        }
    }
}

/// A kernel together with its analytic constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub shape: KernelShape,
    pub support_radius: f64,
    /// `‖K‖₁`
    pub l1_norm: f64,
    /// `‖K‖₂²`
    pub l2_norm_sq: f64,
    /// `‖K‖∞`
    pub sup_norm: f64,
    /// Lipschitz constant; `+∞` for kernels with jumps.
    pub lipschitz: f64,
    /// Largest `m` such that all moments `1..=m` vanish.
    pub order: u32,
}

impl Kernel {
    pub const fn uniform() -> Self {
        Kernel {
            shape: KernelShape::Uniform,
            support_radius: 1.0,
            l1_norm: 1.0,
            l2_norm_sq: 0.5,
            sup_norm: 0.5,
            lipschitz: f64::INFINITY,
            order: 1,
        }
    }

    pub const fn triangular() -> Self {
        Kernel {
            shape: KernelShape::Triangular,
            support_radius: 1.0,
            l1_norm: 1.0,
            l2_norm_sq: 2.0 / 3.0,
            sup_norm: 1.0,
            lipschitz: 1.0,
            order: 1,
        }
    }

    pub const fn epanechnikov() -> Self {
        Kernel {
            shape: KernelShape::Epanechnikov,
            support_radius: 1.0,
            l1_norm: 1.0,
            l2_norm_sq: 0.6,
            sup_norm: 0.75,
            lipschitz: 1.5,
            order: 1,
        }
    }

    pub fn from_shape(shape: KernelShape) -> Self {
        match shape {
            KernelShape::Uniform => Self::uniform(),
            KernelShape::Triangular => Self::triangular(),
            KernelShape::Epanechnikov => Self::epanechnikov(),
        }
    }

    /// Looks a kernel up by its registry name (case-insensitive).
    pub fn by_name(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        registry()
            .iter()
            .find(|k| k.name() == lower)
            .copied()
            .ok_or_else(|| Error::UnknownName {
                kind: "kernel",
                name: name.to_string(),
            })
    }

    pub fn name(&self) -> &'static str {
        self.shape.name()
    }

    /// `K(u)`.
    #[inline]
    pub fn evaluate(&self, u: f64) -> f64 {
        let a = u.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self.shape {
            KernelShape::Uniform => 0.5,
            KernelShape::Triangular => 1.0 - a,
            KernelShape::Epanechnikov => 0.75 * (1.0 - u * u),
        }
    }

    /// `K_h(u) = K(u / h) / h`, without argument checking.
    #[inline]
    pub(crate) fn scaled(&self, h: f64, u: f64) -> f64 {
        self.evaluate(u / h) / h
    }

    /// `K_h(u) = K(u / h) / h`.
    pub fn evaluate_scaled(&self, h: f64, u: f64) -> Result<f64> {
        check_bandwidth(h)?;
        Ok(self.scaled(h, u))
    }

    /// Points inside the support where `K` is not smooth.
    pub fn kinks(&self) -> &'static [f64] {
        match self.shape {
            KernelShape::Uniform | KernelShape::Epanechnikov => &[-1.0, 1.0],
            KernelShape::Triangular => &[-1.0, 0.0, 1.0],
        }
    }

    pub fn is_symmetric(&self) -> bool {
        true
    }

    /// `(K ⋆ K)(t) = ∫ K(u) K(u - t) du`, by quadrature over the overlap of
    /// the two supports.
    pub fn self_convolution(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if t >= 2.0 * self.support_radius {
            return Ok(0.0);
        }
        let lo = t - 1.0;
        let hi = 1.0;
        let breaks: Vec<f64> = self.kinks().iter().flat_map(|&k| [k, k + t]).collect();
        quadrature::integrate_piecewise(&|u| self.evaluate(u) * self.evaluate(u - t), lo, hi, &breaks, 1e-12)
    }

    /// Checks the stored constants against quadrature and a grid search.
    pub fn verify_constants(&self) -> Result<()> {
        let tol = 1e-12;
        let k = |u: f64| self.evaluate(u);
        let kinks = self.kinks();
        let mass = quadrature::integrate_piecewise(&k, -1.0, 1.0, kinks, tol)?;
        let l1 = quadrature::integrate_piecewise(&|u| k(u).abs(), -1.0, 1.0, kinks, tol)?;
        let l2 = quadrature::integrate_piecewise(&|u| k(u) * k(u), -1.0, 1.0, kinks, tol)?;
        let sup = (0..=200_000)
            .map(|i| k(-1.0 + i as f64 * 1e-5).abs())
            .fold(0.0, f64::max);
        let checks = [
            ("integral", mass, 1.0, 1e-9),
            ("l1_norm", l1, self.l1_norm, 1e-6),
            ("l2_norm_sq", l2, self.l2_norm_sq, 1e-6),
            ("sup_norm", sup, self.sup_norm, 1e-6),
        ];
        for (what, got, want, tol) in checks {
            if (got - want).abs() > tol {
                return Err(Error::domain(format!(
                    "kernel {}: {what} is {got} numerically but {want} is stored",
                    self.name()
                )));
            }
        }
        for l in 1..=self.order {
            let moment = quadrature::integrate_piecewise(&|u| u.powi(l as i32) * k(u), -1.0, 1.0, kinks, tol)?;
            if moment.abs() > 1e-8 {
                return Err(Error::domain(format!(
                    "kernel {}: moment {l} is {moment}, expected 0 for order {}",
                    self.name(),
                    self.order
                )));
            }
        }
        Ok(())
    }

    /// `∫ K_h(x0 - x) f(x) dx` by adaptive quadrature, split at the density's
    /// breakpoints and the kernel's kinks.
    pub fn convolve_with_density<D: Pdf + ?Sized>(&self, h: f64, f: &D, x0: f64) -> Result<f64> {
        check_bandwidth(h)?;
        let mut breaks: Vec<f64> = f.breakpoints().to_vec();
        breaks.extend(self.kinks().iter().map(|&k| x0 + k * h));
        quadrature::integrate_piecewise(
            &|x| self.scaled(h, x0 - x) * f.pdf(x),
            x0 - h * self.support_radius,
            x0 + h * self.support_radius,
            &breaks,
            DEFAULT_TOLERANCE,
        )
    }
}

pub(crate) fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("bandwidth must be positive and finite, got {h}")))
    }
}

/// All built-in kernels. Constants are verified on first access.
pub fn registry() -> &'static [Kernel] {
    static REGISTRY: OnceLock<Vec<Kernel>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let kernels: Vec<Kernel> = KernelShape::ALL.into_iter().map(Kernel::from_shape).collect();
        for k in &kernels {
            if let Err(e) = k.verify_constants() {
                panic!("kernel registry is inconsistent: {e}");
            }
        }
        kernels
    })
}
