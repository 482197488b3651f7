//! Target marginals and the three dependence regimes used to sample them.
//!
//! Every regime produces `X_i = F^{-1}(G(Y_i))` where `Y` is a driving process
//! with marginal cdf `G` and `F` is the target cdf:
//!
//! * Case 1 draws `Y` i.i.d. uniform, so `G` is the identity.
//! * Case 2 uses the two-sided linear process `Y_i = Σ_j a_j ξ_{i-j}` with
//!   `a_j = 3^{-1} 2^{-|j|}` and Bernoulli(1/2) innovations. It is
//!   λ-dependent but not mixing, and `G` has a closed form.
//! * Case 3 uses an ARCH(1) process with Gaussian innovations. `G` is unknown
//!   and is replaced by the empirical cdf of an independent run.

mod density;
mod simulate;

pub use density::{make_density, normal_cdf, normal_pdf, DensityModel, Pdf, Target};
pub use simulate::{
    driving_process, empirical_cdf, marginal_g_case2, read_sample_csv, simulate, write_sample_csv, ArchParams,
    DependenceCase, EmpiricalCdf, ProcessSpec,
};
