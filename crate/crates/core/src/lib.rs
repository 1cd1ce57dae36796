//! Numerical laboratory for traces of products of Toeplitz matrices whose
//! symbols have power-law singularities at the origin.
//!
//! The crate computes Fourier coefficients of singular symbols, exact and
//! stochastic traces of `∏_j T_n(g_j) T_n(h_j)`, the limit
//! `(2π)^(2p-1) ∫ ∏_j g_j h_j`, and the empirical rate at which
//! `n^{-1}·trace` approaches that limit. The [`proofcheck`] module probes
//! the kernel bounds and integral identities behind the rate.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fourier;
pub mod limits;
pub mod output;
pub mod proofcheck;
pub mod quadrature;
pub mod rates;
pub mod symbols;
pub mod toeplitz;

pub use error::{LabError, Result};
pub use fourier::{fourier_coefficient, fourier_coefficients_batch, CoeffCache, CoeffTable};
pub use limits::{exponents, limit_integral, ExponentSummary};
pub use quadrature::{singular_integral, QuadConfig};
pub use rates::{
    check_rate_bound, fit_loglog_slope, measure_error, run_rate_experiment, RateExperiment,
    RateReport, TraceMethod,
};
pub use symbols::{Family, SymbolPairSet, SymbolSpec};
pub use toeplitz::{
    build_toeplitz, toeplitz_matvec, trace_product_exact, trace_product_stochastic, ProductChain,
    ToeplitzOperator, TraceResult,
};
