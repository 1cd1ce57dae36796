//! Numerical probes of the kernel bounds, integral representations and
//! domain decomposition that underlie the convergence rate.

pub mod dirichlet;
pub mod domain;
pub mod lemma3;
pub mod parts;
pub mod qmc;
pub mod representation;
pub mod suite;

pub use dirichlet::{
    check_dirichlet_bound, check_l_bound_family, check_l_convolution, check_l_convolution_periodic,
    dirichlet_eval, l_bound, l_convolution, l_convolution_periodic, reproducing_identity,
};
pub use domain::{check_sandwich, in_domain_w, DomainPoint, WMembership};
pub use lemma3::{check_lemma3_bound, Lemma3Report};
pub use parts::{estimate_in_parts, parts_growth_sweep, PartsEstimate};
pub use representation::{representation_check, RepresentationCheck, Sampler};
pub use suite::{run_suites, Suite, VerifySettings};

use crate::symbols::{reduce_angle, SymbolSpec};

/// Arguments closer than this to a singular point are dropped.
pub(crate) const SINGULAR_CUTOFF: f64 = 1e-12;

/// Periodic symbol value; `None` next to a singularity.
#[inline]
pub(crate) fn symbol_at(spec: &SymbolSpec, x: f64) -> Option<f64> {
    let r = reduce_angle(x).abs();
    if spec.alpha() > 0.0 && r < SINGULAR_CUTOFF {
        None
    } else {
        Some(spec.eval_abs(r))
    }
}
