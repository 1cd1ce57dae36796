//! The trace as a `2p`-dimensional integral of symbols against kernels,
//! in the direct coordinates `y` and in the difference coordinates `x`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dirichlet::dirichlet_eval;
use super::domain::HYPERPLANE_CUTOFF;
use super::qmc::randomized_qmc;
use super::symbol_at;
use crate::error::{LabError, Result};
use crate::fourier::CoeffCache;
use crate::limits::two_pi_pow;
use crate::quadrature::{GaussLegendre, NeumaierSum, QuadConfig};
use crate::symbols::SymbolPairSet;
use crate::toeplitz::ProductChain;

pub const QMC_REPLICATES: usize = 16;
pub const MIN_QMC_SAMPLES: usize = 1000;
pub const MIN_GRID_NODES: usize = 64;
pub const GRID_TOLERANCE: f64 = 1e-3;
const GRID_PANEL_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    TensorGrid,
    QuasiMc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationCheck {
    pub n: usize,
    pub p: usize,
    pub exact_trace: f64,
    /// Estimate in the direct coordinates.
    pub integral_estimate: f64,
    pub estimate_stderr: f64,
    /// Estimate in the difference coordinates.
    pub x_form_estimate: f64,
    pub x_form_stderr: f64,
    pub sampler: Sampler,
    /// Integrand evaluations per form.
    pub samples: usize,
    pub seed: u64,
    /// Both forms within tolerance of the exact trace.
    pub pass: bool,
    /// The two forms within their combined error of each other.
    pub forms_agree: bool,
}

/// `Re[∏ g_j(y_{2j-1}) h_j(y_{2j}) ∏ D_n(y_j - y_{j-1})]`, `y_0 = y_{2p}`.
fn y_form(pairs: &SymbolPairSet, n: usize, y: &[f64]) -> Option<f64> {
    let mut sym = 1.0;
    for (j, (g, h)) in pairs.pairs().iter().enumerate() {
        sym *= symbol_at(g, y[2 * j])? * symbol_at(h, y[2 * j + 1])?;
    }
    let m = y.len();
    let mut ker = dirichlet_eval(n, y[0] - y[m - 1]);
    for j in 1..m {
        ker *= dirichlet_eval(n, y[j] - y[j - 1]);
    }
    Some(sym * ker.re)
}

/// `Re[∏ g_j(x̄_{2j-1}) h_j(x̄_{2j}) D_n(x̄_{2p} - x_1)^* ∏_{j≥2} D_n(x_j)]`.
fn x_form(pairs: &SymbolPairSet, n: usize, x: &[f64]) -> Option<f64> {
    if x[0].abs() < HYPERPLANE_CUTOFF {
        return None;
    }
    let mut bar = 0.0;
    let mut sym = 1.0;
    let mut ker = Complex64::new(1.0, 0.0);
    for (j, (g, h)) in pairs.pairs().iter().enumerate() {
        bar += x[2 * j];
        sym *= symbol_at(g, bar)?;
        bar += x[2 * j + 1];
        sym *= symbol_at(h, bar)?;
    }
    for &xj in &x[1..] {
        ker *= dirichlet_eval(n, xj);
    }
    ker *= dirichlet_eval(n, bar - x[0]).conj();
    Some(sym * ker.re)
}

fn validate(pairs: &SymbolPairSet, n: usize) -> Result<()> {
    if !(1..=4).contains(&n) {
        return Err(LabError::UnsupportedScale(format!(
            "integral representation is checked for n ≤ 4, got n = {n}"
        )));
    }
    if !(1..=2).contains(&pairs.p()) {
        return Err(LabError::UnsupportedScale(format!(
            "integral representation is checked for p ∈ {{1, 2}}, got p = {}",
            pairs.p()
        )));
    }
    if let Some(s) = pairs.symbols().find(|s| s.alpha() >= 0.5) {
        return Err(LabError::InvalidArgument(format!(
            "square-integrable symbols required (alpha < 0.5), got alpha = {}",
            s.alpha()
        )));
    }
    Ok(())
}

pub fn representation_check(
    pairs: &SymbolPairSet,
    n: usize,
    sampler: Sampler,
    samples: usize,
    seed: u64,
) -> Result<RepresentationCheck> {
    representation_check_with(
        pairs,
        n,
        sampler,
        samples,
        seed,
        &QuadConfig::default(),
        &mut CoeffCache::new(),
    )
}

/// For [`Sampler::QuasiMc`], `samples` is the total point count across 16
/// digitally shifted replicates. For [`Sampler::TensorGrid`] it is the
/// number of nodes per axis (a multiple of 32, at least 64).
pub fn representation_check_with(
    pairs: &SymbolPairSet,
    n: usize,
    sampler: Sampler,
    samples: usize,
    seed: u64,
    quad: &QuadConfig,
    cache: &mut CoeffCache,
) -> Result<RepresentationCheck> {
    validate(pairs, n)?;
    let exact = ProductChain::from_cache(pairs, n, quad, cache)?
        .trace_exact()
        .value;
    let dims = 2 * pairs.p();
    let volume = two_pi_pow(dims);

    let (y_est, x_est, evaluations) = match sampler {
        Sampler::QuasiMc => {
            if samples < MIN_QMC_SAMPLES {
                return Err(LabError::InvalidArgument(format!(
                    "QuasiMC needs at least {MIN_QMC_SAMPLES} samples, got {samples}"
                )));
            }
            let per = samples / QMC_REPLICATES;
            let coords = |u: &[f64]| -> Option<[f64; 2]> {
                let mut t = [0.0; 4];
                for (ti, ui) in t.iter_mut().zip(u) {
                    *ti = PI * (2.0 * ui - 1.0);
                }
                let t = &t[..u.len()];
                // a point dropped in one form is dropped in both
                Some([volume * y_form(pairs, n, t)?, volume * x_form(pairs, n, t)?])
            };
            let [y, x] = randomized_qmc(dims, per, QMC_REPLICATES, seed, coords)?;
            (
                (y.value, y.stderr),
                (x.value, x.stderr),
                per * QMC_REPLICATES,
            )
        }
        Sampler::TensorGrid => {
            if samples < MIN_GRID_NODES || !samples.is_multiple_of(2 * GRID_PANEL_NODES) {
                return Err(LabError::InvalidArgument(format!(
                    "TensorGrid needs a multiple of 32 nodes per axis, at least 64; got {samples}"
                )));
            }
            let y_axes: Vec<Axis> = pairs
                .symbols()
                .map(|s| Axis::graded(samples, s.alpha()))
                .collect();
            let top = pairs.symbols().map(|s| s.alpha()).fold(0.0, f64::max);
            let mut x_axes = vec![Axis::graded(samples, top)];
            x_axes.extend((1..dims).map(|_| Axis::graded(samples, 0.0)));
            let y = tensor_sum(&y_axes, |t| y_form(pairs, n, t));
            let x = tensor_sum(&x_axes, |t| x_form(pairs, n, t));
            ((y, 0.0), (x, 0.0), samples.pow(dims as u32))
        }
    };

    let within = |(est, se): (f64, f64)| match sampler {
        Sampler::QuasiMc => (est - exact).abs() <= 3.0 * se + 1e-12 * exact.abs(),
        Sampler::TensorGrid => (est - exact).abs() <= GRID_TOLERANCE * exact.abs(),
    };
    let forms_agree = match sampler {
        Sampler::QuasiMc => {
            (y_est.0 - x_est.0).abs() <= 3.0 * y_est.1.hypot(x_est.1) + 1e-12 * exact.abs()
        }
        Sampler::TensorGrid => (y_est.0 - x_est.0).abs() <= GRID_TOLERANCE * exact.abs(),
    };
    Ok(RepresentationCheck {
        n,
        p: pairs.p(),
        exact_trace: exact,
        integral_estimate: y_est.0,
        estimate_stderr: y_est.1,
        x_form_estimate: x_est.0,
        x_form_stderr: x_est.1,
        sampler,
        samples: evaluations,
        seed,
        pass: within(y_est) && within(x_est),
        forms_agree,
    })
}

/// Nodes and weights of one axis on `Π`: each half is mapped by
/// `t = π u^m` with `m = 1/(1 - a)` for a singularity `|t|^{-a}` at 0, then
/// covered by 16-point Gauss–Legendre panels.
struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    fn graded(count: usize, alpha: f64) -> Axis {
        let m = 1.0 / (1.0 - alpha.max(0.0));
        let gl = GaussLegendre::new(GRID_PANEL_NODES);
        let panels = count / (2 * GRID_PANEL_NODES);
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for k in 0..panels {
            let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            for (u, w) in gl.mapped(a, b) {
                let t = PI * u.powf(m);
                let jac = PI * m * u.powf(m - 1.0) * w;
                nodes.extend([t, -t]);
                weights.extend([jac, jac]);
            }
        }
        Axis { nodes, weights }
    }
}

fn tensor_sum<F>(axes: &[Axis], f: F) -> f64
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let dims = axes.len();
    let first = &axes[0];
    let partial: Vec<f64> = (0..first.nodes.len())
        .into_par_iter()
        .map(|i0| {
            let mut idx = vec![0usize; dims];
            idx[0] = i0;
            let mut t = vec![0.0; dims];
            let mut acc = NeumaierSum::default();
            loop {
                let mut w = 1.0;
                for (d, axis) in axes.iter().enumerate() {
                    t[d] = axis.nodes[idx[d]];
                    w *= axis.weights[idx[d]];
                }
                if let Some(v) = f(&t) {
                    acc.add(w * v);
                }
                // odometer over axes 1..dims
                let mut d = dims - 1;
                loop {
                    if d == 0 {
                        return acc.total();
                    }
                    idx[d] += 1;
                    if idx[d] < axes[d].nodes.len() {
                        break;
                    }
                    idx[d] = 0;
                    d -= 1;
                }
            }
        })
        .collect();
    let mut total = NeumaierSum::default();
    for v in partial {
        total.add(v);
    }
    total.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::SymbolSpec;

    fn constants(p: usize) -> SymbolPairSet {
        let c = SymbolSpec::constant();
        SymbolPairSet::repeated(c.clone(), c, p).unwrap()
    }

    #[test]
    fn constant_grid_matches_parseval() {
        let r = representation_check(&constants(1), 2, Sampler::TensorGrid, 64, 0).unwrap();
        let want = 2.0 * (2.0 * PI).powi(2);
        assert!((r.exact_trace - want).abs() < 1e-12 * want);
        assert!((r.integral_estimate - want).abs() < 1e-6 * want, "{r:?}");
        assert!((r.x_form_estimate - want).abs() < 1e-6 * want, "{r:?}");
        assert!(r.pass && r.forms_agree);
    }

    #[test]
    fn single_row_reduces_to_zero_lag_product() {
        let g = SymbolSpec::pure_power(0.2).unwrap();
        let h = SymbolSpec::farima(0.1).unwrap();
        let pairs = SymbolPairSet::new(vec![(g, h)]).unwrap();
        let r = representation_check(&pairs, 1, Sampler::TensorGrid, 128, 0).unwrap();
        assert!(
            (r.integral_estimate - r.exact_trace).abs() < 1e-6 * r.exact_trace,
            "{r:?}"
        );
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn quasi_mc_small_case() {
        let g = SymbolSpec::pure_power(0.2).unwrap();
        let pairs = SymbolPairSet::repeated(g.clone(), g, 1).unwrap();
        let r = representation_check(&pairs, 3, Sampler::QuasiMc, 1 << 16, 7).unwrap();
        assert!(r.pass && r.forms_agree, "{r:?}");
        assert!(r.estimate_stderr > 0.0 && r.x_form_stderr > 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        let g = SymbolSpec::pure_power(0.2).unwrap();
        let pairs = SymbolPairSet::repeated(g.clone(), g, 1).unwrap();
        let err = |r: Result<RepresentationCheck>| r.unwrap_err();
        assert!(matches!(
            err(representation_check(&pairs, 5, Sampler::QuasiMc, 1000, 0)),
            LabError::UnsupportedScale(_)
        ));
        assert!(matches!(
            err(representation_check(
                &constants(3),
                2,
                Sampler::QuasiMc,
                1000,
                0
            )),
            LabError::UnsupportedScale(_)
        ));
        assert!(representation_check(&pairs, 2, Sampler::QuasiMc, 999, 0).is_err());
        assert!(representation_check(&pairs, 2, Sampler::TensorGrid, 48, 0).is_err());
        let s = SymbolSpec::pure_power(0.6).unwrap();
        let wide = SymbolPairSet::new(vec![(s, SymbolSpec::pure_power(-0.3).unwrap())]).unwrap();
        assert!(matches!(
            err(representation_check(&wide, 2, Sampler::QuasiMc, 1000, 0)),
            LabError::InvalidArgument(_)
        ));
    }
}
