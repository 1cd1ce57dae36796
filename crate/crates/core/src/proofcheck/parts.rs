//! Monte Carlo split of `I_n^π = ∫∫ k^{(π)}(x_1; x_2) |D_n(x_2)|² dx` over
//! `W` and `W^c` for a single pair.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::dirichlet::dirichlet_eval;
use super::domain::{in_w_raw, HYPERPLANE_CUTOFF, MIN_ACCEPTANCE};
use super::lemma3::{kernel_product, validate_pi};
use super::qmc::Estimate;
use crate::error::{LabError, Result};
use crate::fourier::CoeffCache;
use crate::limits::{exponents, limit_integral};
use crate::quadrature::QuadConfig;
use crate::rates::{fit_loglog_slope, LogLogFit};
use crate::symbols::SymbolPairSet;
use crate::toeplitz::ProductChain;

/// Equal-width strata of the first coordinate.
pub const STRATA: usize = 64;
pub const MAX_N: usize = 512;
/// Relative standard error above which an estimate is refused.
pub const FLOOR_RATIO: f64 = 0.3;
pub const GROWTH_MARGIN: f64 = 0.2;

/// Draws from the density `|D_n(x)|² / (2πn)` on `Π` by rejection from the
/// envelope `min(n², π²/x²)`.
pub struct FejerSampler {
    n: usize,
    core_prob: f64,
    draws: u64,
    accepted: u64,
}

impl FejerSampler {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        FejerSampler {
            n,
            // envelope mass: 2πn on the flat core, 2π(n-1) on the tails
            core_prob: nf / (2.0 * nf - 1.0),
            draws: 0,
            accepted: 0,
        }
    }

    pub fn draw<R: Rng>(&mut self, rng: &mut R) -> Result<f64> {
        let nf = self.n as f64;
        loop {
            self.draws += 1;
            let x = if self.n == 1 || rng.random::<f64>() < self.core_prob {
                PI / nf * (2.0 * rng.random::<f64>() - 1.0)
            } else {
                let t = PI / (nf - rng.random::<f64>() * (nf - 1.0));
                if rng.random::<bool>() {
                    t
                } else {
                    -t
                }
            };
            let envelope = if x.abs() * nf <= PI {
                nf * nf
            } else {
                (PI / x).powi(2)
            };
            if rng.random::<f64>() * envelope <= dirichlet_eval(self.n, x).norm_sqr() {
                self.accepted += 1;
                return Ok(x);
            }
            if self.draws >= 10_000 && self.acceptance() < MIN_ACCEPTANCE {
                return Err(LabError::RejectionStarved {
                    acceptance: self.acceptance(),
                });
            }
        }
    }

    pub fn acceptance(&self) -> f64 {
        if self.draws == 0 {
            1.0
        } else {
            self.accepted as f64 / self.draws as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartsEstimate {
    pub n: usize,
    pub pi: Vec<u8>,
    pub c: f64,
    pub samples: usize,
    pub seed: u64,
    /// Part over `W`.
    pub i_n1: Estimate,
    /// Part over `W^c`.
    pub i_n2: Estimate,
    /// `I_{n,1} + I_{n,2}` from the same draws.
    pub total: Estimate,
    /// Unsplit estimate from an independent stream.
    pub full_domain: Estimate,
    /// `|total - full_domain| ≤ 3 × combined stderr`.
    pub consistent: bool,
}

struct StratumSums {
    sum: [f64; 3],
    sq: [f64; 3],
}

/// Stratified estimate of `[∫_W, ∫_{W^c}, ∫_Π²]` of `k |D_n(x_2)|²`.
fn stratified(
    pairs: &SymbolPairSet,
    n: usize,
    pi: &[u8],
    c: f64,
    per_stratum: usize,
    seed: u64,
) -> Result<[Estimate; 3]> {
    let width = 2.0 * PI / STRATA as f64;
    let scale = 2.0 * PI * 2.0 * PI * n as f64;
    let strata: Vec<StratumSums> = (0..STRATA)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut fejer = FejerSampler::new(n);
            let mut sums = [0.0; 2];
            let mut out = StratumSums {
                sum: [0.0; 3],
                sq: [0.0; 3],
            };
            for _ in 0..per_stratum {
                let x1 = -PI + (s as f64 + rng.random::<f64>()) * width;
                let x2 = fejer.draw(&mut rng)?;
                // antithetic pair: the weight |D_n(x_2)|² is even in x_2
                let mut parts = [0.0; 3];
                for x in [[x1, x2], [x1, -x2]] {
                    let value = if x1.abs() < HYPERPLANE_CUTOFF {
                        0.0
                    } else {
                        kernel_product(pairs, pi, &x).map_or(0.0, |k| 0.5 * scale * k)
                    };
                    let slot = if in_w_raw(&x, &mut sums, c) { 0 } else { 1 };
                    parts[slot] += value;
                    parts[2] += value;
                }
                for (i, v) in parts.into_iter().enumerate() {
                    out.sum[i] += v;
                    out.sq[i] += v * v;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let m = per_stratum as f64;
    let k = STRATA as f64;
    Ok(std::array::from_fn(|i| {
        let mut value = 0.0;
        let mut var = 0.0;
        for st in &strata {
            let mean = st.sum[i] / m;
            let s2 = ((st.sq[i] - m * mean * mean) / (m - 1.0)).max(0.0);
            value += mean / k;
            var += s2 / (m * k * k);
        }
        Estimate {
            value,
            stderr: var.sqrt(),
        }
    }))
}

fn validate(pairs: &SymbolPairSet, n: usize, pi: &[u8], samples: usize) -> Result<()> {
    if pairs.p() != 1 {
        return Err(LabError::UnsupportedScale(format!(
            "domain split is estimated for p = 1 only, got p = {}",
            pairs.p()
        )));
    }
    if n == 0 || n > MAX_N {
        return Err(LabError::UnsupportedScale(format!(
            "domain split is estimated for 1 ≤ n ≤ {MAX_N}, got n = {n}"
        )));
    }
    validate_pi(pi, 1)?;
    if samples < 2 * STRATA {
        return Err(LabError::InvalidArgument(format!(
            "at least {} samples required, got {samples}",
            2 * STRATA
        )));
    }
    Ok(())
}

/// Stratified Monte Carlo estimates of `I_{n,1}^π` (over `W`) and
/// `I_{n,2}^π` (over `W^c`): the first coordinate is stratified into 64
/// equal cells, the second is drawn from the normalized `|D_n|²` and used
/// together with its mirror image.
///
/// Fails with `StochasticFloor` when the estimate of `I_{n,2}` has a
/// standard error above 30% of its magnitude.
pub fn estimate_in_parts(
    pairs: &SymbolPairSet,
    n: usize,
    pi: &[u8],
    samples: usize,
    seed: u64,
    c: f64,
) -> Result<PartsEstimate> {
    validate(pairs, n, pi, samples)?;
    if !(c.is_finite() && c > 1.0) {
        return Err(LabError::InvalidArgument(format!(
            "c > 1 required, got {c}"
        )));
    }
    let per = samples / STRATA;
    let [i_n1, i_n2, total] = stratified(pairs, n, pi, c, per, seed)?;
    let [_, _, full_domain] = stratified(pairs, n, pi, f64::INFINITY, per, !seed)?;
    if i_n2.stderr > FLOOR_RATIO * i_n2.value.abs() {
        return Err(LabError::StochasticFloor(format!(
            "I_n2 = {} ± {} at n = {n}: relative error above {FLOOR_RATIO}",
            i_n2.value, i_n2.stderr
        )));
    }
    let consistent = (total.value - full_domain.value).abs()
        <= 3.0 * total.stderr.hypot(full_domain.stderr) + 1e-12 * full_domain.value.abs();
    Ok(PartsEstimate {
        n,
        pi: pi.to_vec(),
        c,
        samples: per * STRATA,
        seed,
        i_n1,
        i_n2,
        total,
        full_domain,
        consistent,
    })
}

/// `I_n^π` for one pair without sampling: `n ∫ 2π g h` for `π = (0)` and the
/// remainder `Tr[T_n(g) T_n(h)] - n ∫ 2π g h` for `π = (1)`.
pub fn exact_in(
    pairs: &SymbolPairSet,
    n: usize,
    pi: &[u8],
    quad: &QuadConfig,
    cache: &mut CoeffCache,
) -> Result<f64> {
    validate_pi(pi, pairs.p())?;
    if pairs.p() != 1 {
        return Err(LabError::UnsupportedScale("exact parts need p = 1".into()));
    }
    let main = n as f64 * limit_integral(pairs, quad)?;
    if pi[0] == 0 {
        Ok(main)
    } else {
        let trace = ProductChain::from_cache(pairs, n, quad, cache)?
            .trace_exact()
            .value;
        Ok(trace - main)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub points: Vec<PartsEstimate>,
    pub fit_n1: Option<LogLogFit>,
    pub fit_n2: Option<LogLogFit>,
    /// `ψ̄ + ε + margin`
    pub bound_n1: f64,
    /// `ψ_+ + margin`
    pub bound_n2: f64,
    pub pass_n1: bool,
    pub pass_n2: bool,
    pub all_consistent: bool,
}

/// Runs [`estimate_in_parts`] over `n_list` and fits the growth exponents
/// of `|I_{n,1}|` and `|I_{n,2}|` in `n`.
#[allow(clippy::too_many_arguments)]
pub fn parts_growth_sweep(
    pairs: &SymbolPairSet,
    pi: &[u8],
    n_list: &[usize],
    samples: usize,
    seed: u64,
    c: f64,
    epsilon: f64,
    margin: f64,
) -> Result<GrowthReport> {
    let points = n_list
        .iter()
        .map(|&n| estimate_in_parts(pairs, n, pi, samples, seed, c))
        .collect::<Result<Vec<_>>>()?;
    let series = |f: fn(&PartsEstimate) -> f64| -> Vec<(f64, f64)> {
        points.iter().map(|p| (p.n as f64, f(p).abs())).collect()
    };
    let fit_n1 = fit_loglog_slope(&series(|p| p.i_n1.value)).ok();
    let fit_n2 = fit_loglog_slope(&series(|p| p.i_n2.value)).ok();
    let e = exponents(pairs);
    let bound_n1 = e.psi_bar + epsilon + margin;
    let bound_n2 = e.psi_plus + margin;
    // an identically zero part has no growth to bound
    let ok = |fit: &Option<LogLogFit>, bound: f64| fit.is_none_or(|f| f.slope <= bound);
    Ok(GrowthReport {
        pass_n1: ok(&fit_n1, bound_n1),
        pass_n2: ok(&fit_n2, bound_n2),
        all_consistent: points.iter().all(|p| p.consistent),
        points,
        fit_n1,
        fit_n2,
        bound_n1,
        bound_n2,
    })
}
