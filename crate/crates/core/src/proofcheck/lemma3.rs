//! Pointwise bound on `∏ k_j^{(π_j)}(x̄_{2j-1})` over `W^c`.

use serde::Serialize;

use super::domain::ComplementSampler;
use super::symbol_at;
use crate::error::{LabError, Result};
use crate::limits::exponents;
use crate::symbols::SymbolPairSet;

/// Slack allowed over the calibrated constant.
pub const CALIBRATION_SLACK: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma3Report {
    pub pi: Vec<u8>,
    pub samples: usize,
    pub c: f64,
    pub seed: u64,
    pub calibrated_c: f64,
    pub max_test_ratio: f64,
    pub violation_rate: f64,
    pub acceptance: f64,
}

pub(crate) fn validate_pi(pi: &[u8], p: usize) -> Result<()> {
    if pi.len() != p || pi.iter().any(|&v| v > 1) {
        return Err(LabError::InvalidArgument(format!(
            "pi must be a 0/1 vector of length {p}, got {pi:?}"
        )));
    }
    Ok(())
}

/// `∏_j k_j^{(π_j)}(x̄_{2j-1})` where `k^{(0)} = g h` and
/// `k^{(1)}(a) = g(a) (h(a + x_{2j}) - h(a))`.
pub(crate) fn kernel_product(pairs: &SymbolPairSet, pi: &[u8], x: &[f64]) -> Option<f64> {
    let mut bar = 0.0;
    let mut prod = 1.0;
    for (j, (g, h)) in pairs.pairs().iter().enumerate() {
        bar += x[2 * j];
        let odd = bar;
        bar += x[2 * j + 1];
        let ga = symbol_at(g, odd)?;
        let ha = symbol_at(h, odd)?;
        prod *= if pi[j] == 0 {
            ga * ha
        } else {
            ga * (symbol_at(h, bar)? - ha)
        };
    }
    Some(prod)
}

/// Ratio of the kernel product to `|x_1|^{-ψ-|π|} ∏ |x_{2j}|^{π_j}` at
/// `samples` points of `W^c`. The first half calibrates the constant; the
/// second half counts exceedances of `1.05 ×` that constant.
pub fn check_lemma3_bound(
    pairs: &SymbolPairSet,
    pi: &[u8],
    samples: usize,
    c: f64,
    seed: u64,
) -> Result<Lemma3Report> {
    let p = pairs.p();
    validate_pi(pi, p)?;
    if samples < 1000 {
        return Err(LabError::InvalidArgument(format!(
            "at least 1000 samples required, got {samples}"
        )));
    }
    let psi = exponents(pairs).psi;
    let order: i32 = pi.iter().map(|&v| v as i32).sum();
    let mut sampler = ComplementSampler::new(p, c, seed)?;
    let mut ratios = Vec::with_capacity(samples);
    while ratios.len() < samples {
        let x = sampler.next_point()?;
        let Some(lhs) = kernel_product(pairs, pi, x) else {
            continue;
        };
        let mut rhs = x[0].abs().powf(-psi - order as f64);
        for (j, &bit) in pi.iter().enumerate() {
            if bit == 1 {
                rhs *= x[2 * j + 1].abs();
            }
        }
        ratios.push(lhs.abs() / rhs);
    }
    let (calibrate, test) = ratios.split_at(samples / 2);
    let calibrated_c = calibrate.iter().copied().fold(0.0, f64::max);
    let max_test_ratio = test.iter().copied().fold(0.0, f64::max);
    let violations = test
        .iter()
        .filter(|&&r| !(r <= CALIBRATION_SLACK * calibrated_c))
        .count();
    Ok(Lemma3Report {
        pi: pi.to_vec(),
        samples,
        c,
        seed,
        calibrated_c,
        max_test_ratio,
        violation_rate: violations as f64 / test.len() as f64,
        acceptance: sampler.acceptance(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::SymbolSpec;

    #[test]
    fn constant_symbols() {
        let c = SymbolSpec::constant();
        let pairs = SymbolPairSet::repeated(c.clone(), c, 1).unwrap();
        let r = check_lemma3_bound(&pairs, &[0], 1000, 2.0, 1).unwrap();
        assert_eq!(r.violation_rate, 0.0);
        assert_eq!(r.calibrated_c, r.max_test_ratio);
        let r = check_lemma3_bound(&pairs, &[1], 1000, 2.0, 1).unwrap();
        assert_eq!(
            (r.calibrated_c, r.max_test_ratio, r.violation_rate),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn pure_powers_zero_order_ratio_is_one() {
        let g = SymbolSpec::pure_power(0.3).unwrap();
        let pairs = SymbolPairSet::repeated(g.clone(), g, 1).unwrap();
        let r = check_lemma3_bound(&pairs, &[0], 2000, 2.0, 4).unwrap();
        assert!((r.calibrated_c - 1.0).abs() < 1e-12);
        assert_eq!(r.violation_rate, 0.0);
    }

    #[test]
    fn first_order_bound_holds() {
        let g = SymbolSpec::pure_power(0.3).unwrap();
        let pairs = SymbolPairSet::repeated(g.clone(), g, 1).unwrap();
        let r = check_lemma3_bound(&pairs, &[1], 4000, 2.0, 9).unwrap();
        assert_eq!(r.violation_rate, 0.0, "{r:?}");
        assert!(r.calibrated_c > 0.0 && r.calibrated_c.is_finite());
    }

    #[test]
    fn argument_checks() {
        let c = SymbolSpec::constant();
        let pairs = SymbolPairSet::repeated(c.clone(), c, 1).unwrap();
        assert!(check_lemma3_bound(&pairs, &[0, 1], 1000, 2.0, 1).is_err());
        assert!(check_lemma3_bound(&pairs, &[2], 1000, 2.0, 1).is_err());
        assert!(check_lemma3_bound(&pairs, &[0], 999, 2.0, 1).is_err());
        assert!(check_lemma3_bound(&pairs, &[0], 1000, 1.0, 1).is_err());
    }
}
