//! Exponent bookkeeping and the limit `I(θ) = (2π)^(2p-1) ∫ ∏ g_j h_j dx`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::quadrature::{singular_integral_oscillatory, QuadConfig};
use crate::symbols::SymbolPairSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSummary {
    /// `Σ (α_j + β_j)`
    pub psi: f64,
    /// `Σ (α_j + β_j)_+`
    pub psi_bar: f64,
    /// `(psi)_+`
    pub psi_plus: f64,
    pub per_pair: Vec<f64>,
}

pub fn exponents(pairs: &SymbolPairSet) -> ExponentSummary {
    let per_pair: Vec<f64> = pairs
        .pairs()
        .iter()
        .map(|(g, h)| g.alpha() + h.alpha())
        .collect();
    let psi: f64 = per_pair.iter().sum();
    let psi_bar = per_pair.iter().map(|s| s.max(0.0)).sum();
    ExponentSummary {
        psi,
        psi_bar,
        psi_plus: psi.max(0.0),
        per_pair,
    }
}

/// `(2π)^k`, through logarithms once `k` gets large.
pub(crate) fn two_pi_pow(k: usize) -> f64 {
    if k >= 7 {
        (k as f64 * (2.0 * PI).ln()).exp()
    } else {
        (2.0 * PI).powi(k as i32)
    }
}

pub fn limit_integral(pairs: &SymbolPairSet, quad: &QuadConfig) -> Result<f64> {
    let psi = exponents(pairs).psi;
    if psi >= 1.0 {
        return Err(LabError::NonIntegrable { exponent: psi });
    }
    let frequency: usize = pairs.symbols().map(|s| s.smooth_order()).sum();
    let integrand = |x: f64| {
        2.0 * pairs
            .pairs()
            .iter()
            .map(|(g, h)| g.eval_abs(x) * h.eval_abs(x))
            .product::<f64>()
    };
    let integral = singular_integral_oscillatory(integrand, psi.max(0.0), frequency as f64, quad)?;
    Ok(two_pi_pow(2 * pairs.p() - 1) * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::SymbolSpec;

    fn pp(a: f64) -> SymbolSpec {
        SymbolSpec::pure_power(a).unwrap()
    }

    #[test]
    fn exponent_examples() {
        let e = exponents(&SymbolPairSet::new(vec![(pp(0.3), pp(0.4))]).unwrap());
        assert!((e.psi - 0.7).abs() < 1e-15 && (e.psi_bar - 0.7).abs() < 1e-15);
        assert!((e.psi_plus - 0.7).abs() < 1e-15);

        let e = exponents(&SymbolPairSet::new(vec![(pp(0.3), pp(-0.5))]).unwrap());
        assert!((e.psi + 0.2).abs() < 1e-15);
        assert_eq!(e.psi_bar, 0.0);
        assert_eq!(e.psi_plus, 0.0);

        let e =
            exponents(&SymbolPairSet::new(vec![(pp(0.3), pp(0.4)), (pp(0.1), pp(-0.9))]).unwrap());
        assert!((e.psi + 0.1).abs() < 1e-15);
        assert!((e.psi_bar - 0.7).abs() < 1e-15);
        assert_eq!(e.psi_plus, 0.0);
        assert!(e.psi_plus <= e.psi_bar);
    }

    #[test]
    fn limit_examples() {
        let q = QuadConfig::default();
        let c = SymbolSpec::constant();
        let one = SymbolPairSet::repeated(c.clone(), c.clone(), 1).unwrap();
        assert!((limit_integral(&one, &q).unwrap() - (2.0 * PI).powi(2)).abs() < 1e-12);
        let two = SymbolPairSet::repeated(c.clone(), c, 2).unwrap();
        let v = limit_integral(&two, &q).unwrap();
        assert!((v - (2.0 * PI).powi(4)).abs() < 1e-12 * v);
        let pw = SymbolPairSet::new(vec![(pp(0.3), pp(0.2))]).unwrap();
        let v = limit_integral(&pw, &q).unwrap();
        let want = 2.0 * PI * 4.0 * PI.sqrt();
        assert!((v - want).abs() < 1e-12 * want);
    }

    #[test]
    fn pair_order_and_scaling() {
        let q = QuadConfig::default();
        let f = SymbolSpec::farima(0.1).unwrap();
        let s = SymbolSpec::power_times_smooth(0.1, vec![0.3]).unwrap();
        let a = SymbolPairSet::new(vec![(f.clone(), pp(0.2)), (s.clone(), pp(-0.3))]).unwrap();
        let b = a.rotated(1);
        let (va, vb) = (
            limit_integral(&a, &q).unwrap(),
            limit_integral(&b, &q).unwrap(),
        );
        assert!((va - vb).abs() < 1e-12 * va.abs());
        for k in [2.0, 0.5] {
            let scaled = SymbolPairSet::new(vec![
                (f.clone().with_scale(k).unwrap(), pp(0.2)),
                (s.clone(), pp(-0.3)),
            ])
            .unwrap();
            let v = limit_integral(&scaled, &q).unwrap();
            assert!((v - k * va).abs() < 1e-12 * v.abs());
        }
    }

    #[test]
    fn log_space_power_matches_direct() {
        for k in 0..16 {
            let direct = (2.0 * PI).powi(k as i32);
            assert!((two_pi_pow(k) - direct).abs() < 1e-13 * direct);
        }
    }
}
