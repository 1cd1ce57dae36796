//! Fourier coefficients `ĥ(τ) = ∫_{-π}^{π} e^{iτx} f(x) dx` of even symbols.
//!
//! For an even real symbol the coefficient is `2 ∫_0^π f(x) cos(τx) dx`,
//! real and even in `τ`. Lags are grouped into dyadic frequency buckets;
//! every lag in a bucket shares one graded mesh, so the batch routine
//! reuses symbol values while producing bit-identical results to a
//! single-lag call.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::quadrature::{GradedMesh, QuadConfig};
use crate::symbols::SymbolSpec;

/// Frequency bucket of a lag: 0 for τ = 0, else the next power of two.
fn bucket(tau: u64) -> u64 {
    if tau == 0 {
        0
    } else {
        tau.next_power_of_two()
    }
}

fn mesh_for(spec: &SymbolSpec, bucket: u64, quad: &QuadConfig) -> Result<GradedMesh> {
    let frequency = (bucket + spec.smooth_order() as u64) as f64;
    GradedMesh::new(spec.alpha().max(0.0), frequency, quad)
}

fn coefficient_on_mesh(mesh: &GradedMesh, values: &[f64], tau: u64) -> f64 {
    let t = tau as f64;
    2.0 * mesh.weighted_sum(|i| values[i] * (t * mesh.nodes[i]).cos())
}

/// Checks the sliver of the mesh for the non-oscillatory integral, which
/// dominates the tail of every lag.
fn check_tail(spec: &SymbolSpec, mesh: &GradedMesh, quad: &QuadConfig) -> Result<()> {
    mesh.integrate(|x| spec.eval_abs(x), quad).map(|_| ())
}

pub fn fourier_coefficient(spec: &SymbolSpec, tau: i64, quad: &QuadConfig) -> Result<f64> {
    let tau = tau.unsigned_abs();
    let mesh = mesh_for(spec, bucket(tau), quad)?;
    check_tail(spec, &mesh, quad)?;
    let values: Vec<f64> = mesh.nodes.iter().map(|&x| spec.eval_abs(x)).collect();
    Ok(coefficient_on_mesh(&mesh, &values, tau))
}

fn coefficients_for_lags(
    spec: &SymbolSpec,
    lags: std::ops::Range<u64>,
    quad: &QuadConfig,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity((lags.end - lags.start) as usize);
    let mut start = lags.start;
    while start < lags.end {
        let b = bucket(start);
        let end = if b == 0 { 1 } else { (b + 1).min(lags.end) };
        let mesh = mesh_for(spec, b, quad)?;
        check_tail(spec, &mesh, quad)?;
        let values: Vec<f64> = mesh.nodes.iter().map(|&x| spec.eval_abs(x)).collect();
        let chunk: Vec<f64> = (start..end)
            .into_par_iter()
            .map(|tau| coefficient_on_mesh(&mesh, &values, tau))
            .collect();
        out.extend(chunk);
        start = end;
    }
    Ok(out)
}

/// Coefficients for lags `0..=max_lag` of one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    spec: SymbolSpec,
    coeffs: Vec<f64>,
    quad: QuadConfig,
}

impl CoeffTable {
    pub fn spec(&self) -> &SymbolSpec {
        &self.spec
    }

    pub fn quad(&self) -> &QuadConfig {
        &self.quad
    }

    /// Coefficients for lags `0..=max_lag()`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn max_lag(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `ĥ(lag)` for either sign of `lag`.
    pub fn get(&self, lag: i64) -> Option<f64> {
        self.coeffs.get(lag.unsigned_abs() as usize).copied()
    }

    /// CSV with columns `lag,value`, values at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lag,value\n");
        for (lag, v) in self.coeffs.iter().enumerate() {
            let _ = writeln!(s, "{lag},{v:.16e}");
        }
        s
    }

    /// Builds a table from externally supplied values (tests, fixtures).
    pub fn from_values(spec: SymbolSpec, coeffs: Vec<f64>, quad: QuadConfig) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(LabError::InvalidArgument("empty coefficient table".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LabError::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(CoeffTable { spec, coeffs, quad })
    }
}

pub fn fourier_coefficients_batch(
    spec: &SymbolSpec,
    max_lag: usize,
    quad: &QuadConfig,
) -> Result<CoeffTable> {
    let coeffs = coefficients_for_lags(spec, 0..max_lag as u64 + 1, quad)?;
    CoeffTable::from_values(spec.clone(), coeffs, *quad)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    family: crate::symbols::Family,
    alpha: u64,
    smooth: Vec<u64>,
    scale: u64,
    quad: [u64; 5],
}

impl CacheKey {
    fn new(spec: &SymbolSpec, quad: &QuadConfig) -> Self {
        CacheKey {
            family: spec.family(),
            alpha: spec.alpha().to_bits(),
            smooth: spec.smooth_coeffs().iter().map(|c| c.to_bits()).collect(),
            scale: spec.scale().to_bits(),
            quad: quad.key(),
        }
    }
}

/// Coefficient tables keyed by structural equality of `(spec, quad)`.
/// Tables grow on demand; existing lags are never recomputed.
#[derive(Debug, Default, Clone)]
pub struct CoeffCache {
    tables: HashMap<CacheKey, CoeffTable>,
}

impl CoeffCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn table(
        &mut self,
        spec: &SymbolSpec,
        max_lag: usize,
        quad: &QuadConfig,
    ) -> Result<&CoeffTable> {
        let key = CacheKey::new(spec, quad);
        let have = self.tables.get(&key).map_or(0, |t| t.coeffs.len());
        if have <= max_lag {
            let extra = coefficients_for_lags(spec, have as u64..max_lag as u64 + 1, quad)?;
            let entry = self
                .tables
                .entry(key.clone())
                .or_insert_with(|| CoeffTable {
                    spec: spec.clone(),
                    coeffs: Vec::new(),
                    quad: *quad,
                });
            entry.coeffs.extend(extra);
        }
        Ok(&self.tables[&key])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_coefficients() {
        let q = QuadConfig::default();
        let c = SymbolSpec::constant();
        assert!((fourier_coefficient(&c, 0, &q).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!(fourier_coefficient(&c, 1, &q).unwrap().abs() < 1e-14);
        let t = fourier_coefficients_batch(&c, 2, &q).unwrap();
        assert_eq!(t.max_lag(), 2);
        assert!((t.coeffs()[0] - 2.0 * PI).abs() < 1e-13);
        assert!(t.coeffs()[1].abs() < 1e-14 && t.coeffs()[2].abs() < 1e-14);
        let p0 = fourier_coefficients_batch(&SymbolSpec::pure_power(0.0).unwrap(), 2, &q).unwrap();
        assert_eq!(p0.coeffs(), t.coeffs());
    }

    #[test]
    fn pure_power_zero_lag() {
        let q = QuadConfig::default();
        let v = fourier_coefficient(&SymbolSpec::pure_power(0.5).unwrap(), 0, &q).unwrap();
        assert!((v - 4.0 * PI.sqrt()).abs() < 1e-13 * v);
    }

    #[test]
    fn batch_identical_to_single_calls() {
        let q = QuadConfig::default();
        let spec = SymbolSpec::power_times_smooth(0.3, vec![0.2]).unwrap();
        let t = fourier_coefficients_batch(&spec, 40, &q).unwrap();
        for lag in 0..=40i64 {
            assert_eq!(
                t.get(lag).unwrap(),
                fourier_coefficient(&spec, lag, &q).unwrap()
            );
            assert_eq!(t.get(-lag), t.get(lag));
        }
    }

    #[test]
    fn cache_extends_without_recomputing() {
        let q = QuadConfig::default();
        let spec = SymbolSpec::farima(0.1).unwrap();
        let mut cache = CoeffCache::new();
        let first = cache.table(&spec, 10, &q).unwrap().coeffs().to_vec();
        let grown = cache.table(&spec, 37, &q).unwrap().coeffs().to_vec();
        assert_eq!(grown.len(), 38);
        assert_eq!(&grown[..11], &first[..]);
        let direct = fourier_coefficients_batch(&spec, 37, &q).unwrap();
        assert_eq!(direct.coeffs(), &grown[..]);
        assert_eq!(cache.len(), 1);
        cache
            .table(&spec.clone().with_scale(2.0).unwrap(), 3, &q)
            .unwrap();
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn csv_format() {
        let q = QuadConfig::default();
        let t = fourier_coefficients_batch(&SymbolSpec::constant(), 1, &q).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("lag,value"));
        let row = lines.next().unwrap();
        let (lag, value) = row.split_once(',').unwrap();
        assert_eq!(lag, "0");
        let mantissa = value.split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        assert_eq!(value.parse::<f64>().unwrap(), t.coeffs()[0]);
    }
}
