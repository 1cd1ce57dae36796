//! Sobol points with random digital shifts, and the replicate-based
//! estimator built on them.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::quadrature::NeumaierSum;

/// `(degree, coefficients, initial m_k)` for dimensions 2..=6.
const PRIMITIVES: [(u32, u32, &[u64]); 5] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
];

pub const MAX_DIMS: usize = PRIMITIVES.len() + 1;

const BITS: usize = 64;

/// Gray-code Sobol generator over 64-bit integers.
#[derive(Debug, Clone)]
pub struct Sobol {
    directions: Vec<[u64; BITS]>,
    state: Vec<u64>,
    index: u64,
}

impl Sobol {
    pub fn new(dims: usize) -> Result<Self> {
        if dims == 0 || dims > MAX_DIMS {
            return Err(LabError::UnsupportedScale(format!(
                "Sobol points support 1..={MAX_DIMS} dimensions, got {dims}"
            )));
        }
        let mut directions = Vec::with_capacity(dims);
        let mut first = [0u64; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1u64 << (BITS - 1 - k);
        }
        directions.push(first);
        for &(s, a, m) in PRIMITIVES.iter().take(dims - 1) {
            let s = s as usize;
            let mut v = [0u64; BITS];
            for k in 0..BITS {
                v[k] = if k < s {
                    m[k] << (BITS - 1 - k)
                } else {
                    let mut x = v[k - s] ^ (v[k - s] >> s);
                    for i in 1..s {
                        if (a >> (s - 1 - i)) & 1 == 1 {
                            x ^= v[k - i];
                        }
                    }
                    x
                };
            }
            directions.push(v);
        }
        Ok(Sobol {
            state: vec![0; dims],
            directions,
            index: 0,
        })
    }

    pub fn dims(&self) -> usize {
        self.directions.len()
    }

    /// Raw integer coordinates of the next point; the first point is zero.
    pub fn next_bits(&mut self) -> &[u64] {
        if self.index > 0 {
            let bit = (self.index - 1).trailing_ones() as usize;
            for (s, v) in self.state.iter_mut().zip(&self.directions) {
                *s ^= v[bit];
            }
        }
        self.index += 1;
        &self.state
    }
}

/// Maps 64 random bits to the open interval (0, 1).
#[inline]
pub fn bits_to_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Randomized QMC: `replicates` independent digital shifts of the first
/// `per_replicate` Sobol points. The integrand writes `K` values per point
/// (or returns `None` to drop it); each output gets the mean over
/// replicates and the standard error of that mean.
pub fn randomized_qmc<const K: usize, F>(
    dims: usize,
    per_replicate: usize,
    replicates: usize,
    seed: u64,
    integrand: F,
) -> Result<[Estimate; K]>
where
    F: Fn(&[f64]) -> Option<[f64; K]> + Sync,
{
    if replicates < 2 || per_replicate == 0 {
        return Err(LabError::InvalidArgument(
            "randomized QMC needs ≥ 2 replicates and ≥ 1 point each".into(),
        ));
    }
    Sobol::new(dims)?;
    let means: Vec<[f64; K]> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let shift: Vec<u64> = (0..dims).map(|_| rng.next_u64()).collect();
            let mut sobol = Sobol::new(dims).expect("validated");
            let mut u = vec![0.0; dims];
            let mut acc = [NeumaierSum::default(); K];
            for _ in 0..per_replicate {
                for ((ui, b), s) in u.iter_mut().zip(sobol.next_bits()).zip(&shift) {
                    *ui = bits_to_unit(b ^ s);
                }
                if let Some(vals) = integrand(&u) {
                    for (a, v) in acc.iter_mut().zip(vals) {
                        a.add(v);
                    }
                }
            }
            acc.map(|a| a.total() / per_replicate as f64)
        })
        .collect();
    let r = replicates as f64;
    Ok(std::array::from_fn(|k| {
        let mean = means.iter().map(|m| m[k]).sum::<f64>() / r;
        let var = means.iter().map(|m| (m[k] - mean).powi(2)).sum::<f64>() / (r - 1.0);
        Estimate {
            value: mean,
            stderr: (var / r).sqrt(),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_per_dyadic_interval() {
        for dims in 1..=MAX_DIMS {
            let mut s = Sobol::new(dims).unwrap();
            let m = 10;
            let pts: Vec<Vec<u64>> = (0..1 << m).map(|_| s.next_bits().to_vec()).collect();
            for d in 0..dims {
                let mut seen = vec![false; 1 << m];
                for p in &pts {
                    let cell = (p[d] >> (64 - m)) as usize;
                    assert!(!seen[cell], "dim {d} cell {cell}");
                    seen[cell] = true;
                }
            }
        }
    }

    #[test]
    fn first_two_dims_form_a_net() {
        // every 2^-a × 2^-b box with a + b = m holds exactly one point
        let m = 8;
        let mut s = Sobol::new(2).unwrap();
        let pts: Vec<(u64, u64)> = (0..1 << m)
            .map(|_| {
                let b = s.next_bits();
                (b[0], b[1])
            })
            .collect();
        for a in 0..=m {
            let b = m - a;
            let mut count = vec![0u32; 1 << m];
            for &(x, y) in &pts {
                let cx = if a == 0 { 0 } else { x >> (64 - a) };
                let cy = if b == 0 { 0 } else { y >> (64 - b) };
                count[((cx << b) | cy) as usize] += 1;
            }
            assert!(count.iter().all(|&c| c == 1), "a={a}");
        }
    }

    #[test]
    fn known_leading_points() {
        let mut s = Sobol::new(3).unwrap();
        let to_f = |b: &[u64]| {
            b.iter()
                .map(|&v| v as f64 / 2f64.powi(64))
                .collect::<Vec<_>>()
        };
        assert_eq!(to_f(s.next_bits()), vec![0.0, 0.0, 0.0]);
        assert_eq!(to_f(s.next_bits()), vec![0.5, 0.5, 0.5]);
        assert_eq!(to_f(s.next_bits()), vec![0.75, 0.25, 0.25]);
        assert_eq!(to_f(s.next_bits()), vec![0.25, 0.75, 0.75]);
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(Sobol::new(0).is_err());
        assert!(Sobol::new(MAX_DIMS + 1).is_err());
    }

    #[test]
    fn smooth_integral_and_error_bar() {
        // ∫_{[0,1]^4} ∏ 2u_i du = 1
        let [e] = randomized_qmc(4, 1 << 12, 16, 5, |u| {
            Some([u.iter().map(|v| 2.0 * v).product()])
        })
        .unwrap();
        assert!((e.value - 1.0).abs() < 3.0 * e.stderr + 1e-12);
        assert!(e.stderr < 1e-3 && e.stderr > 0.0);
        let again = randomized_qmc(4, 1 << 12, 16, 5, |u| {
            Some([u.iter().map(|v| 2.0 * v).product()])
        })
        .unwrap();
        assert_eq!(again[0], e);
    }

    #[test]
    fn unit_map_stays_open() {
        assert!(bits_to_unit(0) > 0.0);
        assert!(bits_to_unit(u64::MAX) < 1.0);
    }
}
