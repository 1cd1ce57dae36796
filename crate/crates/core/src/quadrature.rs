//! Graded-mesh Gauss–Legendre quadrature on `(0, π]` for integrands with
//! an integrable power singularity at the origin.
//!
//! Panels shrink geometrically toward 0 down to `abs_floor`. The remaining
//! sliver `[0, a]` is integrated after the substitution `x = a u^m`,
//! `m = 1 / (1 - s)`, which turns `x^(-s)` into a constant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadConfig {
    pub panels_per_decade: u32,
    pub nodes_per_panel: usize,
    pub grading_ratio: f64,
    pub abs_floor: f64,
    pub rel_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            panels_per_decade: 4,
            nodes_per_panel: 32,
            grading_ratio: 0.5,
            abs_floor: 1e-15,
            rel_tol: 1e-12,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidArgument(format!("quadrature config: {m}")));
        if self.panels_per_decade == 0 {
            return bad("panels_per_decade must be positive");
        }
        if self.nodes_per_panel < 2 {
            return bad("nodes_per_panel must be at least 2");
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return bad("grading_ratio must lie in (0, 1)");
        }
        if !(self.abs_floor > 0.0 && self.abs_floor < PI) {
            return bad("abs_floor must lie in (0, π)");
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol must be positive");
        }
        Ok(())
    }

    /// Geometric ratio between consecutive panel endpoints: the finer of
    /// `grading_ratio` and `10^(-1/panels_per_decade)`.
    pub fn effective_ratio(&self) -> f64 {
        self.grading_ratio
            .min(10f64.powf(-1.0 / self.panels_per_decade as f64))
    }

    /// Stable key for caching (bit patterns of every field).
    pub(crate) fn key(&self) -> [u64; 5] {
        [
            self.panels_per_decade as u64,
            self.nodes_per_panel as u64,
            self.grading_ratio.to_bits(),
            self.abs_floor.to_bits(),
            self.rel_tol.to_bits(),
        ]
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Precomputed abscissae and weights for `∫_0^π f(x) dx`.
///
/// Nodes are grouped by panel so that panel sums can be combined with
/// compensated summation. The sliver `[0, a]` is carried twice: at full
/// order (part of the rule) and at half order (error estimate only).
#[derive(Debug, Clone)]
pub struct GradedMesh {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    panel_starts: Vec<usize>,
    tail_start: usize,
    coarse_tail: Vec<(f64, f64)>,
}

impl GradedMesh {
    /// Mesh for a singularity `x^(-singular_exponent)` at 0 and an
    /// oscillating factor of angular frequency at most `frequency`.
    pub fn new(singular_exponent: f64, frequency: f64, quad: &QuadConfig) -> Result<Self> {
        quad.validate()?;
        if !(singular_exponent < 1.0) {
            return Err(LabError::NonIntegrable {
                exponent: singular_exponent,
            });
        }
        let rule = GaussLegendre::new(quad.nodes_per_panel);
        let ratio = quad.effective_ratio();
        let max_width = if frequency > 0.0 {
            PI / (4.0 * frequency)
        } else {
            f64::INFINITY
        };

        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panel_starts = Vec::new();

        let mut hi = PI;
        while hi > quad.abs_floor {
            let lo = hi * ratio;
            let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            let width = (hi - lo) / pieces as f64;
            for k in 0..pieces {
                let a = lo + k as f64 * width;
                let b = if k + 1 == pieces { hi } else { a + width };
                panel_starts.push(nodes.len());
                for (x, w) in rule.mapped(a, b) {
                    nodes.push(x);
                    weights.push(w);
                }
            }
            hi = lo;
        }

        let tail_start = nodes.len();
        panel_starts.push(tail_start);
        let m = 1.0 / (1.0 - singular_exponent.max(0.0));
        let sliver = |rule: &GaussLegendre| -> Vec<(f64, f64)> {
            rule.mapped(0.0, 1.0)
                .map(|(u, w)| (hi * u.powf(m), w * hi * m * u.powf(m - 1.0)))
                .collect()
        };
        for (x, w) in sliver(&rule) {
            nodes.push(x);
            weights.push(w);
        }
        let coarse_tail = sliver(&GaussLegendre::new((quad.nodes_per_panel / 2).max(1)));

        Ok(GradedMesh {
            nodes,
            weights,
            panel_starts,
            tail_start,
            coarse_tail,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i v_i` for values `v_i` already evaluated at the nodes,
    /// summed per panel and then across panels with Neumaier compensation.
    pub fn weighted_sum(&self, values: impl Fn(usize) -> f64) -> f64 {
        let mut acc = NeumaierSum::default();
        let ends = self
            .panel_starts
            .iter()
            .skip(1)
            .copied()
            .chain([self.len()]);
        for (start, end) in self.panel_starts.iter().copied().zip(ends) {
            let mut s = 0.0;
            for i in start..end {
                s += self.weights[i] * values(i);
            }
            acc.add(s);
        }
        acc.total()
    }

    /// Integrates and checks the sliver error estimate against `rel_tol`
    /// times `∫|f|`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, quad: &QuadConfig) -> Result<f64> {
        let values: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        let total = self.weighted_sum(|i| values[i]);
        let mass = self.weighted_sum(|i| values[i].abs());
        let fine: f64 = (self.tail_start..self.len())
            .map(|i| self.weights[i] * values[i])
            .sum();
        let coarse: f64 = self.coarse_tail.iter().map(|&(x, w)| w * f(x)).sum();
        let tail_error = (fine - coarse).abs();
        // relative to the L1 mass, so integrals that cancel to ~0 are fine
        if !total.is_finite() || tail_error > quad.rel_tol * mass {
            return Err(LabError::ToleranceNotMet { tail_error, total });
        }
        Ok(total)
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `∫_0^π f(x) dx` for `f ~ x^(-singular_exponent)` near 0.
pub fn singular_integral<F: Fn(f64) -> f64>(
    integrand: F,
    singular_exponent: f64,
    quad: &QuadConfig,
) -> Result<f64> {
    singular_integral_oscillatory(integrand, singular_exponent, 0.0, quad)
}

/// As [`singular_integral`], with panels no wider than `π / (4 frequency)`.
pub fn singular_integral_oscillatory<F: Fn(f64) -> f64>(
    integrand: F,
    singular_exponent: f64,
    frequency: f64,
    quad: &QuadConfig,
) -> Result<f64> {
    GradedMesh::new(singular_exponent, frequency, quad)?.integrate(integrand, quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 32, 64] {
            let gl = GaussLegendre::new(n);
            assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..(2 * n) {
                let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let want = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!(
                    (got - want).abs() < 1e-13,
                    "n={n} deg={deg}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn plain_and_singular_examples() {
        let q = QuadConfig::default();
        let one = singular_integral(|_| 1.0, 0.0, &q).unwrap();
        assert!((one - PI).abs() < 1e-14);
        let half = singular_integral(|x: f64| x.powf(-0.5), 0.5, &q).unwrap();
        assert!((half - 2.0 * PI.sqrt()).abs() < 1e-13 * half);
        for s in [0.2, 0.7, 0.95] {
            let v = singular_integral(|x: f64| x.powf(-s), s, &q).unwrap();
            let exact = PI.powf(1.0 - s) / (1.0 - s);
            assert!((v - exact).abs() < 1e-13 * exact, "s={s}");
        }
    }

    #[test]
    fn non_integrable_rejected() {
        let q = QuadConfig::default();
        assert!(matches!(
            singular_integral(|x: f64| 1.0 / x, 1.0, &q),
            Err(LabError::NonIntegrable { .. })
        ));
    }

    #[test]
    fn mismatched_exponent_is_detected() {
        // declaring a bounded integrand while it blows up like x^-0.9
        let q = QuadConfig::default();
        assert!(matches!(
            singular_integral(|x: f64| x.powf(-0.9), 0.0, &q),
            Err(LabError::ToleranceNotMet { .. })
        ));
    }

    #[test]
    fn oscillatory_panels_are_narrow() {
        let q = QuadConfig::default();
        let mesh = GradedMesh::new(0.4, 100.0, &q).unwrap();
        let mut starts = mesh.panel_starts.clone();
        starts.push(mesh.len());
        // one panel spans nodes_per_panel nodes; its width is bounded
        for w in starts.windows(2).take(starts.len() - 2) {
            let (a, b) = (mesh.nodes[w[0]], mesh.nodes[w[1] - 1]);
            assert!((b - a).abs() <= PI / 400.0);
        }
        let v = singular_integral_oscillatory(|x: f64| (100.0 * x).cos(), 0.4, 100.0, &q).unwrap();
        assert!((v - (100.0 * PI).sin() / 100.0).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        let q = QuadConfig {
            grading_ratio: 1.0,
            ..Default::default()
        };
        assert!(q.validate().is_err());
        let q = QuadConfig {
            abs_floor: 4.0,
            ..Default::default()
        };
        assert!(q.validate().is_err());
        assert!((QuadConfig::default().effective_ratio() - 0.5).abs() < 1e-15);
    }
}
