//! Symmetric Toeplitz operators `T_n(f)` with entries `ĥ(i - j)` and traces
//! of the products `∏_j T_n(g_j) T_n(h_j)`.
//!
//! Matrix-vector products go through a circulant embedding of size `2n`:
//! the first column `[t_0, …, t_{n-1}, 0, t_{n-1}, …, t_1]` has a real
//! spectrum, so a product costs one forward and one inverse FFT.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fourier::{CoeffCache, CoeffTable};
use crate::quadrature::QuadConfig;
use crate::symbols::SymbolPairSet;

/// Largest dimension for which `build_toeplitz` cross-checks the FFT
/// product against the dense one.
const VALIDATE_DENSE_UP_TO: usize = 256;

#[derive(Clone)]
pub struct ToeplitzOperator {
    n: usize,
    coeffs: Vec<f64>,
    spectrum: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ToeplitzOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzOperator")
            .field("n", &self.n)
            .field("coeffs", &self.coeffs)
            .finish_non_exhaustive()
    }
}

/// Scratch space for FFT matvecs, reusable across calls on operators of
/// the same dimension.
#[derive(Debug, Clone)]
pub struct MatvecWorkspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl ToeplitzOperator {
    /// Operator from the first `n` lags of a coefficient table.
    pub fn new(coeffs: &CoeffTable, n: usize) -> Result<Self> {
        Self::from_coefficients(coeffs.coeffs(), n)
    }

    pub fn from_coefficients(coeffs: &[f64], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidArgument(
                "dimension must be positive".into(),
            ));
        }
        if coeffs.len() < n {
            return Err(LabError::InsufficientLags {
                needed: n - 1,
                available: coeffs.len().saturating_sub(1),
            });
        }
        let coeffs = coeffs[..n].to_vec();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LabError::InvalidArgument(
                "non-finite Toeplitz coefficient".into(),
            ));
        }
        let size = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);

        let mut col = vec![Complex64::new(0.0, 0.0); size];
        col[0].re = coeffs[0];
        for k in 1..n {
            col[k].re = coeffs[k];
            col[size - k].re = coeffs[k];
        }
        forward.process(&mut col);
        // symmetric real column: the spectrum is real up to rounding
        let spectrum = col.iter().map(|c| c.re / size as f64).collect();

        Ok(ToeplitzOperator {
            n,
            coeffs,
            spectrum,
            forward,
            inverse,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Real eigenvalues of the size-`2n` circulant embedding.
    pub fn circulant_spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i.abs_diff(j)]
    }

    /// Row-major dense realization.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.entry(i, j);
            }
        }
        m
    }

    pub fn dense_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j) * v[j]).sum())
            .collect())
    }

    pub fn workspace(&self) -> MatvecWorkspace {
        let size = 2 * self.n;
        let scratch_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        MatvecWorkspace {
            buf: vec![Complex64::new(0.0, 0.0); size],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(LabError::DimensionMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    /// `T_n v` in `O(n log n)`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.matvec_into(v, &mut out, &mut self.workspace())?;
        Ok(out)
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64], ws: &mut MatvecWorkspace) -> Result<()> {
        self.check_len(v.len())?;
        self.check_len(out.len())?;
        if ws.buf.len() != 2 * self.n {
            *ws = self.workspace();
        }
        let n = self.n;
        for (b, &x) in ws.buf[..n].iter_mut().zip(v) {
            *b = Complex64::new(x, 0.0);
        }
        ws.buf[n..].fill(Complex64::new(0.0, 0.0));
        self.forward
            .process_with_scratch(&mut ws.buf, &mut ws.scratch);
        for (b, &s) in ws.buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inverse
            .process_with_scratch(&mut ws.buf, &mut ws.scratch);
        for (o, b) in out.iter_mut().zip(&ws.buf[..n]) {
            *o = b.re;
        }
        Ok(())
    }
}

pub fn build_toeplitz(coeffs: &CoeffTable, n: usize) -> Result<ToeplitzOperator> {
    let op = ToeplitzOperator::new(coeffs, n)?;
    if n <= VALIDATE_DENSE_UP_TO {
        // alternating ramp exercises both low and high frequencies
        let v: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -0.5 } + i as f64 / n as f64)
            .collect();
        let fast = op.matvec(&v)?;
        let dense = op.dense_matvec(&v)?;
        let scale = dense
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        let err = fast
            .iter()
            .zip(&dense)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if err > 1e-10 * scale {
            return Err(LabError::InvalidArgument(format!(
                "circulant embedding disagrees with dense product ({err:e})"
            )));
        }
    }
    Ok(op)
}

pub fn toeplitz_matvec(op: &ToeplitzOperator, v: &[f64]) -> Result<Vec<f64>> {
    op.matvec(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceMethodTag {
    Exact,
    Hutchinson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub value: f64,
    pub method: TraceMethodTag,
    pub probes: usize,
    pub stderr: f64,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
}

/// Sum with a fixed pairwise topology, independent of thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len if len <= 8 => values.iter().sum(),
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// The `2p` operators `T_n(g_1), T_n(h_1), …, T_n(g_p), T_n(h_p)` of one
/// product, in matrix-product order.
#[derive(Debug, Clone)]
pub struct ProductChain {
    ops: Vec<ToeplitzOperator>,
    n: usize,
}

impl ProductChain {
    pub fn new(
        pairs: &SymbolPairSet,
        n: usize,
        tables: &[(CoeffTable, CoeffTable)],
    ) -> Result<Self> {
        if tables.len() != pairs.p() {
            return Err(LabError::DimensionMismatch {
                expected: pairs.p(),
                got: tables.len(),
            });
        }
        let mut ops = Vec::with_capacity(2 * pairs.p());
        for ((g, h), (tg, th)) in pairs.pairs().iter().zip(tables) {
            if tg.spec() != g || th.spec() != h {
                return Err(LabError::InvalidArgument(
                    "coefficient table does not belong to the paired symbol".into(),
                ));
            }
            ops.push(build_toeplitz(tg, n)?);
            ops.push(build_toeplitz(th, n)?);
        }
        Ok(ProductChain { ops, n })
    }

    /// Builds the chain, filling `cache` with any missing coefficients.
    pub fn from_cache(
        pairs: &SymbolPairSet,
        n: usize,
        quad: &QuadConfig,
        cache: &mut CoeffCache,
    ) -> Result<Self> {
        let mut ops = Vec::with_capacity(2 * pairs.p());
        for spec in pairs.symbols() {
            let table = cache.table(spec, n.saturating_sub(1), quad)?;
            ops.push(build_toeplitz(table, n)?);
        }
        Ok(ProductChain { ops, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.ops.len() / 2
    }

    pub fn operators(&self) -> &[ToeplitzOperator] {
        &self.ops
    }

    /// `∏ T v`, applying the rightmost operator first.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut ws = self.ops[0].workspace();
        let mut cur = v.to_vec();
        let mut next = vec![0.0; self.n];
        for op in self.ops.iter().rev() {
            op.matvec_into(&cur, &mut next, &mut ws)?;
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Diagonal entry `(∏ T)_{ii}` by pushing `e_i` through the chain. The
    /// first product is the `i`-th column of the last operator.
    fn diagonal_entry(
        &self,
        i: usize,
        ws: &mut MatvecWorkspace,
        a: &mut Vec<f64>,
        b: &mut Vec<f64>,
    ) -> f64 {
        let last = self.ops.last().expect("chain is never empty");
        for (j, x) in a.iter_mut().enumerate() {
            *x = last.entry(j, i);
        }
        for op in self.ops.iter().rev().skip(1) {
            op.matvec_into(a, b, ws)
                .expect("chain dimensions are consistent");
            std::mem::swap(a, b);
        }
        a[i]
    }

    pub fn trace_exact(&self) -> TraceResult {
        let n = self.n;
        let diag: Vec<f64> = (0..n)
            .into_par_iter()
            .map_init(
                || (self.ops[0].workspace(), vec![0.0; n], vec![0.0; n]),
                |(ws, a, b), i| self.diagonal_entry(i, ws, a, b),
            )
            .collect();
        TraceResult {
            value: pairwise_sum(&diag),
            method: TraceMethodTag::Exact,
            probes: 0,
            stderr: 0.0,
            seed: 0,
            n,
            p: self.p(),
        }
    }

    /// Rademacher probe `i` of the stream keyed by `seed`.
    pub fn probe(n: usize, seed: u64, index: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        (0..n)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect()
    }

    pub fn trace_hutchinson(&self, probes: usize, seed: u64) -> Result<TraceResult> {
        if probes < 2 {
            return Err(LabError::InvalidArgument(
                "Hutchinson estimation needs at least 2 probes".into(),
            ));
        }
        let n = self.n;
        let samples: Vec<f64> = (0..probes as u64)
            .into_par_iter()
            .map(|k| {
                let z = Self::probe(n, seed, k);
                let az = self.apply(&z).expect("chain dimensions are consistent");
                pairwise_sum(&z.iter().zip(&az).map(|(a, b)| a * b).collect::<Vec<_>>())
            })
            .collect();
        let m = probes as f64;
        let mean = pairwise_sum(&samples) / m;
        let centered: Vec<f64> = samples.iter().map(|s| (s - mean).powi(2)).collect();
        let var = pairwise_sum(&centered) / (m - 1.0);
        Ok(TraceResult {
            value: mean,
            method: TraceMethodTag::Hutchinson,
            probes,
            stderr: (var / m).sqrt(),
            seed,
            n,
            p: self.p(),
        })
    }
}

pub fn trace_product_exact(
    pairs: &SymbolPairSet,
    n: usize,
    tables: &[(CoeffTable, CoeffTable)],
) -> Result<TraceResult> {
    Ok(ProductChain::new(pairs, n, tables)?.trace_exact())
}

pub fn trace_product_stochastic(
    pairs: &SymbolPairSet,
    n: usize,
    tables: &[(CoeffTable, CoeffTable)],
    probes: usize,
    seed: u64,
) -> Result<TraceResult> {
    ProductChain::new(pairs, n, tables)?.trace_hutchinson(probes, seed)
}

/// Coefficient tables for every pair, covering lags `0..=max_lag`.
pub fn pair_tables(
    pairs: &SymbolPairSet,
    max_lag: usize,
    quad: &QuadConfig,
    cache: &mut CoeffCache,
) -> Result<Vec<(CoeffTable, CoeffTable)>> {
    pairs
        .pairs()
        .iter()
        .map(|(g, h)| {
            let tg = cache.table(g, max_lag, quad)?.clone();
            let th = cache.table(h, max_lag, quad)?.clone();
            Ok((tg, th))
        })
        .collect()
}
