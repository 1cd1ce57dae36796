//! Empirical convergence rates of `E_n = |n^{-1} Tr[∏ T_n(g_j) T_n(h_j)] - I(θ)|`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fourier::CoeffCache;
use crate::limits::{exponents, limit_integral};
use crate::quadrature::QuadConfig;
use crate::symbols::SymbolPairSet;
use crate::toeplitz::{ProductChain, TraceMethodTag, TraceResult};

pub const DEFAULT_MARGIN: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Errors at or below `ZERO_FLOOR * |I(θ)|` count as exact cancellation.
pub const ZERO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum TraceMethod {
    Exact,
    Hutchinson { probes: usize, seed: u64 },
}

impl TraceMethod {
    pub fn trace(&self, chain: &ProductChain) -> Result<TraceResult> {
        match *self {
            TraceMethod::Exact => Ok(chain.trace_exact()),
            TraceMethod::Hutchinson { probes, seed } => chain.trace_hutchinson(probes, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorMeasurement {
    pub n: usize,
    pub error: f64,
    /// Standard error of `error` (0 for exact traces).
    pub stderr: f64,
    pub trace: TraceResult,
    pub limit: f64,
}

/// `E_n` with a caller-supplied limit and coefficient cache.
pub fn measure_error_with(
    pairs: &SymbolPairSet,
    n: usize,
    method: &TraceMethod,
    quad: &QuadConfig,
    limit: f64,
    cache: &mut CoeffCache,
) -> Result<ErrorMeasurement> {
    if n == 0 {
        return Err(LabError::InvalidArgument("n must be positive".into()));
    }
    let chain = ProductChain::from_cache(pairs, n, quad, cache)?;
    let trace = method.trace(&chain)?;
    let nf = n as f64;
    let error = (trace.value / nf - limit).abs();
    let stderr = trace.stderr / nf;
    if trace.method == TraceMethodTag::Hutchinson && error < 10.0 * stderr {
        return Err(LabError::StochasticFloor(format!(
            "n = {n}: error {error:.3e} is below 10 standard errors ({:.3e})",
            10.0 * stderr
        )));
    }
    Ok(ErrorMeasurement {
        n,
        error,
        stderr,
        trace,
        limit,
    })
}

pub fn measure_error(
    pairs: &SymbolPairSet,
    n: usize,
    method: &TraceMethod,
    quad: &QuadConfig,
) -> Result<f64> {
    let limit = limit_integral(pairs, quad)?;
    measure_error_with(pairs, n, method, quad, limit, &mut CoeffCache::new()).map(|m| m.error)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points dropped because their error was not positive.
    pub dropped_zero: usize,
}

/// Ordinary least squares of `ln E` on `ln n`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, e)| *n > 0.0 && *e > 0.0)
        .map(|(n, e)| (n.ln(), e.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(LabError::DegenerateFit {
            positive_points: logs.len(),
        });
    }
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::DegenerateFit {
            positive_points: logs.len(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    // a flat series is fitted perfectly by a zero slope
    let r_squared = if syy <= f64::EPSILON * m * my.abs().max(1.0) {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
        dropped_zero: points.len() - logs.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateExperiment {
    pub pairs: SymbolPairSet,
    pub n_grid: Vec<usize>,
    pub method: TraceMethod,
    pub epsilon: f64,
    pub margin: f64,
    pub quad: QuadConfig,
}

impl RateExperiment {
    pub fn new(pairs: SymbolPairSet, n_grid: Vec<usize>) -> Result<Self> {
        let exp = RateExperiment {
            pairs,
            n_grid,
            method: TraceMethod::Exact,
            epsilon: DEFAULT_EPSILON,
            margin: DEFAULT_MARGIN,
            quad: QuadConfig::default(),
        };
        exp.validate()?;
        Ok(exp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < 4 {
            return Err(LabError::InvalidArgument(
                "n_grid needs at least 4 points".into(),
            ));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::InvalidArgument(
                "n_grid must be strictly increasing positive integers".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(LabError::InvalidArgument("epsilon must be positive".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(LabError::InvalidArgument(
                "margin must be nonnegative".into(),
            ));
        }
        self.quad.validate()
    }
}

/// Dyadic grid `lo, 2 lo, …, ≤ hi`.
pub fn dyadic_grid(lo: usize, hi: usize) -> Vec<usize> {
    std::iter::successors(Some(lo.max(1)), |&n| Some(n * 2))
        .take_while(|&n| n <= hi)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorPoint {
    pub n: usize,
    pub error: f64,
    pub method: TraceMethodTag,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub errors: Vec<ErrorPoint>,
    pub limit: f64,
    pub psi: f64,
    pub psi_bar: f64,
    /// `None` when every error sits below the zero floor.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub theoretical_exponent: f64,
    pub epsilon: f64,
    pub margin: f64,
    pub zero_error: bool,
    pub monotone_envelope: bool,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl RateReport {
    /// CSV with columns `n,E_n,method,stderr`.
    pub fn errors_csv(&self) -> String {
        let mut s = String::from("n,E_n,method,stderr\n");
        for e in &self.errors {
            let method = match e.method {
                TraceMethodTag::Exact => "exact",
                TraceMethodTag::Hutchinson => "hutchinson",
            };
            let _ = writeln!(s, "{},{:.16e},{},{:.16e}", e.n, e.error, method, e.stderr);
        }
        s
    }
}

/// True iff the fitted slope is at most `-1 + ψ̄ + epsilon + margin`. A
/// report without a slope (all errors zero) passes vacuously.
pub fn check_rate_bound(report: &RateReport, epsilon: f64, margin: f64) -> bool {
    match report.slope {
        None => true,
        Some(slope) => slope <= report.theoretical_exponent + epsilon + margin,
    }
}

/// Successive errors on the grid never increase, except for at most one
/// increase of at most 10%.
pub fn monotone_envelope(errors: &[f64]) -> bool {
    let mut inversions = 0;
    for w in errors.windows(2) {
        if w[1] > w[0] {
            if w[1] > 1.1 * w[0] {
                return false;
            }
            inversions += 1;
        }
    }
    inversions <= 1
}

pub fn run_rate_experiment(exp: &RateExperiment) -> Result<RateReport> {
    run_rate_experiment_with(exp, &mut CoeffCache::new())
}

pub fn run_rate_experiment_with(
    exp: &RateExperiment,
    cache: &mut CoeffCache,
) -> Result<RateReport> {
    exp.validate()?;
    let ex = exponents(&exp.pairs);
    let limit = limit_integral(&exp.pairs, &exp.quad)?;
    let max_n = *exp.n_grid.last().expect("validated grid");
    // one table per symbol, sized for the largest n
    for spec in exp.pairs.symbols() {
        cache.table(spec, max_n - 1, &exp.quad)?;
    }
    let mut errors = Vec::with_capacity(exp.n_grid.len());
    for &n in &exp.n_grid {
        let m = measure_error_with(&exp.pairs, n, &exp.method, &exp.quad, limit, cache)?;
        errors.push(ErrorPoint {
            n,
            error: m.error,
            method: m.trace.method,
            stderr: m.stderr,
        });
    }

    let mut notes = Vec::new();
    let floor = ZERO_FLOOR * limit.abs();
    let points: Vec<(f64, f64)> = errors
        .iter()
        .filter(|e| e.error > floor)
        .map(|e| (e.n as f64, e.error))
        .collect();
    let zero_error = points.is_empty();
    let fit = if zero_error {
        notes.push("ZeroError: every error is below the floor; bound holds vacuously".into());
        None
    } else {
        if points.len() < errors.len() {
            notes.push(format!(
                "ZeroError: {} point(s) below the floor were excluded from the fit",
                errors.len() - points.len()
            ));
        }
        Some(fit_loglog_slope(&points)?)
    };

    let theoretical_exponent = -1.0 + ex.psi_bar;
    if let Some(f) = fit {
        if ex.per_pair.iter().any(|&s| s > 0.0) && f.slope < -1.1 {
            notes.push(format!(
                "warning: slope {:.3} decays faster than n^-1.1; check quadrature accuracy",
                f.slope
            ));
        }
    }
    let errs: Vec<f64> = errors.iter().map(|e| e.error).collect();
    let monotone = zero_error || monotone_envelope(&errs);
    if !monotone {
        notes.push("warning: errors are not monotone along the grid".into());
    }

    let mut report = RateReport {
        errors,
        limit,
        psi: ex.psi,
        psi_bar: ex.psi_bar,
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        r_squared: fit.map(|f| f.r_squared),
        theoretical_exponent,
        epsilon: exp.epsilon,
        margin: exp.margin,
        zero_error,
        monotone_envelope: monotone,
        notes,
        pass: false,
    };
    report.pass = check_rate_bound(&report, exp.epsilon, exp.margin);
    Ok(report)
}
