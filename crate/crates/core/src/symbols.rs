//! Parametric symbol families with a power-law singularity at the origin.
//!
//! Every family is even and real, and is extended 2π-periodically from
//! `[-π, π]`. A symbol with exponent `alpha` satisfies
//! `sup |x|^alpha |f(x)| < ∞` and `sup |x|^(alpha+1) |f'(x)| < ∞` on
//! `[-π, π] \ {0}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Grid size used to check positivity of the cosine-polynomial factor.
const POSITIVITY_GRID: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `scale * |x|^(-alpha)`
    PurePower,
    /// `scale * (2 sin(|x|/2))^(-2d)` with `alpha = 2d`.
    Farima,
    /// `scale * |x|^(-alpha) * (1 + Σ c_k cos(k x))`
    PowerTimesSmooth,
    /// `scale`
    Constant,
}

/// What to do when a symbol with `alpha > 0` is evaluated at `x ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularPolicy {
    Error,
    Infinity,
}

/// A validated symbol. Construct through the family constructors or
/// [`SymbolSpec::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolRecord", into = "SymbolRecord")]
pub struct SymbolSpec {
    family: Family,
    alpha: f64,
    smooth_coeffs: Vec<f64>,
    scale: f64,
}

/// Structured config record of a symbol. Farima symbols may give `d`
/// instead of `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolRecord {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth_coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl TryFrom<SymbolRecord> for SymbolSpec {
    type Error = LabError;

    fn try_from(rec: SymbolRecord) -> Result<Self> {
        let alpha = match (rec.family, rec.alpha, rec.d) {
            (_, Some(_), Some(_)) => {
                return Err(LabError::InvalidSymbol(
                    "give either alpha or d, not both".into(),
                ))
            }
            (Family::Farima, None, Some(d)) => 2.0 * d,
            (_, None, Some(_)) => {
                return Err(LabError::InvalidSymbol(
                    "d is only accepted for the Farima family".into(),
                ))
            }
            (Family::Constant, None, None) => 0.0,
            (_, Some(a), None) => a,
            (_, None, None) => return Err(LabError::InvalidSymbol("alpha is required".into())),
        };
        if rec.smooth_coeffs.is_some() && rec.family != Family::PowerTimesSmooth {
            return Err(LabError::InvalidSymbol(
                "smooth_coeffs is only accepted for PowerTimesSmooth".into(),
            ));
        }
        SymbolSpec::new(
            rec.family,
            alpha,
            rec.smooth_coeffs.unwrap_or_default(),
            rec.scale.unwrap_or(1.0),
        )
    }
}

impl From<SymbolSpec> for SymbolRecord {
    fn from(spec: SymbolSpec) -> Self {
        let is_farima = spec.family == Family::Farima;
        SymbolRecord {
            family: spec.family,
            alpha: (!is_farima && spec.family != Family::Constant).then_some(spec.alpha),
            d: is_farima.then_some(spec.alpha / 2.0),
            smooth_coeffs: (spec.family == Family::PowerTimesSmooth)
                .then(|| spec.smooth_coeffs.clone()),
            scale: Some(spec.scale),
        }
    }
}

/// Reduces `x` into `[-π, π]` by subtracting the nearest multiple of 2π.
/// Points already inside `[-π, π]` are returned unchanged.
pub fn reduce_angle(x: f64) -> f64 {
    if (-PI..=PI).contains(&x) {
        return x;
    }
    let r = x - TWO_PI * (x / TWO_PI).round();
    r.clamp(-PI, PI)
}

impl SymbolSpec {
    pub fn new(family: Family, alpha: f64, smooth_coeffs: Vec<f64>, scale: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha >= 1.0 {
            return Err(LabError::InvalidSymbol(format!(
                "alpha < 1 required, got alpha = {alpha}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(LabError::InvalidSymbol(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        match family {
            Family::Constant if alpha != 0.0 => {
                return Err(LabError::InvalidSymbol(
                    "Constant symbols have alpha = 0".into(),
                ))
            }
            Family::PowerTimesSmooth => {}
            _ if !smooth_coeffs.is_empty() => {
                return Err(LabError::InvalidSymbol(
                    "smooth_coeffs is only accepted for PowerTimesSmooth".into(),
                ))
            }
            _ => {}
        }
        if smooth_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LabError::InvalidSymbol(
                "smooth_coeffs must be finite".into(),
            ));
        }
        let spec = SymbolSpec {
            family,
            alpha,
            smooth_coeffs,
            scale,
        };
        if family == Family::PowerTimesSmooth {
            // Even factor: checking [0, π] covers the whole period.
            let min = (0..POSITIVITY_GRID)
                .map(|i| spec.smooth_factor(PI * i as f64 / (POSITIVITY_GRID - 1) as f64))
                .fold(f64::INFINITY, f64::min);
            if min <= 0.0 {
                return Err(LabError::InvalidSymbol(format!(
                    "smooth factor must be strictly positive on [-π, π] (min {min:.3e})"
                )));
            }
        }
        Ok(spec)
    }

    pub fn pure_power(alpha: f64) -> Result<Self> {
        Self::new(Family::PurePower, alpha, Vec::new(), 1.0)
    }

    /// FARIMA(0, d, 0)-type symbol `(2 sin(|x|/2))^(-2d)`.
    pub fn farima(d: f64) -> Result<Self> {
        Self::new(Family::Farima, 2.0 * d, Vec::new(), 1.0)
    }

    pub fn power_times_smooth(alpha: f64, smooth_coeffs: Vec<f64>) -> Result<Self> {
        Self::new(Family::PowerTimesSmooth, alpha, smooth_coeffs, 1.0)
    }

    pub fn constant() -> Self {
        SymbolSpec {
            family: Family::Constant,
            alpha: 0.0,
            smooth_coeffs: Vec::new(),
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(LabError::InvalidSymbol(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Singularity exponent at the origin.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn smooth_coeffs(&self) -> &[f64] {
        &self.smooth_coeffs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Highest cosine frequency present in the smooth factor (0 if none).
    pub fn smooth_order(&self) -> usize {
        self.smooth_coeffs.len()
    }

    fn smooth_factor(&self, x: f64) -> f64 {
        1.0 + self
            .smooth_coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k + 1) as f64 * x).cos())
            .sum::<f64>()
    }

    fn smooth_factor_derivative(&self, x: f64) -> f64 {
        -self
            .smooth_coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let k = (k + 1) as f64;
                c * k * (k * x).sin()
            })
            .sum::<f64>()
    }

    /// Evaluates the symbol on `|x| ∈ (0, π]` without reduction. At
    /// `ax == 0` this follows IEEE `powf` and yields `+inf` when
    /// `alpha > 0`.
    pub(crate) fn eval_abs(&self, ax: f64) -> f64 {
        let a = self.alpha;
        let v = match self.family {
            Family::Constant => 1.0,
            Family::PurePower => ax.powf(-a),
            Family::Farima => (2.0 * (0.5 * ax).sin()).powf(-a),
            Family::PowerTimesSmooth => ax.powf(-a) * self.smooth_factor(ax),
        };
        self.scale * v
    }

    /// `f(x)` at any finite `x`, after reduction into `[-π, π]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.eval_with(x, SingularPolicy::Error)
    }

    pub fn eval_with(&self, x: f64, policy: SingularPolicy) -> Result<f64> {
        if !x.is_finite() {
            return Err(LabError::InvalidArgument(format!(
                "non-finite abscissa {x}"
            )));
        }
        let ax = reduce_angle(x).abs();
        if ax == 0.0 && self.alpha > 0.0 {
            return match policy {
                SingularPolicy::Error => Err(LabError::SingularPoint { x }),
                SingularPolicy::Infinity => Ok(f64::INFINITY),
            };
        }
        Ok(self.eval_abs(ax))
    }

    /// Analytic derivative `f'(x)` for `x ≢ 0 (mod 2π)`.
    pub fn eval_derivative(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(LabError::InvalidArgument(format!(
                "non-finite abscissa {x}"
            )));
        }
        let r = reduce_angle(x);
        if r == 0.0 {
            return Err(LabError::SingularPoint { x });
        }
        let ax = r.abs();
        let sign = r.signum();
        let a = self.alpha;
        // derivative in |x|, then chain rule through |x|
        let d_abs = match self.family {
            Family::Constant => 0.0,
            Family::PurePower => -a * ax.powf(-a - 1.0),
            Family::Farima => {
                let s = 2.0 * (0.5 * ax).sin();
                -a * s.powf(-a - 1.0) * (0.5 * ax).cos()
            }
            Family::PowerTimesSmooth => {
                -a * ax.powf(-a - 1.0) * self.smooth_factor(ax)
                    + ax.powf(-a) * self.smooth_factor_derivative(ax)
            }
        };
        Ok(self.scale * sign * d_abs)
    }
}

/// Suprema of `|x|^alpha |f(x)|` and `|x|^(alpha+1) |f'(x)|` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassReport {
    pub sup0: f64,
    pub sup1: f64,
}

pub fn check_class_membership(spec: &SymbolSpec, grid: &[f64]) -> Result<ClassReport> {
    if grid.is_empty() {
        return Err(LabError::InvalidArgument("empty grid".into()));
    }
    let a = spec.alpha();
    let mut sup0 = 0.0_f64;
    let mut sup1 = 0.0_f64;
    for &x in grid {
        let ax = reduce_angle(x).abs();
        if ax == 0.0 {
            return Err(LabError::InvalidArgument("grid must exclude 0".into()));
        }
        sup0 = sup0.max(ax.powf(a) * spec.eval(x)?.abs());
        sup1 = sup1.max(ax.powf(a + 1.0) * spec.eval_derivative(x)?.abs());
    }
    Ok(ClassReport { sup0, sup1 })
}

/// `p` ordered pairs `(g_j, h_j)` whose exponent vector
/// `θ = (α_1..α_p, β_1..β_p)` satisfies `Σ (α_j + β_j)_+ < 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolPairSet {
    pairs: Vec<(SymbolSpec, SymbolSpec)>,
}

impl SymbolPairSet {
    pub fn new(pairs: Vec<(SymbolSpec, SymbolSpec)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(LabError::InvalidArgument(
                "at least one pair is required".into(),
            ));
        }
        let psi_bar: f64 = pairs
            .iter()
            .map(|(g, h)| (g.alpha() + h.alpha()).max(0.0))
            .sum();
        if psi_bar >= 1.0 {
            return Err(LabError::OutsideParameterSpace { psi_bar });
        }
        Ok(SymbolPairSet { pairs })
    }

    /// The same pair repeated `p` times.
    pub fn repeated(g: SymbolSpec, h: SymbolSpec, p: usize) -> Result<Self> {
        Self::new(vec![(g, h); p])
    }

    pub fn p(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(SymbolSpec, SymbolSpec)] {
        &self.pairs
    }

    /// `(α_1, …, α_p, β_1, …, β_p)`
    pub fn theta(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|(g, _)| g.alpha())
            .chain(self.pairs.iter().map(|(_, h)| h.alpha()))
            .collect()
    }

    /// Symbols in matrix-product order `g_1, h_1, …, g_p, h_p`.
    pub fn symbols(&self) -> impl Iterator<Item = &SymbolSpec> {
        self.pairs.iter().flat_map(|(g, h)| [g, h])
    }

    /// Pairs rotated left by `k` positions.
    pub fn rotated(&self, k: usize) -> Self {
        let mut pairs = self.pairs.clone();
        let len = pairs.len();
        pairs.rotate_left(k % len);
        SymbolPairSet { pairs }
    }
}
