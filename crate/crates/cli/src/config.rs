//! TOML experiment configs.
//!
//! ```toml
//! # one pair, repeated p times (p defaults to 1)
//! p = 1
//! g = { family = "PurePower", alpha = 0.2 }
//! h = { family = "Farima", d = 0.1 }
//!
//! # or an explicit list of pairs instead of g/h
//! # [[pairs]]
//! # g = { family = "PowerTimesSmooth", alpha = 0.3, smooth_coeffs = [0.2] }
//! # h = { family = "Constant", scale = 2.0 }
//!
//! n = 256                          # trace
//! max_lag = 1023                   # coeffs
//! n_grid = [64, 128, 256, 512]     # rate (at least 4 sizes)
//! method = { kind = "exact" }      # or { kind = "hutchinson", probes = 64, seed = 1 }
//! epsilon = 0.01
//! margin = 0.1
//! c = 2.0
//! seed = 7
//!
//! [quad]                           # all optional
//! panels_per_decade = 4
//! nodes_per_panel = 32
//!
//! [verify]                         # proof-check suite settings, all optional
//! suites = ["dirichlet", "sandwich", "lemma3", "representation", "parts"]
//!
//! [report]
//! inputs = ["out/rate_report.json", "out/verify.json"]
//! ```
//!
//! Unknown keys are rejected. `seed` (or `--seed`) replaces the Hutchinson
//! seed and the verify seed; without it they keep their own values, and the
//! verify seed defaults to 7.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use toeplitz_lab::proofcheck::VerifySettings;
use toeplitz_lab::rates::{DEFAULT_EPSILON, DEFAULT_MARGIN};
use toeplitz_lab::symbols::SymbolRecord;
use toeplitz_lab::{QuadConfig, SymbolPairSet, SymbolSpec, TraceMethod};

use crate::error::CliError;

pub const DEFAULT_C: f64 = 2.0;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    g: SymbolRecord,
    h: SymbolRecord,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReport {
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    p: Option<usize>,
    g: Option<SymbolRecord>,
    h: Option<SymbolRecord>,
    pairs: Option<Vec<RawPair>>,
    n: Option<usize>,
    max_lag: Option<usize>,
    n_grid: Option<Vec<usize>>,
    method: Option<TraceMethod>,
    epsilon: Option<f64>,
    margin: Option<f64>,
    c: Option<f64>,
    seed: Option<u64>,
    quad: Option<QuadConfig>,
    verify: Option<VerifySettings>,
    report: Option<RawReport>,
}

/// A validated config with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub pairs: Option<SymbolPairSet>,
    pub n: Option<usize>,
    pub max_lag: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub method: TraceMethod,
    pub epsilon: f64,
    pub margin: f64,
    pub c: f64,
    pub seed: Option<u64>,
    pub quad: QuadConfig,
    pub verify: VerifySettings,
    /// Resolved against the config file's directory.
    pub report_inputs: Vec<PathBuf>,
}

impl ExperimentConfig {
    /// Replaces every seed the config carries.
    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.verify.seed = seed;
        if let TraceMethod::Hutchinson { seed: s, .. } = &mut self.method {
            *s = seed;
        }
    }

    pub fn require_pairs(&self) -> Result<&SymbolPairSet, CliError> {
        self.pairs
            .as_ref()
            .ok_or_else(|| CliError::validation("pairs", "give g and h, or a [[pairs]] list"))
    }
}

fn symbol(field: &str, rec: SymbolRecord) -> Result<SymbolSpec, CliError> {
    SymbolSpec::try_from(rec).map_err(|e| CliError::validation(field, e))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses and validates config text; relative report inputs are resolved
/// against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        CliError::Parse {
            message: e.message().to_string(),
            line,
            column,
        }
    })?;

    let pairs = match (raw.pairs, raw.g, raw.h) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(CliError::validation(
                "pairs",
                "give either g/h or [[pairs]], not both",
            ))
        }
        (Some(list), None, None) => {
            if raw.p.is_some_and(|p| p != list.len()) {
                return Err(CliError::validation(
                    "p",
                    "p disagrees with the number of [[pairs]]",
                ));
            }
            let specs = list
                .into_iter()
                .enumerate()
                .map(|(i, rp)| {
                    Ok((
                        symbol(&format!("pairs[{i}].g"), rp.g)?,
                        symbol(&format!("pairs[{i}].h"), rp.h)?,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Some(SymbolPairSet::new(specs).map_err(|e| CliError::validation("pairs", e))?)
        }
        (None, Some(g), Some(h)) => {
            let p = raw.p.unwrap_or(1);
            let (g, h) = (symbol("g", g)?, symbol("h", h)?);
            Some(SymbolPairSet::repeated(g, h, p).map_err(|e| CliError::validation("p", e))?)
        }
        (None, Some(_), None) => return Err(CliError::validation("h", "g given without h")),
        (None, None, Some(_)) => return Err(CliError::validation("g", "h given without g")),
        (None, None, None) => None,
    };

    let quad = raw.quad.unwrap_or_default();
    quad.validate()
        .map_err(|e| CliError::validation("quad", e))?;
    let c = raw.c.unwrap_or(DEFAULT_C);
    if !(c.is_finite() && c > 1.0) {
        return Err(CliError::validation(
            "c",
            format!("c > 1 required, got {c}"),
        ));
    }
    let epsilon = raw.epsilon.unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(CliError::validation("epsilon", "epsilon must be positive"));
    }
    let margin = raw.margin.unwrap_or(DEFAULT_MARGIN);
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(CliError::validation("margin", "margin must be nonnegative"));
    }
    if raw.n == Some(0) {
        return Err(CliError::validation("n", "n must be positive"));
    }
    if let TraceMethod::Hutchinson { probes, .. } = raw.method.unwrap_or(TraceMethod::Exact) {
        if probes < 2 {
            return Err(CliError::validation(
                "method.probes",
                "at least 2 probes required",
            ));
        }
    }
    if let Some(grid) = &raw.n_grid {
        if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::validation(
                "n_grid",
                "strictly increasing positive sizes required",
            ));
        }
    }

    let mut verify = raw.verify.unwrap_or_default();
    if let Some(c) = raw.c {
        verify.c = c;
    }
    let mut cfg = ExperimentConfig {
        pairs,
        n: raw.n,
        max_lag: raw.max_lag,
        n_grid: raw.n_grid,
        method: raw.method.unwrap_or(TraceMethod::Exact),
        epsilon,
        margin,
        c,
        seed: None,
        quad,
        verify,
        report_inputs: raw
            .report
            .map(|r| r.inputs.into_iter().map(|p| base.join(p)).collect())
            .unwrap_or_default(),
    };
    if let Some(seed) = raw.seed {
        cfg.apply_seed(seed);
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
        parse_config(text, Path::new("/base"))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse(
            r#"
p = 1
g = { family = "PurePower", alpha = 0.2 }
h = { family = "PurePower", alpha = 0.2 }
n_grid = [64, 128]
"#,
        )
        .unwrap();
        assert_eq!(cfg.c, 2.0);
        assert_eq!(cfg.margin, 0.1);
        assert_eq!(cfg.epsilon, 0.01);
        assert_eq!(cfg.quad, QuadConfig::default());
        assert_eq!(cfg.method, TraceMethod::Exact);
        assert_eq!(cfg.pairs.unwrap().p(), 1);
        assert_eq!(cfg.verify.seed, 7);
    }

    #[test]
    fn alpha_above_one_is_rejected() {
        let err = parse(
            r#"
g = { family = "PurePower", alpha = 1.2 }
h = { family = "PurePower", alpha = 0.2 }
"#,
        )
        .unwrap_err();
        assert!(matches!(&err, CliError::Validation { field, .. } if field == "g"));
        assert!(err.to_string().contains("alpha < 1 required"), "{err}");
    }

    #[test]
    fn psi_bar_at_one_names_restricted_space() {
        let err = parse(
            r#"
[[pairs]]
g = { family = "PurePower", alpha = 0.3 }
h = { family = "PurePower", alpha = 0.2 }
[[pairs]]
g = { family = "PurePower", alpha = 0.3 }
h = { family = "PurePower", alpha = 0.2 }
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("Θ₁^{2p}"), "{err}");
    }

    #[test]
    fn unknown_keys_and_syntax_errors_carry_positions() {
        let err = parse("n = 4\nbogus = 1\n").unwrap_err();
        match err {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("n = = 4").unwrap_err(),
            CliError::Parse { line: 1, .. }
        ));
        assert!(parse("[quad]\nnodes = 3\n").is_err());
    }

    #[test]
    fn seed_reaches_every_consumer() {
        let cfg = parse(
            r#"
seed = 99
method = { kind = "hutchinson", probes = 8, seed = 1 }
"#,
        )
        .unwrap();
        assert_eq!(cfg.verify.seed, 99);
        assert_eq!(
            cfg.method,
            TraceMethod::Hutchinson {
                probes: 8,
                seed: 99
            }
        );
    }

    #[test]
    fn field_validation() {
        assert!(parse("c = 1.0").is_err());
        assert!(parse("n_grid = [4, 8, 8, 16]").is_err());
        assert!(parse("n = 0").is_err());
        assert!(parse(r#"g = { family = "Constant" }"#).is_err());
        assert!(parse("method = { kind = \"hutchinson\", probes = 1, seed = 0 }").is_err());
        let cfg = parse("[report]\ninputs = [\"a.json\"]").unwrap();
        assert_eq!(cfg.report_inputs, vec![PathBuf::from("/base/a.json")]);
    }
}
