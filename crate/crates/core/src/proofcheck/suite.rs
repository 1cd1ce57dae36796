//! The default battery of proof checks, emitted as [`CheckRecord`]s.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::dirichlet::{
    check_dirichlet_bound, check_l_bound_family, check_l_convolution, dirichlet_direct,
    dirichlet_eval, dyadic_up_to, reproducing_identity, uniform_grid,
};
use super::domain::sandwich_sweep;
use super::lemma3::check_lemma3_bound;
use super::parts::parts_growth_sweep;
use super::representation::{representation_check_with, Sampler};
use crate::error::Result;
use crate::fourier::CoeffCache;
use crate::output::CheckRecord;
use crate::quadrature::QuadConfig;
use crate::symbols::{SymbolPairSet, SymbolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Dirichlet,
    Sandwich,
    Lemma3,
    Representation,
    Parts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub c: f64,
    pub dirichlet_max_n: usize,
    pub dirichlet_grid: usize,
    pub convolution_grid: usize,
    pub sandwich_samples: usize,
    pub sandwich_max_p: usize,
    pub lemma3_alpha: f64,
    pub lemma3_samples: usize,
    pub representation_alpha: f64,
    pub representation_samples: usize,
    pub grid_nodes: usize,
    pub parts_alpha: f64,
    pub parts_samples: usize,
    pub parts_n: Vec<usize>,
    pub epsilon: f64,
    pub parts_margin: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            suites: vec![
                Suite::Dirichlet,
                Suite::Sandwich,
                Suite::Lemma3,
                Suite::Representation,
                Suite::Parts,
            ],
            seed: 7,
            c: 2.0,
            dirichlet_max_n: 1024,
            dirichlet_grid: 10_000,
            convolution_grid: 200,
            sandwich_samples: 100_000,
            sandwich_max_p: 3,
            lemma3_alpha: 0.3,
            lemma3_samples: 10_000,
            representation_alpha: 0.2,
            representation_samples: 1_000_000,
            grid_nodes: 64,
            parts_alpha: 0.2,
            parts_samples: 4_096_000,
            parts_n: vec![16, 32, 64, 128, 256],
            epsilon: 0.01,
            parts_margin: 0.2,
        }
    }
}

fn power_pairs(alpha: f64, p: usize) -> Result<SymbolPairSet> {
    let g = SymbolSpec::pure_power(alpha)?;
    SymbolPairSet::repeated(g.clone(), g, p)
}

pub fn run_suites(s: &VerifySettings) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for suite in &s.suites {
        match suite {
            Suite::Dirichlet => dirichlet_suite(s, &mut out)?,
            Suite::Sandwich => {
                for p in 1..=s.sandwich_max_p {
                    let r = sandwich_sweep(p, s.c, s.sandwich_samples, s.seed)?;
                    out.push(CheckRecord::at_most(
                        "sandwich_chain",
                        &r,
                        r.failures as f64,
                        0.0,
                    )?);
                }
            }
            Suite::Lemma3 => {
                let pairs = power_pairs(s.lemma3_alpha, 1)?;
                for pi in [0u8, 1] {
                    let r = check_lemma3_bound(&pairs, &[pi], s.lemma3_samples, s.c, s.seed)?;
                    out.push(CheckRecord::at_most(
                        "lemma3_pointwise_bound",
                        json!({"alpha": s.lemma3_alpha, "beta": s.lemma3_alpha, "report": r}),
                        r.violation_rate,
                        0.0,
                    )?);
                }
            }
            Suite::Representation => representation_suite(s, &mut out)?,
            Suite::Parts => {
                let pairs = power_pairs(s.parts_alpha, 1)?;
                let r = parts_growth_sweep(
                    &pairs,
                    &[1],
                    &s.parts_n,
                    s.parts_samples,
                    s.seed,
                    s.c,
                    s.epsilon,
                    s.parts_margin,
                )?;
                let params = json!({
                    "alpha": s.parts_alpha,
                    "beta": s.parts_alpha,
                    "pi": [1],
                    "n": s.parts_n,
                    "samples": s.parts_samples,
                    "c": s.c,
                    "seed": s.seed,
                });
                let slope = |f: &Option<crate::rates::LogLogFit>| f.map_or(f64::NAN, |f| f.slope);
                out.push(CheckRecord::new(
                    "w_part_growth",
                    &params,
                    slope(&r.fit_n1),
                    r.bound_n1,
                    r.pass_n1,
                )?);
                out.push(CheckRecord::new(
                    "w_complement_part_growth",
                    &params,
                    slope(&r.fit_n2),
                    r.bound_n2,
                    r.pass_n2,
                )?);
                let z = r
                    .points
                    .iter()
                    .map(|p| {
                        (p.total.value - p.full_domain.value).abs()
                            / p.total
                                .stderr
                                .hypot(p.full_domain.stderr)
                                .max(f64::MIN_POSITIVE)
                    })
                    .fold(0.0, f64::max);
                out.push(CheckRecord::new(
                    "split_matches_full_domain",
                    json!({"sweep": params, "points": r.points}),
                    z,
                    3.0,
                    r.all_consistent,
                )?);
            }
        }
    }
    Ok(out)
}

fn dirichlet_suite(s: &VerifySettings, out: &mut Vec<CheckRecord>) -> Result<()> {
    let ns = dyadic_up_to(s.dirichlet_max_n);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let xs: Vec<f64> = (0..1000)
        .map(|_| PI * (2.0 * rng.random::<f64>() - 1.0))
        .collect();

    let mut closed = 0.0f64;
    let mut periodic = 0.0f64;
    for &n in &ns {
        for (i, &x) in xs.iter().enumerate() {
            let d = dirichlet_direct(n, x);
            closed = closed.max((dirichlet_eval(n, x) - d).norm() / d.norm().max(1.0));
            if i < 100 {
                let shifted = dirichlet_direct(n, x + 2.0 * PI);
                periodic = periodic.max((shifted - d).norm() / n as f64);
            }
        }
    }
    let params = json!({"n": ns, "random_points": xs.len(), "seed": s.seed});
    out.push(CheckRecord::at_most(
        "dirichlet_closed_form",
        &params,
        closed,
        1e-11,
    )?);
    out.push(CheckRecord::at_most(
        "dirichlet_periodicity",
        &params,
        periodic,
        1e-10,
    )?);

    let grid = uniform_grid(s.dirichlet_grid);
    out.push(CheckRecord::at_most(
        "dirichlet_bound",
        json!({"n": ns, "grid_points": grid.len()}),
        check_dirichlet_bound(&ns, &grid),
        PI + 1e-9,
    )?);

    let mut worst = 0.0f64;
    for n in [2, 5, 8] {
        for x in [0.0, 0.7] {
            worst = worst.max(reproducing_identity(n, x, -0.3).rel_error);
        }
    }
    out.push(CheckRecord::at_most(
        "reproducing_identity",
        json!({"n": [2, 5, 8], "x": [0.0, 0.7], "z": [-0.3]}),
        worst,
        1e-8,
    )?);

    let family_grid = uniform_grid(1000);
    out.push(CheckRecord::at_most(
        "l_bound_family",
        json!({"n": ns, "eta": [0.0, 0.5, 1.0], "grid_points": family_grid.len()}),
        check_l_bound_family(&ns, &family_grid, &[0.0, 0.5, 1.0]),
        1.0 + 1e-12,
    )?);

    let conv_grid = uniform_grid(s.convolution_grid);
    let conv_ns: Vec<usize> = ns.iter().copied().filter(|&n| n >= 4).collect();
    let values: Vec<f64> = conv_ns
        .iter()
        .map(|&n| check_l_convolution(n, &conv_grid))
        .collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    let non_growing = values
        .first()
        .zip(values.last())
        .is_some_and(|(a, b)| b <= a);
    out.push(CheckRecord::new(
        "l_convolution_normalized",
        json!({"n": conv_ns, "grid_points": conv_grid.len(), "per_n": values}),
        max,
        10.0,
        max <= 10.0 && non_growing,
    )?);
    Ok(())
}

fn representation_suite(s: &VerifySettings, out: &mut Vec<CheckRecord>) -> Result<()> {
    let quad = QuadConfig::default();
    let mut cache = CoeffCache::new();
    for (n, p) in [(2usize, 1usize), (3, 1), (2, 2)] {
        let pairs = power_pairs(s.representation_alpha, p)?;
        let r = representation_check_with(
            &pairs,
            n,
            Sampler::QuasiMc,
            s.representation_samples,
            s.seed,
            &quad,
            &mut cache,
        )?;
        let z = |est: f64, se: f64| (est - r.exact_trace).abs() / se.max(f64::MIN_POSITIVE);
        let stat =
            z(r.integral_estimate, r.estimate_stderr).max(z(r.x_form_estimate, r.x_form_stderr));
        out.push(CheckRecord::new(
            "trace_integral_representation",
            json!({"alpha": s.representation_alpha, "beta": s.representation_alpha, "check": r}),
            stat,
            3.0,
            r.pass,
        )?);
    }
    let c = SymbolSpec::constant();
    let pairs = SymbolPairSet::repeated(c.clone(), c, 1)?;
    let r = representation_check_with(
        &pairs,
        2,
        Sampler::TensorGrid,
        s.grid_nodes,
        s.seed,
        &quad,
        &mut cache,
    )?;
    let want = 2.0 * (2.0 * PI).powi(2);
    let rel = ((r.integral_estimate - want).abs()).max((r.x_form_estimate - want).abs()) / want;
    out.push(CheckRecord::at_most(
        "trace_integral_representation_constant",
        json!({"analytic": want, "check": r}),
        rel,
        1e-6,
    )?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn light_suite_passes() {
        let s = VerifySettings {
            dirichlet_max_n: 64,
            dirichlet_grid: 500,
            sandwich_samples: 2000,
            lemma3_samples: 2000,
            representation_samples: 1 << 15,
            parts_samples: 128_000,
            parts_n: vec![16, 32, 64, 128],
            ..VerifySettings::default()
        };
        let records = run_suites(&s).unwrap();
        assert!(records.len() >= 6);
        for r in &records {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn settings_reject_unknown_keys() {
        let ok: VerifySettings = serde_json::from_str(r#"{"seed": 3}"#).unwrap();
        assert_eq!(ok.seed, 3);
        assert_eq!(ok.c, 2.0);
        assert!(serde_json::from_str::<VerifySettings>(r#"{"sed": 3}"#).is_err());
    }
}
