//! Partial sums, the sets `W_j` and the sandwich chain on `W^c`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};

/// Points with `|x_1|` below this are rejected by the samplers.
pub const HYPERPLANE_CUTOFF: f64 = 1e-12;

/// Acceptance below this rate aborts a rejection sampler.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainPoint {
    x: Vec<f64>,
    partial_sums: Vec<f64>,
    c: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WMembership {
    pub in_w: bool,
    /// 1-based indices `j` with the point in `W_j`.
    pub members: Vec<usize>,
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 1.0 {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!(
            "c > 1 required, got {c}"
        )))
    }
}

impl DomainPoint {
    pub fn new(x: Vec<f64>, c: f64) -> Result<Self> {
        check_c(c)?;
        if x.len() < 2 || !x.len().is_multiple_of(2) {
            return Err(LabError::InvalidArgument(format!(
                "point needs an even number ≥ 2 of coordinates, got {}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidArgument("non-finite coordinate".into()));
        }
        let partial_sums = x
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        Ok(DomainPoint { x, partial_sums, c })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn p(&self) -> usize {
        self.x.len() / 2
    }

    pub fn c_minus(&self) -> f64 {
        1.0 - 1.0 / self.c
    }

    pub fn c_plus(&self) -> f64 {
        1.0 + 1.0 / self.c
    }
}

/// Index `j` (0-based) membership in `W_{j+1}`.
fn member(x: &[f64], sums: &[f64], c: f64, j: usize) -> bool {
    let m = x.len();
    if j + 1 < m {
        sums[j].abs() <= c * x[j + 1].abs()
    } else {
        sums[m - 1].abs() <= c * (sums[m - 1] - x[0]).abs()
    }
}

pub fn in_domain_w(point: &DomainPoint) -> WMembership {
    let members: Vec<usize> = (0..point.x.len())
        .filter(|&j| member(&point.x, &point.partial_sums, point.c, j))
        .map(|j| j + 1)
        .collect();
    WMembership {
        in_w: !members.is_empty(),
        members,
    }
}

/// `c_- |x̄_{j-1}| ≤ |x̄_j| ≤ c_+ |x̄_{j-1}|` for `j = 2..2p`. Meant for points
/// outside `W`; on other points the value carries no guarantee.
pub fn check_sandwich(point: &DomainPoint) -> bool {
    let (lo, hi) = (point.c_minus(), point.c_plus());
    point.partial_sums.windows(2).all(|w| {
        let (prev, cur) = (w[0].abs(), w[1].abs());
        lo * prev <= cur && cur <= hi * prev
    })
}

/// Allocation-free test used by the samplers.
pub(crate) fn in_w_raw(x: &[f64], sums: &mut [f64], c: f64) -> bool {
    let mut acc = 0.0;
    for (s, v) in sums.iter_mut().zip(x) {
        acc += v;
        *s = acc;
    }
    (0..x.len()).any(|j| member(x, sums, c, j))
}

/// Uniform draws on `Π^{2p} ∩ W^c ∩ {|x_1| ≥ 1e-12}` by rejection.
pub struct ComplementSampler {
    rng: ChaCha8Rng,
    c: f64,
    x: Vec<f64>,
    sums: Vec<f64>,
    draws: u64,
    accepted: u64,
}

impl ComplementSampler {
    pub fn new(p: usize, c: f64, seed: u64) -> Result<Self> {
        check_c(c)?;
        if p == 0 {
            return Err(LabError::InvalidArgument("p ≥ 1 required".into()));
        }
        Ok(ComplementSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            c,
            x: vec![0.0; 2 * p],
            sums: vec![0.0; 2 * p],
            draws: 0,
            accepted: 0,
        })
    }

    /// Next accepted point, as a borrowed coordinate slice.
    pub fn next_point(&mut self) -> Result<&[f64]> {
        loop {
            self.draws += 1;
            for v in self.x.iter_mut() {
                *v = PI * (2.0 * self.rng.random::<f64>() - 1.0);
            }
            if self.x[0].abs() >= HYPERPLANE_CUTOFF && !in_w_raw(&self.x, &mut self.sums, self.c) {
                self.accepted += 1;
                return Ok(&self.x);
            }
            if self.draws >= 100_000 && self.acceptance() < MIN_ACCEPTANCE {
                return Err(LabError::RejectionStarved {
                    acceptance: self.acceptance(),
                });
            }
        }
    }

    pub fn acceptance(&self) -> f64 {
        if self.draws == 0 {
            1.0
        } else {
            self.accepted as f64 / self.draws as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub p: usize,
    pub c: f64,
    pub samples: usize,
    pub failures: usize,
    pub acceptance: f64,
}

/// Draws `samples` points of `W^c` and counts sandwich failures.
pub fn sandwich_sweep(p: usize, c: f64, samples: usize, seed: u64) -> Result<SandwichReport> {
    let mut sampler = ComplementSampler::new(p, c, seed)?;
    let mut failures = 0;
    for _ in 0..samples {
        let x = sampler.next_point()?.to_vec();
        if !check_sandwich(&DomainPoint::new(x, c)?) {
            failures += 1;
        }
    }
    Ok(SandwichReport {
        p,
        c,
        samples,
        failures,
        acceptance: sampler.acceptance(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: &[f64]) -> DomainPoint {
        DomainPoint::new(x.to_vec(), 2.0).unwrap()
    }

    #[test]
    fn membership_examples() {
        let m = in_domain_w(&pt(&[1.0, 1.0]));
        assert!(m.in_w && m.members.contains(&1));
        let m = in_domain_w(&pt(&[1.0, 0.1]));
        assert!(!m.in_w && m.members.is_empty());
        assert!(in_domain_w(&pt(&[0.1, 1.0])).members.contains(&1));
    }

    #[test]
    fn sandwich_examples() {
        let p = pt(&[1.0, 0.1]);
        assert_eq!((p.c_minus(), p.c_plus()), (0.5, 1.5));
        assert!(check_sandwich(&p));
        // inside W the call still returns a value
        let _ = check_sandwich(&pt(&[1.0, 1.0]));
    }

    #[test]
    fn invalid_points() {
        assert!(DomainPoint::new(vec![1.0, 2.0], 1.0).is_err());
        assert!(DomainPoint::new(vec![1.0], 2.0).is_err());
        assert!(DomainPoint::new(vec![1.0, 2.0, 3.0], 2.0).is_err());
        assert!(DomainPoint::new(vec![f64::NAN, 2.0], 2.0).is_err());
        assert!(ComplementSampler::new(1, 0.5, 0).is_err());
    }

    #[test]
    fn partial_sums_accumulate() {
        let p = pt(&[0.5, -1.0, 2.0, 0.25]);
        assert_eq!(p.partial_sums(), &[0.5, -0.5, 1.5, 1.75]);
        assert_eq!(p.p(), 2);
    }

    #[test]
    fn sampler_is_seeded_and_lands_in_complement() {
        let mut a = ComplementSampler::new(2, 2.0, 11).unwrap();
        let mut b = ComplementSampler::new(2, 2.0, 11).unwrap();
        for _ in 0..200 {
            let xa = a.next_point().unwrap().to_vec();
            assert_eq!(xa, b.next_point().unwrap());
            assert!(!in_domain_w(&pt(&xa)).in_w);
        }
        let r = sandwich_sweep(1, 2.0, 2000, 3).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.acceptance > 0.1 && r.acceptance < 0.3);
    }

    #[test]
    fn starved_sampler_errors() {
        // nearly every point satisfies |x̄_j| ≤ c |x_{j+1}| for huge c
        let mut s = ComplementSampler::new(3, 1e6, 1).unwrap();
        assert!(matches!(
            s.next_point(),
            Err(LabError::RejectionStarved { .. })
        ));
    }

    proptest! {
        #[test]
        fn complement_points_satisfy_sandwich(
            x in prop::collection::vec(-PI..PI, 2..=6usize),
            c in 1.01f64..10.0,
        ) {
            let mut x = x;
            if x.len() % 2 == 1 { x.pop(); }
            let p = DomainPoint::new(x, c).unwrap();
            let m = in_domain_w(&p);
            prop_assert_eq!(m.in_w, !m.members.is_empty());
            if !m.in_w {
                prop_assert!(check_sandwich(&p));
            }
        }
    }
}
