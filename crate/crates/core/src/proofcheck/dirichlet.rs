//! The kernel `D_n(x) = Σ_{t=1}^n e^{ixt}` and its majorant
//! `L_n(x) = min(1/|x|, n)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::quadrature::GaussLegendre;
use crate::symbols::reduce_angle;

/// Closed form `e^{i(n+1)x/2} sin(nx/2) / sin(x/2)`, equal to `n` at `x ≡ 0`.
pub fn dirichlet_eval(n: usize, x: f64) -> Complex64 {
    let r = reduce_angle(x);
    let half = 0.5 * r;
    let s = half.sin();
    if s == 0.0 {
        return Complex64::new(n as f64, 0.0);
    }
    let amplitude = (n as f64 * half).sin() / s;
    Complex64::from_polar(amplitude, (n as f64 + 1.0) * half)
}

/// Term-by-term summation. Slow; used to cross-check the closed form.
///
/// The rounding error of each product `t·x` is recovered with an FMA and
/// applied as a first-order phase correction, and the terms are summed with
/// Neumaier compensation, so the result is accurate to a few ulps of `n`
/// rather than drifting by `n·|x|·eps` per term.
pub fn dirichlet_direct(n: usize, x: f64) -> Complex64 {
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    for t in 1..=n {
        let tf = t as f64;
        let a = x * tf;
        let da = x.mul_add(tf, -a);
        let (s, c) = a.sin_cos();
        re.add(c - s * da);
        im.add(s + c * da);
    }
    Complex64::new(re.total(), im.total())
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        self.comp += if self.sum.abs() >= v.abs() {
            (self.sum - t) + v
        } else {
            (v - t) + self.sum
        };
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn l_bound(n: usize, x: f64) -> f64 {
    let ax = x.abs();
    let nf = n as f64;
    if ax * nf <= 1.0 {
        nf
    } else {
        1.0 / ax
    }
}

/// `max |D_n(x)| / L_n(x)` over the grid.
pub fn check_dirichlet_bound(n_list: &[usize], x_grid: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &n in n_list {
        for &x in x_grid {
            worst = worst.max(dirichlet_eval(n, x).norm() / l_bound(n, x));
        }
    }
    worst
}

/// `max L_n(x) / min{n, 2n/(1+n|x|), n^η |x|^(η-1)}` over `η` and the grid.
/// Values ≤ 1 confirm the bound family.
pub fn check_l_bound_family(n_list: &[usize], x_grid: &[f64], etas: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &n in n_list {
        let nf = n as f64;
        for &x in x_grid {
            let ax = x.abs();
            let l = l_bound(n, x);
            for &eta in etas {
                let mut bound = nf.min(2.0 * nf / (1.0 + nf * ax));
                if ax > 0.0 {
                    bound = bound.min(nf.powf(eta) * ax.powf(eta - 1.0));
                }
                worst = worst.max(l / bound);
            }
        }
    }
    worst
}

/// How one factor of `L_n` behaves on an interval: constant `n`, or
/// `1/|w|` where `w` keeps the recorded sign.
#[derive(Clone, Copy)]
enum Piece {
    Flat,
    Reciprocal(f64),
}

fn classify(n: usize, w: f64) -> Piece {
    if w.abs() * n as f64 <= 1.0 {
        Piece::Flat
    } else {
        Piece::Reciprocal(w.signum())
    }
}

/// `∫_a^b dy / (s1 y · s2 (z - y))`, with both factors of fixed sign.
fn reciprocal_product(s1: f64, s2: f64, z: f64, a: f64, b: f64) -> f64 {
    let ss = s1 * s2;
    if z == 0.0 {
        // 1/(y (0 - y)) = -1/y²
        return -ss * (1.0 / a - 1.0 / b);
    }
    // (1/z)[ln|y/(z-y)|]_a^b = (1/z)[ln|1 - z/a| - ln|1 - z/b|]
    let term = |y: f64| {
        let q = -z / y;
        if q.abs() < 0.5 {
            q.ln_1p()
        } else {
            (1.0 + q).abs().ln()
        }
    };
    ss * (term(a) - term(b)) / z
}

/// `∫_Π L_n(x - y) L_n(y) dy`, integrated exactly piece by piece.
///
/// `L_n` is taken literally as `min(1/|w|, n)` on the real line, so `x - y`
/// is not reduced modulo `2π`. [`l_convolution_periodic`] reduces it.
pub fn l_convolution(n: usize, x: f64) -> f64 {
    convolve(n, x, &[0.0])
}

/// As [`l_convolution`] with the first factor evaluated at `x - y` reduced
/// to `Π`, i.e. the majorant of the periodic kernel.
pub fn l_convolution_periodic(n: usize, x: f64) -> f64 {
    convolve(n, x, &[-1.0, 0.0, 1.0])
}

fn convolve(n: usize, x: f64, shifts: &[f64]) -> f64 {
    let nf = n as f64;
    let inv = 1.0 / nf;
    let mut cuts = vec![-PI, PI, 0.0, -inv, inv];
    for &k in shifts {
        let z = x - 2.0 * PI * k;
        cuts.extend([z, z - inv, z + inv, z - PI, z + PI]);
    }
    cuts.retain(|c| (-PI..=PI).contains(c));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        // shift z so that z - y lies in Π across the whole interval
        let z = if shifts.len() == 1 {
            x
        } else {
            x - 2.0 * PI * ((x - mid) / (2.0 * PI)).round()
        };
        let own = classify(n, mid);
        let other = classify(n, z - mid);
        total += match (own, other) {
            (Piece::Flat, Piece::Flat) => nf * nf * (b - a),
            (Piece::Reciprocal(s1), Piece::Flat) => nf * s1 * (b.abs().ln() - a.abs().ln()),
            (Piece::Flat, Piece::Reciprocal(s2)) => {
                nf * s2 * ((z - a).abs().ln() - (z - b).abs().ln())
            }
            (Piece::Reciprocal(s1), Piece::Reciprocal(s2)) => reciprocal_product(s1, s2, z, a, b),
        };
    }
    total
}

/// `max_x ∫ L_n(x-y) L_n(y) dy / (L_n(x) log n)`.
pub fn check_l_convolution(n: usize, x_grid: &[f64]) -> f64 {
    normalized_max(n, x_grid, l_convolution)
}

pub fn check_l_convolution_periodic(n: usize, x_grid: &[f64]) -> f64 {
    normalized_max(n, x_grid, l_convolution_periodic)
}

fn normalized_max(n: usize, x_grid: &[f64], conv: fn(usize, f64) -> f64) -> f64 {
    assert!(n >= 2, "log n must be positive");
    let log_n = (n as f64).ln();
    x_grid
        .iter()
        .map(|&x| conv(n, x) / (l_bound(n, x) * log_n))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproducingCheck {
    pub n: usize,
    pub x: f64,
    pub z: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_error: f64,
}

/// `(1/2π) ∫_Π D_n(x-y) D_n(y-z) dy` against `D_n(x-z)`, by composite
/// Gauss–Legendre with `n + 2` panels of 16 nodes.
pub fn reproducing_identity(n: usize, x: f64, z: f64) -> ReproducingCheck {
    let gl = GaussLegendre::new(16);
    let panels = n + 2;
    let h = 2.0 * PI / panels as f64;
    let mut lhs = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let a = -PI + k as f64 * h;
        for (y, w) in gl.mapped(a, a + h) {
            lhs += dirichlet_eval(n, x - y) * dirichlet_eval(n, y - z) * w;
        }
    }
    lhs /= 2.0 * PI;
    let rhs = dirichlet_eval(n, x - z);
    ReproducingCheck {
        n,
        x,
        z,
        lhs,
        rhs,
        rel_error: (lhs - rhs).norm() / rhs.norm(),
    }
}

/// `n_points` equally spaced points covering `[-π, π]`.
pub fn uniform_grid(n_points: usize) -> Vec<f64> {
    let step = 2.0 * PI / (n_points - 1) as f64;
    (0..n_points).map(|i| -PI + i as f64 * step).collect()
}

pub fn dyadic_up_to(max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |n| Some(n * 2))
        .take_while(|&n| n <= max)
        .collect()
}
