//! Test-only oracles, independent of the library's quadrature path.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Gauss–Kronrod 7/15 on [a, b]: (kronrod, |kronrod - gauss|, ∫|f| estimate).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let (f1, f2) = (f(c - h * XGK[i]), f(c + h * XGK[i]));
        k += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h)
}

/// Adaptive bisection with Gauss–Kronrod 7/15 panels. Intervals are split
/// until the local error is below `tol * ∫|f| * width / (b - a)`.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let pieces = 64;
    let w = (b - a) / pieces as f64;
    let mass: f64 = (0..pieces)
        .map(|i| gk15(f, a + i as f64 * w, a + (i + 1) as f64 * w).2)
        .sum();
    let budget = tol * mass.max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut stack: Vec<(f64, f64, u32)> = (0..pieces)
        .rev()
        .map(|i| (a + i as f64 * w, a + (i + 1) as f64 * w, 0))
        .collect();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (k, err, _) = gk15(f, lo, hi);
        if err <= budget * (hi - lo) / (b - a) || depth >= 60 {
            // Kahan summation of accepted pieces
            let y = k - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// `∫_0^π f(x) dx` for `f ~ x^(-s)`, after `x = π u^m`, `m = 1/(1-s)`,
/// which leaves a bounded integrand on `[0, 1]`.
pub fn singular_oracle(f: &dyn Fn(f64) -> f64, s: f64) -> f64 {
    let m = 1.0 / (1.0 - s.max(0.0));
    let g = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let x = PI * u.powf(m);
        f(x) * PI * m * u.powf(m - 1.0)
    };
    adaptive(&g, 0.0, 1.0, 1e-14)
}

/// `ĥ(τ) = 2π γ(τ)` for the FARIMA(0, d, 0) symbol `(2 sin(|x|/2))^(-2d)`,
/// where `γ` is the unit-innovation autocovariance.
pub fn farima_coefficient(d: f64, tau: u64) -> f64 {
    use statrs::function::gamma::{gamma, ln_gamma};
    let t = tau as f64;
    let gamma0 = gamma(1.0 - 2.0 * d) / gamma(1.0 - d).powi(2);
    let ratio = (ln_gamma(t + d) - ln_gamma(t + 1.0 - d)).exp() * gamma(1.0 - d) / gamma(d);
    let rho = if tau == 0 { 1.0 } else { ratio };
    2.0 * PI * gamma0 * rho
}

/// `Σ_{|k|<n} (n - |k|) ĝ(k) ĥ(k)`, the trace of `T_n(g) T_n(h)`.
pub fn trace_p1_by_lags(g: &[f64], h: &[f64], n: usize) -> f64 {
    let mut s = n as f64 * g[0] * h[0];
    for k in 1..n {
        s += 2.0 * (n - k) as f64 * g[k] * h[k];
    }
    s
}

/// Dense `n × n` Toeplitz matrix from lags.
pub fn dense_toeplitz(c: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| c[i.abs_diff(j)]).collect())
        .collect()
}

pub fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
