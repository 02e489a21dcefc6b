//! Numerical integration rules shared by the kernel, potential and energy layers.
//!
//! Three rules are provided: fixed Gauss–Legendre for smooth integrands on
//! well-separated cells, adaptive Gauss–Kronrod (7/15) for general use, and
//! tanh-sinh for integrands with algebraic endpoint singularities.

use crate::error::{Error, Result};

/// Fixed-order Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Quadrature points and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * half, ((rk - rg) * half).abs())
}

/// Tolerances for the adaptive rule.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-12,
            abs: 1e-300,
            max_intervals: 2000,
        }
    }
}

/// Adaptive Gauss–Kronrod 7/15 integration of `f` over [a, b].
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    intervals.push((a, b, v, e));
    let mut total = v;
    let mut err = e;
    loop {
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= tol.max_intervals {
            // Accept when the remaining error is dominated by rounding.
            if err <= 1e3 * f64::EPSILON * total.abs().max(tol.abs) {
                return Ok(total);
            }
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
            });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        if err < 0.0 {
            err = intervals.iter().map(|x| x.3).sum();
        }
    }
}

/// Integrate `x^(p-1) g(x)` over [0, h] for smooth `g`, removing the endpoint
/// singularity by the substitution x = (p w)^(1/p) when p < 1.
pub fn power_weighted_left<F: FnMut(f64) -> f64>(
    mut g: F,
    p: f64,
    h: f64,
    tol: Tolerance,
) -> Result<f64> {
    if p < 1.0 {
        let top = h.powf(p) / p;
        adaptive(|w| g((p * w).powf(1.0 / p)), 0.0, top, tol)
    } else {
        adaptive(|x| x.powf(p - 1.0) * g(x), 0.0, h, tol)
    }
}

/// Tanh-sinh rule on [a, b]. The integrand receives `(x, x - a, b - x)` so that
/// distances to the endpoints keep full relative precision.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    let tmax = 5.0;
    let hp = std::f64::consts::FRAC_PI_2;
    let mut eval = |t: f64| -> f64 {
        let u = hp * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // distance of tanh(u) from the nearer endpoint of [-1, 1]
        let near = 2.0 * e / (1.0 + e);
        let ch = u.cosh();
        let w = hp * t.cosh() / (ch * ch);
        if w == 0.0 || near == 0.0 {
            return 0.0;
        }
        let (da, db) = if u > 0.0 {
            (half * (2.0 - near), half * near)
        } else {
            (half * near, half * (2.0 - near))
        };
        let x = if u > 0.0 { b - db } else { a + da };
        let v = f(x, da, db);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut j = 1;
    while (j as f64) * h <= tmax {
        let t = j as f64 * h;
        sum += eval(t) + eval(-t);
        j += 1;
    }
    let mut prev = sum * h;
    for _level in 0..9 {
        h *= 0.5;
        let mut add = 0.0;
        let mut j = 1;
        while (j as f64) * h <= tmax {
            let t = j as f64 * h;
            add += eval(t) + eval(-t);
            j += 2;
        }
        sum += add;
        let cur = sum * h;
        if (cur - prev).abs() <= rel_tol * cur.abs() || cur == 0.0 {
            return Ok(cur * half);
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        estimate: prev * half,
        error: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_smooth_and_peaked() {
        let v = adaptive(|x| x.exp(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
        let v = adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn power_weighted_beta_integral() {
        // B(0.3, 2) = 1/(0.3 * 1.3)
        let v = power_weighted_left(|x| 1.0 - x, 0.3, 1.0, Tolerance::default()).unwrap();
        assert!((v - 1.0 / (0.3 * 1.3)).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // B(0.25, 0.5)
        let v = tanh_sinh(|_, da, db| da.powf(-0.75) * db.powf(-0.5), 0.0, 1.0, 1e-13).unwrap();
        let exact = 5.244_115_108_584_239_6;
        assert!((v - exact).abs() < 1e-10 * exact, "{v}");
    }
}
