//! The comparison inequality ϑ(t)/k ≥ α(c) + β(c)(1 - t^N)^{k/N} and the
//! ingredients of its proof: relative convexity of g(z) = ϑ(√z)/k, the
//! series coefficient comparison, and the elementary inequalities used along
//! the way.

use crate::error::{Error, Result};
use crate::kernel::{d_constant, Kernel};
use crate::specfun::Hyp2F1;
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance separating the Newtonian exponent from nearby k.
const NEWTONIAN_EPS: f64 = 1e-12;

fn is_newtonian(n: usize, k: f64) -> bool {
    (k - (2.0 - n as f64)).abs() < NEWTONIAN_EPS
}

/// (α(c), β(c)) with
/// α = ϑ(c)/k + c^{1-N}(1 - c^N) ϑ'(c)/k², β = -c^{1-N}(1 - c^N)^{1-k/N} ϑ'(c)/k².
pub fn alpha_beta(ker: &Kernel, c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("c = {c} outside (0, 1)")));
    }
    let n = ker.dim();
    let nf = n as f64;
    let k = ker.k();
    let th = ker.theta(c)?;
    let dth = if is_newtonian(n, k) { 0.0 } else { ker.theta_prime(c)? };
    let cn = c.powi(n as i32);
    let lead = c.powf(1.0 - nf) * dth / (k * k);
    Ok((th / k + lead * (1.0 - cn), -lead * (1.0 - cn).powf(1.0 - k / nf)))
}

/// ϑ(t)/k - α(c) - β(c)(1 - t^N)^{k/N}.
pub fn comparison_residual(ker: &Kernel, t: f64, c: f64) -> Result<f64> {
    let (a, b) = alpha_beta(ker, c)?;
    Ok(ker.theta(t)? / ker.k() - tangent(ker, a, b, t))
}

fn tangent(ker: &Kernel, alpha: f64, beta: f64, t: f64) -> f64 {
    let nf = ker.dim() as f64;
    alpha + beta * (1.0 - t.powi(ker.dim() as i32)).powf(ker.k() / nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub t: f64,
    pub c: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub k: f64,
    pub resolution: usize,
    pub tol: f64,
    /// interior lattice i/(resolution+1), shared by t and c
    pub grid: Vec<f64>,
    /// residuals[ic * resolution + it]
    #[serde(skip)]
    pub residuals: Vec<f64>,
    pub violations: Vec<Violation>,
    pub min_residual: f64,
    /// largest |residual| on the diagonal t = c
    pub tangency_error: f64,
    /// t above this value is not evaluated
    pub excluded_above: f64,
    pub excluded_points: usize,
}

impl ScanReport {
    pub fn residual(&self, it: usize, ic: usize) -> f64 {
        self.residuals[ic * self.resolution + it]
    }
}

/// Residual lattice over (t, c) ∈ (0,1)².
pub fn scan(n: usize, k: f64, resolution: usize, tol: f64) -> Result<ScanReport> {
    if resolution < 16 {
        return Err(Error::InvalidParams(format!("resolution {resolution} < 16")));
    }
    let ker = Kernel::new(n, k)?;
    let grid: Vec<f64> = (1..=resolution).map(|i| i as f64 / (resolution + 1) as f64).collect();
    let cutoff = 1.0 - 1.0 / (4.0 * resolution as f64);
    let theta_k: Vec<Option<f64>> = grid
        .iter()
        .map(|&t| if t > cutoff { Ok(None) } else { ker.theta(t).map(|v| Some(v / k)) })
        .collect::<Result<_>>()?;
    let coeffs: Vec<(f64, f64)> = grid.iter().map(|&c| alpha_beta(&ker, c)).collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = coeffs
        .par_iter()
        .map(|&(a, b)| {
            theta_k
                .iter()
                .zip(&grid)
                .map(|(th, &t)| match th {
                    Some(v) => v - tangent(&ker, a, b, t),
                    None => f64::NAN,
                })
                .collect()
        })
        .collect();
    let mut violations = Vec::new();
    let mut min_residual = f64::INFINITY;
    let mut tangency_error: f64 = 0.0;
    let mut excluded = 0;
    for (ic, row) in rows.iter().enumerate() {
        for (it, &r) in row.iter().enumerate() {
            if r.is_nan() {
                excluded += 1;
                continue;
            }
            min_residual = min_residual.min(r);
            if it == ic {
                tangency_error = tangency_error.max(r.abs());
            }
            if r < -tol {
                violations.push(Violation {
                    t: grid[it],
                    c: grid[ic],
                    residual: r,
                });
            }
        }
    }
    Ok(ScanReport {
        n,
        k,
        resolution,
        tol,
        grid,
        residuals: rows.concat(),
        violations,
        min_residual,
        tangency_error,
        excluded_above: cutoff,
        excluded_points: excluded,
    })
}

/// ϑ/k and tangent curves for a few contact points, on a uniform interior t-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentTable {
    pub contacts: Vec<f64>,
    /// (t, ϑ(t)/k, tangent values in `contacts` order)
    pub rows: Vec<(f64, f64, Vec<f64>)>,
}

impl TangentTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,theta_over_k");
        for c in &self.contacts {
            out.push_str(&format!(",tangent_c{c}"));
        }
        out.push('\n');
        for (t, th, tans) in &self.rows {
            out.push_str(&format!("{t:.16e},{th:.16e}"));
            for v in tans {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Points where a tangent rises above the curve by more than `tol`.
    pub fn violations(&self, tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        for (t, th, tans) in &self.rows {
            for (c, v) in self.contacts.iter().zip(tans) {
                let r = th - v;
                if r < -tol {
                    out.push(Violation { t: *t, c: *c, residual: r });
                }
            }
        }
        out
    }
}

pub fn tangent_table(n: usize, k: f64, contacts: &[f64], points: usize) -> Result<TangentTable> {
    let ker = Kernel::new(n, k)?;
    let coeffs: Vec<(f64, f64)> = contacts.iter().map(|&c| alpha_beta(&ker, c)).collect::<Result<_>>()?;
    let rows = (1..=points)
        .map(|i| {
            let t = i as f64 / (points + 1) as f64;
            let th = ker.theta(t)? / k;
            let tans = coeffs.iter().map(|&(a, b)| tangent(&ker, a, b, t)).collect();
            Ok((t, th, tans))
        })
        .collect::<Result<_>>()?;
    Ok(TangentTable {
        contacts: contacts.to_vec(),
        rows,
    })
}

/// g(z) = (d_N/k) F(ā, b̄; c̄; z) and its first two derivatives, with
/// ā = -k/2, b̄ = 1 - (k+N)/2, c̄ = N/2.
pub struct RelativeConvexity {
    n: usize,
    k: f64,
    scale: f64,
    f0: Hyp2F1,
    f1: Hyp2F1,
    f2: Hyp2F1,
    d1: f64,
    d2: f64,
}

impl RelativeConvexity {
    pub fn new(n: usize, k: f64) -> Result<Self> {
        let nf = n as f64;
        let (a, b, c) = (-k / 2.0, 1.0 - (k + nf) / 2.0, nf / 2.0);
        let d1 = a * b / c;
        let d2 = d1 * (a + 1.0) * (b + 1.0) / (c + 1.0);
        Ok(RelativeConvexity {
            n,
            k,
            scale: d_constant(n) / k,
            f0: Hyp2F1::new(a, b, c)?,
            f1: Hyp2F1::new(a + 1.0, b + 1.0, c + 1.0)?,
            f2: Hyp2F1::new(a + 2.0, b + 2.0, c + 2.0)?,
            d1,
            d2,
        })
    }

    pub fn g(&self, z: f64) -> Result<f64> {
        Ok(self.scale * self.f0.eval(z)?)
    }

    pub fn g_prime(&self, z: f64) -> Result<f64> {
        Ok(self.scale * self.d1 * self.f1.eval(z)?)
    }

    pub fn g_second(&self, z: f64) -> Result<f64> {
        Ok(self.scale * self.d2 * self.f2.eval(z)?)
    }

    /// (1 - z) g'' - (1 - k/N) g'; nonnegative for k ∈ (-N, 2-N).
    pub fn residual(&self, z: f64) -> Result<f64> {
        let nf = self.n as f64;
        Ok((1.0 - z) * self.g_second(z)? - (1.0 - self.k / nf) * self.g_prime(z)?)
    }

    /// z g'' - (k/2 - 1 + ((N-k)/2)/(1 - z^{N/2})) g', the exact criterion for
    /// convexity of g relative to (1 - z^{N/2})^{k/N}.
    pub fn exact_criterion(&self, z: f64) -> Result<f64> {
        let nf = self.n as f64;
        let k = self.k;
        let w = z.powf(nf / 2.0);
        let coef = k / 2.0 - 1.0 + (nf - k) / 2.0 / (1.0 - w);
        Ok(z * self.g_second(z)? - coef * self.g_prime(z)?)
    }
}

pub fn relative_convexity_residual(n: usize, k: f64, z: f64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Domain(format!("z = {z} outside (0, 1)")));
    }
    RelativeConvexity::new(n, k)?.residual(z)
}

/// Term-by-term comparison (ā+1+n)(b̄+1+n) ≤ (1 - k/N + n)(c̄+1+n) for n ≤ n_max,
/// together with the signs of the two coefficients of the expansion in n.
pub fn series_coefficient_check(n: usize, k: f64, n_max: usize) -> bool {
    let nf = n as f64;
    if n < 3 || !(k > -nf && k < 2.0 - nf) {
        return false;
    }
    let (a, b, c) = (-k / 2.0, 1.0 - (k + nf) / 2.0, nf / 2.0);
    let slope = a + b - c + k / nf;
    let intercept = (a + 1.0) * (b + 1.0) - (c + 1.0) * (1.0 - k / nf);
    let slope_closed = (nf + k) * (1.0 - nf) / nf;
    let intercept_closed = (nf + k) * (k / 4.0 + 1.0 / nf - 1.0);
    let scale = 1.0 + slope.abs() + intercept.abs();
    if (slope - slope_closed).abs() > 1e-12 * scale || (intercept - intercept_closed).abs() > 1e-12 * scale {
        return false;
    }
    if !(slope_closed < 0.0 && intercept_closed < 0.0) {
        return false;
    }
    (0..=n_max).all(|i| {
        let j = i as f64;
        (a + 1.0 + j) * (b + 1.0 + j) <= (1.0 - k / nf + j) * (c + 1.0 + j)
    })
}

/// N/(1 - t^N) - 2/(1 - t²) - (N-2)/2.
pub fn sharp_n_inequality(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    nf / (1.0 - t.powi(n as i32)) - 2.0 / (1.0 - t * t) - (nf - 2.0) / 2.0
}

/// u(t) = N(1 - t²) - 2(1 - t^N) - ((N-2)/2)(1 - t²)(1 - t^N).
pub fn sharp_n_polynomial(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let (a, b) = (1.0 - t * t, 1.0 - t.powi(n as i32));
    nf * a - 2.0 * b - (nf - 2.0) / 2.0 * a * b
}

/// Two-dimensional decoupling bound: with w = (1-u)/(1-c²u),
/// w((1-u)/w)^{k/2} + (1-w)((1-t²)u/(1-w))^{k/2} - [1 - u + (1-t²)u]^{k/2} ≥ 0.
pub fn n2_decoupling_residual(k: f64, u: f64, t: f64, c: f64) -> f64 {
    let e = k / 2.0;
    let w = (1.0 - u) / (1.0 - c * c * u);
    let lhs = (1.0 - u + (1.0 - t * t) * u).powf(e);
    let rhs = w * ((1.0 - u) / w).powf(e) + (1.0 - w) * ((1.0 - t * t) * u / (1.0 - w)).powf(e);
    rhs - lhs
}
