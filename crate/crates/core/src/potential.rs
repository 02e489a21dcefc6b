//! The mean-field potential W_k ∗ ρ of a piecewise-constant radial density.
//!
//! Pointwise values use the split formula
//! |x|^k ∗ ρ (r) = r^k ∫₀^r ϑ(η/r) ρ η^{N-1} dη + ∫_r^∞ η^k ϑ(r/η) ρ η^{N-1} dη.
//! Cells inside r are integrated in closed form through the shell integral of ϑ;
//! cells outside r use Gauss–Legendre, or tanh-sinh when they touch r.
//!
//! [`CellIntegrals`] holds the cell-pair integrals
//! A_ij = ∫_{cell i} ∫_{cell j} Θ(r, η) η^{N-1} r^{N-1} dη dr,
//! from which cell averages of the potential and the interaction energy of any
//! density on the same grid follow exactly.

use crate::density::RadialDensity;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, ModelParams};
use crate::quad::{self, GaussLegendre, Tolerance};
use rayon::prelude::*;

const PAIR_ORDER: usize = 10;
const OUTER_ORDER: usize = 12;
const TS_TOL: f64 = 1e-12;

/// Potential values on a set of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// ∫_{η1}^{η2} η^{k+N-1} ϑ(r/η) dη for r ≤ η1.
fn outer_cell(ker: &Kernel, r: f64, eta1: f64, eta2: f64, gl: &GaussLegendre) -> Result<f64> {
    let n = ker.dim() as f64;
    let k = ker.k();
    let p = k + n - 1.0;
    if r == 0.0 {
        return Ok(ker.d_n() * (eta2.powf(k + n) - eta1.powf(k + n)) / (k + n));
    }
    let gap = eta1 - r;
    if gap >= eta2 - eta1 {
        let mut s = 0.0;
        for (eta, w) in gl.mapped(eta1, eta2) {
            s += w * eta.powf(p) * ker.theta_c(r / eta, (eta - r) / eta)?;
        }
        return Ok(s);
    }
    let mut err = None;
    let v = quad::tanh_sinh(
        |eta, da, _| {
            let d = gap + da;
            match ker.theta_c(r / eta, d / eta) {
                Ok(t) => eta.powf(p) * t,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            }
        },
        eta1,
        eta2,
        TS_TOL,
    )?;
    match err {
        Some(e) if !v.is_finite() => Err(e),
        _ => Ok(v),
    }
}

/// |x|^k ∗ ρ at radius r.
pub fn riesz_at(ker: &Kernel, rho: &RadialDensity, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius {r} must be >= 0")));
    }
    let n = ker.dim() as f64;
    let k = ker.k();
    let gl = GaussLegendre::new(OUTER_ORDER);
    let grid = rho.grid();
    let vals = rho.values();
    let mut inner = 0.0;
    let mut outer = 0.0;
    let shell_one = if r > 0.0 { ker.shell(1.0)? } else { 0.0 };
    for j in 0..rho.cells() {
        let v = vals[j];
        if v == 0.0 {
            continue;
        }
        let (lo, hi) = (grid[j], grid[j + 1]);
        if hi <= r {
            let s_hi = ker.shell_c(hi / r, (r - hi) / r)?;
            let s_lo = ker.shell_c(lo / r, (r - lo) / r)?;
            inner += v * (s_hi - s_lo);
        } else if lo >= r {
            outer += v * outer_cell(ker, r, lo, hi, &gl)?;
        } else {
            let s_lo = ker.shell_c(lo / r, (r - lo) / r)?;
            inner += v * (shell_one - s_lo);
            outer += v * outer_cell(ker, r, r, hi, &gl)?;
        }
    }
    Ok(if r > 0.0 { r.powf(k + n) * inner } else { 0.0 } + outer)
}

/// W_k ∗ ρ at radius r, i.e. (|x|^k ∗ ρ)/k.
pub fn convolve(rho: &RadialDensity, params: &ModelParams, r: f64) -> Result<f64> {
    if params.k <= -(params.n as f64) {
        return Err(Error::InvalidParams(format!(
            "kernel |x|^{} is not locally integrable in dimension {}",
            params.k, params.n
        )));
    }
    let ker = Kernel::from_params(params)?;
    Ok(riesz_at(&ker, rho, r)? / params.k)
}

/// W_k ∗ ρ on a list of radii.
pub fn profile(rho: &RadialDensity, params: &ModelParams, radii: &[f64]) -> Result<PotentialProfile> {
    let ker = Kernel::from_params(params)?;
    let values = radii
        .par_iter()
        .map(|&r| riesz_at(&ker, rho, r).map(|v| v / params.k))
        .collect::<Result<Vec<_>>>()?;
    Ok(PotentialProfile {
        radii: radii.to_vec(),
        values,
    })
}

/// ω(r) = ∫₀^r (r^k/k) ϑ(s/r) ρ(s) s^{N-1} ds; M_ρ(r) r^{2-N}/(2-N) in the Newtonian case.
pub fn omega(rho: &RadialDensity, params: &ModelParams, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Ok(0.0);
    }
    let n = params.n;
    if params.is_newtonian() {
        let e = 2.0 - n as f64;
        return Ok(rho.cumulative_mass(n, r) * r.powf(e) / e);
    }
    let ker = Kernel::from_params(params)?;
    let grid = rho.grid();
    let mut acc = 0.0;
    for j in 0..rho.cells() {
        let lo = grid[j];
        if lo >= r {
            break;
        }
        let hi = grid[j + 1].min(r);
        let s_hi = ker.shell_c(hi / r, (r - hi) / r)?;
        let s_lo = ker.shell_c(lo / r, (r - lo) / r)?;
        acc += rho.values()[j] * (s_hi - s_lo);
    }
    Ok(r.powf(params.k + n as f64) * acc / params.k)
}

/// ∫_a^b f(x) by tanh-sinh, passing through kernel errors.
fn ts_checked<F: FnMut(f64, f64, f64) -> Result<f64>>(mut f: F, a: f64, b: f64) -> Result<f64> {
    let mut err = None;
    let v = quad::tanh_sinh(
        |x, da, db| match f(x, da, db) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        a,
        b,
        TS_TOL,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Radial derivative d/ds (W_k ∗ ρ)(s) from the differentiated split formula
/// ∫_{t<s} (s^{k-1} ϑ(t/s) - s^{k-2} t ϑ'(t/s)/k) dt̄ + ∫_{t>s} t^{k-1} ϑ'(s/t)/k dt̄.
/// Needs k > 1 - N so that ϑ' is integrable at 1.
pub fn radial_force(rho: &RadialDensity, params: &ModelParams, s: f64) -> Result<f64> {
    let n = params.n as f64;
    let k = params.k;
    if k <= 1.0 - n {
        return Err(Error::Domain(format!("pointwise force needs k > 1 - N, got k = {k}")));
    }
    if !(s > 0.0) {
        return Ok(0.0);
    }
    let ker = Kernel::from_params(params)?;
    let grid = rho.grid();
    let p = n - 1.0;
    let mut total = 0.0;
    for j in 0..rho.cells() {
        let v = rho.values()[j];
        if v == 0.0 {
            continue;
        }
        let (lo, hi) = (grid[j], grid[j + 1]);
        if lo < s {
            let top = hi.min(s);
            let sh = ker.shell_c(top / s, (s - top) / s)? - ker.shell_c(lo / s, (s - lo) / s)?;
            let d = ts_checked(
                |t, _, db| {
                    let gap = (s - top) + db;
                    Ok(t.powf(n) * ker.theta_prime_c(t / s, gap / s)?)
                },
                lo,
                top,
            )?;
            total += v * (s.powf(k - 1.0 + n) * sh - s.powf(k - 2.0) * d / k);
        }
        if hi > s {
            let bot = lo.max(s);
            let d = ts_checked(
                |t, da, _| {
                    let gap = (bot - s) + da;
                    Ok(t.powf(k - 1.0 + p) * ker.theta_prime_c(s / t, gap / t)?)
                },
                bot,
                hi,
            )?;
            total += v * d / k;
        }
    }
    Ok(total)
}

/// Cell-pair integrals of Θ on a fixed grid.
#[derive(Debug, Clone)]
pub struct CellIntegrals {
    grid: Vec<f64>,
    n: usize,
    k: f64,
    a: Vec<f64>,
}

impl CellIntegrals {
    pub fn new(ker: &Kernel, grid: &[f64]) -> Result<Self> {
        let cells = grid.len() - 1;
        let gl = GaussLegendre::new(PAIR_ORDER);
        let rows = (0..cells)
            .into_par_iter()
            .map(|i| pair_row(ker, grid, i, &gl))
            .collect::<Result<Vec<_>>>()?;
        let mut a = vec![0.0; cells * cells];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                a[i * cells + j] = *v;
                a[j * cells + i] = *v;
            }
        }
        Ok(CellIntegrals {
            grid: grid.to_vec(),
            n: ker.dim(),
            k: ker.k(),
            a,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn cells(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cells() + j]
    }

    /// Same integrals on the grid multiplied by `s` (exact by homogeneity).
    pub fn rescaled(&self, s: f64) -> Self {
        let f = s.powf(self.k + 2.0 * self.n as f64);
        CellIntegrals {
            grid: self.grid.iter().map(|r| r * s).collect(),
            n: self.n,
            k: self.k,
            a: self.a.iter().map(|v| v * f).collect(),
        }
    }

    /// Σ_j A_ij v_j for every cell i.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let cells = self.cells();
        (0..cells)
            .map(|i| {
                let row = &self.a[i * cells..(i + 1) * cells];
                row.iter().zip(v).map(|(x, y)| x * y).sum()
            })
            .collect()
    }

    /// Cell averages (w.r.t. r^{N-1} dr) of W_k ∗ ρ for ρ on this grid.
    pub fn cell_average_potential(&self, values: &[f64]) -> Vec<f64> {
        let ni = self.n as i32;
        let nf = self.n as f64;
        let av = self.apply(values);
        av.iter()
            .enumerate()
            .map(|(i, s)| {
                let w = (self.grid[i + 1].powi(ni) - self.grid[i].powi(ni)) / nf;
                s / (w * self.k)
            })
            .collect()
    }

    /// (σ_N/(2k)) Σ_ij ρ_i A_ij ρ_j.
    pub fn interaction_energy(&self, values: &[f64]) -> f64 {
        let av = self.apply(values);
        let q: f64 = av.iter().zip(values).map(|(x, y)| x * y).sum();
        crate::kernel::surface_area(self.n) * q / (2.0 * self.k)
    }
}

/// Row i of the pair matrix for columns j ≤ i.
fn pair_row(ker: &Kernel, grid: &[f64], i: usize, gl: &GaussLegendre) -> Result<Vec<f64>> {
    let nf = ker.dim() as f64;
    let p = ker.k() + 2.0 * nf - 1.0;
    let (lo, hi) = (grid[i], grid[i + 1]);
    let shell_one = ker.shell(1.0)?;
    let u = shell_one * (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0);
    let t = if i == 0 {
        u
    } else {
        let mut err = None;
        let v = quad::tanh_sinh(
            |r, da, _| match ker.shell_c(lo / r, da / r) {
                Ok(s) => r.powf(p) * (shell_one - s),
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            TS_TOL,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        v
    };
    let mut row = vec![0.0; i + 1];
    row[i] = 2.0 * t;
    if i == 0 {
        return Ok(row);
    }
    // shells[l] = Σ_q w r^p shell(r_l / r) for nodes l = 1..i-1
    let mut shells = vec![0.0; i];
    for (r, w) in gl.mapped(lo, hi) {
        let wr = w * r.powf(p);
        for (l, acc) in shells.iter_mut().enumerate().skip(1) {
            let x = grid[l];
            *acc += wr * ker.shell_c(x / r, (r - x) / r)?;
        }
    }
    for j in 0..i.saturating_sub(1) {
        row[j] = shells[j + 1] - shells[j];
    }
    row[i - 1] = (u - t) - shells[i - 1];
    Ok(row)
}

/// Interaction energy (1/2)∬ W_k ρ ρ of a density by the one-sided ω form:
/// σ_N ∫ ω ρ r^{N-1} dr, summing only cell pairs with j ≤ i.
pub fn interaction_energy(ker: &Kernel, rho: &RadialDensity) -> Result<f64> {
    let grid = rho.grid();
    let vals = rho.values();
    let gl = GaussLegendre::new(PAIR_ORDER);
    let last = match vals.iter().rposition(|v| *v > 0.0) {
        Some(j) => j,
        None => return Ok(0.0),
    };
    let rows = (0..=last)
        .into_par_iter()
        .filter(|i| vals[*i] > 0.0)
        .map(|i| {
            let row = pair_row(ker, grid, i, &gl)?;
            // diagonal carries both halves of the cell; keep one for the one-sided form
            let mut s = 0.5 * row[i] * vals[i];
            for j in 0..i {
                s += row[j] * vals[j];
            }
            Ok(s * vals[i])
        })
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = rows.iter().sum();
    Ok(crate::kernel::surface_area(ker.dim()) * total / ker.k())
}

/// Oracle: |x|^k ∗ ρ (r) by adaptive quadrature in η of the angular-quadrature Θ.
pub fn riesz_oracle(n: usize, k: f64, rho: &RadialDensity, r: f64) -> Result<f64> {
    let tol = Tolerance {
        rel: 1e-10,
        abs: 0.0,
        max_intervals: 4000,
    };
    let grid = rho.grid();
    let mut total = 0.0;
    for j in 0..rho.cells() {
        let v = rho.values()[j];
        if v == 0.0 {
            continue;
        }
        let (lo, hi) = (grid[j], grid[j + 1]);
        let f = |eta: f64| {
            crate::kernel::big_theta_angular(n, k, r, eta).unwrap_or(f64::NAN) * eta.powi(n as i32 - 1)
        };
        let piece = if r > lo && r < hi {
            // split at the singular point; the substitution η = r ∓ u² smooths it
            let left = quad::adaptive(|u| 2.0 * u * f(r - u * u), 0.0, (r - lo).sqrt(), tol)?;
            let right = quad::adaptive(|u| 2.0 * u * f(r + u * u), 0.0, (hi - r).sqrt(), tol)?;
            left + right
        } else if r == lo {
            quad::adaptive(|u| 2.0 * u * f(r + u * u), 0.0, (hi - r).sqrt(), tol)?
        } else if r == hi {
            quad::adaptive(|u| 2.0 * u * f(r - u * u), 0.0, (r - lo).sqrt(), tol)?
        } else {
            quad::adaptive(f, lo, hi, tol)?
        };
        total += v * piece;
    }
    Ok(total)
}
