//! Free energy F[ρ] = ∫ρ^m/(m-1) + ½∬W_k ρρ + (χ/2)∫|x|²ρ in radial coordinates.

use crate::density::RadialDensity;
use crate::error::{Error, Result};
use crate::kernel::{surface_area, Kernel, ModelParams};
use crate::potential::{self, CellIntegrals};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub entropy: f64,
    pub interaction: f64,
    pub confinement: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(entropy: f64, interaction: f64, confinement: f64) -> Self {
        EnergyBreakdown {
            entropy,
            interaction,
            confinement,
            total: entropy + interaction + confinement,
        }
    }
}

pub fn entropy(rho: &RadialDensity, params: &ModelParams) -> Result<f64> {
    let e = rho.power_integral(params.n, params.m) / (params.m - 1.0);
    if !e.is_finite() {
        return Err(Error::Domain("entropy is not finite".into()));
    }
    Ok(e)
}

pub fn confinement(rho: &RadialDensity, params: &ModelParams) -> f64 {
    if params.chi == 0.0 {
        0.0
    } else {
        0.5 * params.chi * rho.second_moment(params.n)
    }
}

/// σ_N ∫ ω ρ r^{N-1} dr with ω = M_ρ(r) r^{2-N}/(2-N), in closed form per cell.
fn newtonian_interaction(rho: &RadialDensity, n: usize) -> f64 {
    let sigma = surface_area(n);
    let nf = n as f64;
    let ni = n as i32;
    let grid = rho.grid();
    let mut acc = 0.0;
    let mut m_lo = 0.0;
    for j in 0..rho.cells() {
        let v = rho.values()[j];
        let (lo, hi) = (grid[j], grid[j + 1]);
        // ∫ (M_j + σ v (r^N - lo^N)/N) r dr over the cell
        let base = m_lo - sigma * v * lo.powi(ni) / nf;
        acc += v * (base * (hi * hi - lo * lo) / 2.0
            + sigma * v / nf * (hi.powi(ni + 2) - lo.powi(ni + 2)) / (nf + 2.0));
        m_lo += sigma * v * (hi.powi(ni) - lo.powi(ni)) / nf;
    }
    sigma * acc / (2.0 - nf)
}

/// ½∬ W_k(x - y) ρ(x) ρ(y) dx dy via the one-sided ω form.
pub fn interaction(rho: &RadialDensity, params: &ModelParams) -> Result<f64> {
    if params.is_newtonian() {
        return Ok(newtonian_interaction(rho, params.n));
    }
    let ker = Kernel::from_params(params)?;
    potential::interaction_energy(&ker, rho)
}

pub fn evaluate(rho: &RadialDensity, params: &ModelParams) -> Result<EnergyBreakdown> {
    Ok(EnergyBreakdown::new(
        entropy(rho, params)?,
        interaction(rho, params)?,
        confinement(rho, params),
    ))
}

/// Energy of a density living on the grid of precomputed cell integrals.
pub fn evaluate_with(ci: &CellIntegrals, rho: &RadialDensity, params: &ModelParams) -> Result<EnergyBreakdown> {
    Ok(EnergyBreakdown::new(
        entropy(rho, params)?,
        ci.interaction_energy(rho.values()),
        confinement(rho, params),
    ))
}

/// Closed-form energy of a stationary state:
/// Nσ_N[(1/(N(m-1)) + 1/k) ∫ρ̄^m a^{N-1} da + (χ/N)(1/2 - 1/k) ∫a² dā].
pub fn stationary_energy_identity(rho_bar: &RadialDensity, params: &ModelParams) -> f64 {
    let nf = params.n as f64;
    // coincides with 1/(2-N) in the Newtonian case
    let inv_k = if params.is_newtonian() { 1.0 / (2.0 - nf) } else { 1.0 / params.k };
    let sigma = surface_area(params.n);
    let p = rho_bar.power_integral(params.n, params.m) / sigma;
    let moment = rho_bar.second_moment(params.n) / sigma;
    nf * sigma * ((1.0 / (nf * (params.m - 1.0)) + inv_k) * p + params.chi / nf * (0.5 - inv_k) * moment)
}

/// Normalized residual of ∫ρ̄^m a^{N-1} da = (1/N)(∬_{s<b} b^k ϑ(s/b) ds̄ db̄ + χ∫b² db̄).
pub fn virial_identity_residual(rho_bar: &RadialDensity, params: &ModelParams) -> Result<f64> {
    let sigma = surface_area(params.n);
    let nf = params.n as f64;
    let p = rho_bar.power_integral(params.n, params.m) / sigma;
    if !(p > 0.0) {
        return Err(Error::Degenerate("zero density".into()));
    }
    // ∬_{s<b} b^k ϑ(s/b) ds̄ db̄ = k·interaction/σ_N
    let pair = params.k * interaction(rho_bar, params)? / sigma;
    let moment = rho_bar.second_moment(params.n) / sigma;
    Ok((p - (pair + params.chi * moment) / nf).abs() / p)
}
