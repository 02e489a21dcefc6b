//! Radial steady states and their characterizations.
//!
//! The solver iterates the Euler–Lagrange map
//! ρ ← [((m-1)/m)(C - Φ̄)]_+^{1/(m-1)}, Φ̄ = cell averages of W_k ∗ ρ + χr²/2,
//! with C fixed by the mass constraint. After every sweep the iterate is
//! replaced by its energy-optimal mass-preserving dilation, which removes the
//! slowest error mode of the sweep and makes the virial balance exact.

use crate::density::RadialDensity;
use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::kernel::{surface_area, Kernel, ModelParams};
use crate::potential::{riesz_at, CellIntegrals};
use crate::quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub density: RadialDensity,
    /// Euler–Lagrange level C.
    pub lagrange_constant: f64,
    pub support_radius: f64,
    pub iterations: usize,
    /// Relative L¹ change of the last sweep.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping τ of ρ ← (1-τ)ρ + τρ_new.
    pub damping: f64,
    /// Replace each iterate by its energy-optimal dilation.
    pub dilation_refit: bool,
    /// Sweeps after which the grid scale is frozen.
    pub refit_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 20_000,
            damping: 0.5,
            dilation_refit: true,
            refit_sweeps: 400,
        }
    }
}

/// Regime check shared by the solver and the simulator.
pub fn check_regime(params: &ModelParams) -> Result<()> {
    params.validate()?;
    let mc = params.m_c();
    if params.m < mc - 1e-12 {
        return Err(Error::Regime(format!(
            "m = {} below the fair-competition exponent {}; the energy is unbounded below",
            params.m, mc
        )));
    }
    if !(params.mass > 0.0) {
        return Err(Error::Degenerate("steady states need positive mass".into()));
    }
    Ok(())
}

/// Scaled view of the fixed-shape grid used inside the solver.
struct Workspace {
    n: usize,
    k: f64,
    chi: f64,
    sigma: f64,
    base: CellIntegrals,
    base_grid: Vec<f64>,
    /// current grid = scale · base grid
    scale: f64,
    base_weights: Vec<f64>,
    base_r2: Vec<f64>,
}

impl Workspace {
    fn new(ker: &Kernel, params: &ModelParams, grid: &[f64]) -> Result<Self> {
        let n = params.n;
        let ni = n as i32;
        let nf = n as f64;
        let base = CellIntegrals::new(ker, grid)?;
        let base_weights: Vec<f64> = grid
            .windows(2)
            .map(|w| (w[1].powi(ni) - w[0].powi(ni)) / nf)
            .collect();
        let base_r2: Vec<f64> = grid
            .windows(2)
            .zip(&base_weights)
            .map(|(w, v)| (w[1].powi(ni + 2) - w[0].powi(ni + 2)) / (nf + 2.0) / v)
            .collect();
        Ok(Workspace {
            n,
            k: params.k,
            chi: params.chi,
            sigma: surface_area(n),
            base,
            base_grid: grid.to_vec(),
            scale: 1.0,
            base_weights,
            base_r2,
        })
    }

    fn weights(&self) -> Vec<f64> {
        let f = self.scale.powi(self.n as i32);
        self.base_weights.iter().map(|w| w * f).collect()
    }

    /// Cell averages of W_k ∗ ρ + χ r²/2.
    fn phi_bar(&self, values: &[f64]) -> Vec<f64> {
        let s = self.scale;
        let nf = self.n as f64;
        // A scales as s^{k+2N}, the cell weight as s^N
        let f = s.powf(self.k + nf) / self.k;
        let av = self.base.apply(values);
        av.iter()
            .zip(&self.base_weights)
            .zip(&self.base_r2)
            .map(|((a, w), r2)| f * a / w + 0.5 * self.chi * s * s * r2)
            .collect()
    }

    fn mass(&self, values: &[f64]) -> f64 {
        let w = self.weights();
        self.sigma * values.iter().zip(&w).map(|(v, w)| v * w).sum::<f64>()
    }

    /// (entropy, interaction, confinement) of ρ on the current grid.
    fn components(&self, values: &[f64], m: f64) -> (f64, f64, f64) {
        let s = self.scale;
        let nf = self.n as f64;
        let w = self.weights();
        let ent = self.sigma * values.iter().zip(&w).map(|(v, w)| v.powf(m) * w).sum::<f64>() / (m - 1.0);
        let inter = s.powf(self.k + 2.0 * nf) * self.base.interaction_energy(values);
        let conf = 0.5
            * self.chi
            * self.sigma
            * s
            * s
            * values
                .iter()
                .zip(&w)
                .zip(&self.base_r2)
                .map(|((v, w), r2)| v * w * r2)
                .sum::<f64>();
        (ent, inter, conf)
    }

    fn grid(&self) -> Vec<f64> {
        self.base_grid.iter().map(|r| r * self.scale).collect()
    }
}

/// Energy-optimal dilation factor λ for E(λ) = A λ^p + B λ^{-k} + C λ^{-2},
/// p = N(m-1). Returns None when E has no interior minimum.
pub fn optimal_dilation(p: f64, k: f64, ent: f64, inter: f64, conf: f64) -> Option<f64> {
    // h(t) = e^{kt} dE/dt = pA e^{(p+k)t} - kB - 2C e^{(k-2)t}, increasing in t
    let h = |t: f64| p * ent * ((p + k) * t).exp() - k * inter - 2.0 * conf * ((k - 2.0) * t).exp();
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut tries = 0;
    while h(lo) > 0.0 {
        lo *= 2.0;
        tries += 1;
        if tries > 12 {
            return None;
        }
    }
    tries = 0;
    while h(hi) < 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 12 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Some((0.5 * (lo + hi)).exp())
}

/// Euler–Lagrange profile for level C.
fn el_profile(phi: &[f64], c: f64, m: f64, out: &mut [f64]) {
    let e = 1.0 / (m - 1.0);
    let f = (m - 1.0) / m;
    for (o, p) in out.iter_mut().zip(phi) {
        let d = c - p;
        *o = if d > 0.0 { (f * d).powf(e) } else { 0.0 };
    }
}

/// Level C with mass(EL profile) = M, by bisection.
fn find_level(ws: &Workspace, phi: &[f64], m: f64, mass: f64, out: &mut [f64]) -> Result<f64> {
    let w = ws.weights();
    let mass_of = |c: f64, out: &mut [f64]| {
        el_profile(phi, c, m, out);
        ws.sigma * out.iter().zip(&w).map(|(v, w)| v * w).sum::<f64>()
    };
    let pmin = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let pmax = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo0 = pmin;
    let mut hi = pmax.max(pmin) + (pmax - pmin).abs().max(1.0);
    let mut guard = 0;
    while mass_of(hi, out) < mass {
        hi = lo0 + 2.0 * (hi - lo0);
        guard += 1;
        if guard > 200 {
            return Err(Error::Degenerate("cannot bracket the Euler–Lagrange level".into()));
        }
    }
    let mut lo = lo0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass_of(mid, out) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()) {
            break;
        }
    }
    let c = 0.5 * (lo + hi);
    let got = mass_of(c, out);
    if !(got > 0.0) {
        return Err(Error::Degenerate("Euler–Lagrange profile has zero mass".into()));
    }
    for v in out.iter_mut() {
        *v *= mass / got;
    }
    Ok(c)
}

/// Fixed-point solve with default options apart from `tol` and `max_iter`.
pub fn solve(params: &ModelParams, init: &RadialDensity, tol: f64, max_iter: usize) -> Result<SteadyState> {
    solve_with(
        params,
        init,
        &SolverOptions {
            tol,
            max_iter,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_with(params: &ModelParams, init: &RadialDensity, opts: &SolverOptions) -> Result<SteadyState> {
    check_regime(params)?;
    let n = params.n;
    let m = params.m;
    let mass = params.mass;
    if !(init.mass(n) > 0.0) {
        return Err(Error::Degenerate("initial density has zero mass".into()));
    }
    let ker = Kernel::from_params(params)?;
    let mut ws = Workspace::new(&ker, params, init.grid())?;
    let refit = opts.dilation_refit && !(params.is_fair_competition() && params.chi == 0.0);
    let p = n as f64 * (m - 1.0);

    let mut rho: Vec<f64> = init.normalized(n, mass)?.values().to_vec();
    let mut new = vec![0.0; rho.len()];
    let mut prev_step: Option<Vec<f64>> = None;
    let mut tau = opts.damping;
    let mut calm = 0usize;
    let mut level = 0.0;
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let phi = ws.phi_bar(&rho);
        level = find_level(&ws, &phi, m, mass, &mut new)?;
        let w = ws.weights();
        let step: Vec<f64> = new.iter().zip(&rho).map(|(a, b)| a - b).collect();
        change = ws.sigma * step.iter().zip(&w).map(|(d, w)| d.abs() * w).sum::<f64>() / mass;
        if let Some(prev) = &prev_step {
            let dot: f64 = prev.iter().zip(&step).zip(&w).map(|((a, b), w)| a * b * w).sum();
            if dot < 0.0 {
                tau = (0.5 * tau).max(1e-3);
                calm = 0;
            } else {
                calm += 1;
                if calm >= 25 {
                    tau = (1.25 * tau).min(opts.damping);
                    calm = 0;
                }
            }
        }
        for (r, s) in rho.iter_mut().zip(&step) {
            *r += tau * s;
            if *r < 0.0 {
                *r = 0.0;
            }
        }
        prev_step = Some(step);

        let support = rho.iter().filter(|v| **v > 0.0).count();
        if support < 2 {
            return Err(Error::Collapse {
                cells: support,
                iterations: it,
            });
        }

        let mut shift = 0.0;
        if refit && it <= opts.refit_sweeps {
            let (a, b, c) = ws.components(&rho, m);
            match optimal_dilation(p, params.k, a, b, c) {
                Some(lambda) => {
                    ws.scale /= lambda;
                    let f = lambda.powi(n as i32);
                    for v in rho.iter_mut() {
                        *v *= f;
                    }
                    shift = (lambda - 1.0).abs();
                }
                None => {
                    return Err(Error::Collapse {
                        cells: support,
                        iterations: it,
                    })
                }
            }
        }
        // keep the mass exact against rounding drift
        let cur = ws.mass(&rho);
        for v in rho.iter_mut() {
            *v *= mass / cur;
        }
        if change <= opts.tol && shift <= opts.tol {
            let density = RadialDensity::new(ws.grid(), rho)?;
            let support_radius = density.support_radius();
            return Ok(SteadyState {
                density,
                lagrange_constant: level,
                support_radius,
                iterations: it,
                residual: change,
            });
        }
    }
    let _ = level;
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        change,
    })
}

/// Uniform-ball radius minimizing the energy over the ball family.
pub fn ball_radius_guess(params: &ModelParams) -> Result<f64> {
    let ball = RadialDensity::uniform_ball(params.n, params.mass, 1.0, 1)?;
    let e = crate::energy::evaluate(&ball, params)?;
    let p = params.n as f64 * (params.m - 1.0);
    let lambda = optimal_dilation(p, params.k, e.entropy, e.interaction, e.confinement).unwrap_or(1.0);
    Ok(1.0 / lambda)
}

/// Solve from scratch: a coarse solve locates the support, then a fine
/// uniform grid with `cells` cells is fitted to it and the solve repeated.
pub fn solve_auto(params: &ModelParams, cells: usize, opts: &SolverOptions) -> Result<SteadyState> {
    check_regime(params)?;
    let n = params.n;
    let r0 = ball_radius_guess(params)?;
    let coarse_cells = 96.min(cells);
    let init = RadialDensity::uniform_ball(n, params.mass, r0, coarse_cells / 2)?;
    let grid = RadialDensity::uniform_grid(2.0 * r0, coarse_cells);
    let init = init.project(&grid, n)?;
    let coarse_opts = SolverOptions {
        tol: opts.tol.max(1e-10),
        ..*opts
    };
    let coarse = solve_with(params, &init, &coarse_opts)?;
    let mut radius = coarse.support_radius * (1.0 + 2.0 / cells as f64);
    let mut start = coarse.density;
    for _ in 0..6 {
        let grid = RadialDensity::uniform_grid(radius, cells);
        let init = start.project(&grid, n)?.normalized(n, params.mass)?;
        let ss = solve_with(params, &init, opts)?;
        let last = *ss.density.values().last().expect("cells");
        if last == 0.0 || !opts.dilation_refit {
            return Ok(ss);
        }
        radius = ss.density.outer_radius() * 1.05;
        start = ss.density;
    }
    Err(Error::Degenerate("support keeps reaching the grid edge".into()))
}

/// Relative variance of the Euler–Lagrange level (m/(m-1))ρ^{m-1} + Φ̄ over
/// cells where ρ exceeds `threshold`·max ρ.
pub fn el_level_variance(ss: &SteadyState, params: &ModelParams, threshold: f64) -> Result<f64> {
    let rho = &ss.density;
    let ker = Kernel::from_params(params)?;
    let ci = CellIntegrals::new(&ker, rho.grid())?;
    let phi = cell_average_phi(&ci, rho, params);
    let vmax = rho.values().iter().copied().fold(0.0, f64::max);
    let m = params.m;
    let levels: Vec<f64> = rho
        .values()
        .iter()
        .zip(&phi)
        .filter(|(v, _)| **v > threshold * vmax)
        .map(|(v, p)| m / (m - 1.0) * v.powf(m - 1.0) + p)
        .collect();
    if levels.is_empty() {
        return Err(Error::Degenerate("empty support".into()));
    }
    let mean = levels.iter().sum::<f64>() / levels.len() as f64;
    let var = levels.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / levels.len() as f64;
    Ok(var / (mean * mean).max(f64::MIN_POSITIVE))
}

fn cell_average_phi(ci: &CellIntegrals, rho: &RadialDensity, params: &ModelParams) -> Vec<f64> {
    let n = params.n;
    let ni = n as i32;
    let nf = n as f64;
    let s = ci.cell_average_potential(rho.values());
    rho.grid()
        .windows(2)
        .zip(s)
        .map(|(w, s)| {
            let r2 = (w[1].powi(ni + 2) - w[0].powi(ni + 2)) / (nf + 2.0)
                / ((w[1].powi(ni) - w[0].powi(ni)) / nf);
            s + 0.5 * params.chi * r2
        })
        .collect()
}

/// The right-hand side of the stationary characterization
/// ρ̄^m(r) = ∫_r^∞ ρ̄ ∂_s(W_k ∗ ρ̄ + χ s²/2) ds, evaluated for a
/// piecewise-constant ρ̄.
pub struct Characterization<'a> {
    rho: &'a RadialDensity,
    params: ModelParams,
    /// Φ at the nodes (general branch)
    node_phi: Vec<f64>,
    /// cell averages of Φ (general branch)
    cell_phi: Vec<f64>,
    /// ∫_{cell l} ρ Φ' ds summed over cells ≥ l
    tail: Vec<f64>,
    node_mass: Vec<f64>,
    ker: Option<Kernel>,
}

impl<'a> Characterization<'a> {
    pub fn new(rho: &'a RadialDensity, params: &ModelParams) -> Result<Self> {
        let cells = rho.cells();
        let grid = rho.grid();
        let node_mass = rho.node_masses(params.n);
        let mut me = Characterization {
            rho,
            params: *params,
            node_phi: Vec::new(),
            cell_phi: Vec::new(),
            tail: vec![0.0; cells + 1],
            node_mass,
            ker: None,
        };
        if !params.is_newtonian() {
            let ker = Kernel::from_params(params)?;
            let last = rho.values().iter().rposition(|v| *v > 0.0).map_or(0, |j| j + 1);
            let node_phi = (0..=cells)
                .into_par_iter()
                .map(|l| {
                    if l > last {
                        return Ok(0.0);
                    }
                    let r = grid[l];
                    Ok(riesz_at(&ker, rho, r)? / params.k + 0.5 * params.chi * r * r)
                })
                .collect::<Result<Vec<f64>>>()?;
            let ci = CellIntegrals::new(&ker, grid)?;
            me.cell_phi = cell_average_phi(&ci, rho, params);
            me.node_phi = node_phi;
            me.ker = Some(ker);
        }
        for l in (0..cells).rev() {
            let d = rho.values()[l] * me.phi_increment(l, grid[l], grid[l + 1]);
            me.tail[l] = me.tail[l + 1] + d;
        }
        Ok(me)
    }

    /// ∫_a^b Φ'(s) ds for a, b inside cell l.
    fn phi_increment(&self, l: usize, a: f64, b: f64) -> f64 {
        let v = self.rho.values()[l];
        if v == 0.0 {
            return 0.0;
        }
        if self.params.is_newtonian() {
            let n = self.params.n;
            let nf = n as f64;
            let sigma = surface_area(n);
            let lo = self.rho.grid()[l];
            // M(s) = M_l + σ v (s^N - lo^N)/N
            let c0 = self.node_mass[l] - sigma * v * lo.powi(n as i32) / nf;
            let pow_int = if c0 == 0.0 {
                0.0
            } else if n == 2 {
                (b / a).ln()
            } else {
                (b.powf(2.0 - nf) - a.powf(2.0 - nf)) / (2.0 - nf)
            };
            c0 * pow_int + sigma * v / nf * (b * b - a * a) / 2.0 + self.params.chi * (b * b - a * a) / 2.0
        } else {
            let (lo, hi) = (self.rho.grid()[l], self.rho.grid()[l + 1]);
            let at = |x: f64| -> f64 {
                if x == lo {
                    self.node_phi[l]
                } else if x == hi {
                    self.node_phi[l + 1]
                } else {
                    let ker = self.ker.as_ref().expect("general branch");
                    riesz_at(ker, self.rho, x).expect("potential") / self.params.k
                        + 0.5 * self.params.chi * x * x
                }
            };
            at(b) - at(a)
        }
    }

    /// RHS at a radius inside cell i.
    pub fn rhs_at(&self, i: usize, a: f64) -> f64 {
        let hi = self.rho.grid()[i + 1];
        self.rho.values()[i] * self.phi_increment(i, a, hi) + self.tail[i + 1]
    }

    /// Cell average of the RHS over cell i w.r.t. a^{N-1} da.
    pub fn rhs_cell_average(&self, i: usize, gl: &GaussLegendre) -> f64 {
        let v = self.rho.values()[i];
        let (lo, hi) = (self.rho.grid()[i], self.rho.grid()[i + 1]);
        let local = if v == 0.0 {
            0.0
        } else if self.params.is_newtonian() {
            let n = self.params.n as i32;
            let w = (hi.powi(n) - lo.powi(n)) / n as f64;
            gl.integrate(lo, hi, |a| a.powi(n - 1) * self.phi_increment(i, a, hi)) / w * v
        } else {
            v * (self.node_phi[i + 1] - self.cell_phi[i])
        };
        local + self.tail[i + 1]
    }
}

/// sup_i |ρ̄_i^m - ⟨RHS⟩_i| / sup ρ̄^m over the grid cells.
pub fn characterization_residual(ss: &SteadyState, params: &ModelParams) -> Result<f64> {
    density_characterization_residual(&ss.density, params)
}

pub fn density_characterization_residual(rho: &RadialDensity, params: &ModelParams) -> Result<f64> {
    let ch = Characterization::new(rho, params)?;
    let gl = GaussLegendre::new(8);
    let m = params.m;
    let scale = rho.values().iter().map(|v| v.powf(m)).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::Degenerate("zero density".into()));
    }
    let worst = (0..rho.cells())
        .map(|i| (rho.values()[i].powf(m) - ch.rhs_cell_average(i, &gl)).abs())
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// Normalized residual of ∫ g ρ̄^m a^{N-1} da = ∫ g a^{N-1} RHS(a) da.
pub fn g_weighted_identity_residual<G: Fn(f64) -> f64 + Sync>(
    ss: &SteadyState,
    g: G,
    params: &ModelParams,
) -> Result<f64> {
    let rho = &ss.density;
    let ch = Characterization::new(rho, params)?;
    let gl = GaussLegendre::new(6);
    let n = params.n as i32;
    let m = params.m;
    let (lhs, rhs) = (0..rho.cells())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = (rho.grid()[i], rho.grid()[i + 1]);
            let v = rho.values()[i].powf(m);
            let mut l = 0.0;
            let mut r = 0.0;
            for (a, w) in gl.mapped(lo, hi) {
                let ga = g(a) * a.powi(n - 1) * w;
                l += ga * v;
                r += ga * ch.rhs_at(i, a);
            }
            (l, r)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    if lhs == 0.0 {
        return Err(Error::Degenerate("zero weighted integral".into()));
    }
    Ok((lhs - rhs).abs() / lhs.abs())
}

/// Summary numbers for reports.
#[derive(Debug, Clone, Serialize)]
pub struct SteadyDiagnostics {
    pub lagrange_constant: f64,
    pub support_radius: f64,
    pub iterations: usize,
    pub last_change: f64,
    pub m_c: f64,
    pub m_star: f64,
    pub energy: EnergyBreakdown,
    pub stationary_energy_identity: f64,
    /// |F - identity| / |F|
    pub energy_identity_gap: f64,
    pub characterization_residual: f64,
    pub el_level_variance: f64,
    pub virial_residual: f64,
}

pub fn diagnostics(ss: &SteadyState, params: &ModelParams) -> Result<SteadyDiagnostics> {
    let energy = crate::energy::evaluate(&ss.density, params)?;
    let identity = crate::energy::stationary_energy_identity(&ss.density, params);
    Ok(SteadyDiagnostics {
        lagrange_constant: ss.lagrange_constant,
        support_radius: ss.support_radius,
        iterations: ss.iterations,
        last_change: ss.residual,
        m_c: params.m_c(),
        m_star: params.m_star(),
        energy,
        stationary_energy_identity: identity,
        energy_identity_gap: (energy.total - identity).abs() / energy.total.abs().max(f64::MIN_POSITIVE),
        characterization_residual: characterization_residual(ss, params)?,
        el_level_variance: el_level_variance(ss, params, 1e-3)?,
        virial_residual: crate::energy::virial_identity_residual(&ss.density, params)?,
    })
}
