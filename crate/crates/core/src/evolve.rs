//! Explicit upwind finite-volume gradient flow for the radial equation
//! ∂_t(r^{N-1}ρ) = ∂_r(r^{N-1}ρ ∂_r ξ), ξ = mρ^{m-1}/(m-1) + W_k∗ρ + χr²/2,
//! on a fixed grid with no-flux boundaries.

use crate::density::RadialDensity;
use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::kernel::{surface_area, Kernel, ModelParams};
use crate::potential::CellIntegrals;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    /// diffusion CFL constant
    pub cfl: f64,
    /// recompute the convolution every this many steps
    pub refresh_every: usize,
    /// allowed relative energy increase per accepted step
    pub energy_slack: f64,
    pub min_dt: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            cfl: 0.4,
            refresh_every: 1,
            energy_slack: 1e-8,
            min_dt: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub density: RadialDensity,
    pub time: f64,
    pub dt: f64,
    pub energy_history: Vec<(f64, f64)>,
    pub steps: usize,
    /// relative L¹ change per unit time over the last accepted step
    pub rate: f64,
    // Σ_j A_ij ρ_j for the current density, when fresh
    cached: Option<Vec<f64>>,
    since_refresh: usize,
}

impl SimState {
    pub fn energy(&self) -> f64 {
        self.energy_history.last().map(|e| e.1).unwrap_or(f64::NAN)
    }
}

/// Fixed-grid stepper holding the cell-pair integrals.
pub struct Simulator {
    params: ModelParams,
    opts: EvolveOptions,
    ci: CellIntegrals,
    weights: Vec<f64>,
    r2: Vec<f64>,
    centers: Vec<f64>,
    /// r^{N-1} at interior faces 1..J-1
    face_area: Vec<f64>,
    sigma: f64,
}

impl Simulator {
    pub fn new(params: &ModelParams, grid: &[f64], opts: EvolveOptions) -> Result<Self> {
        params.validate()?;
        if grid.len() < 3 {
            return Err(Error::InvalidDensity("evolution needs at least two cells".into()));
        }
        if !(opts.cfl > 0.0) || opts.refresh_every == 0 {
            return Err(Error::InvalidParams("cfl must be positive and refresh_every ≥ 1".into()));
        }
        let n = params.n;
        let ni = n as i32;
        let nf = n as f64;
        let ker = Kernel::from_params(params)?;
        let ci = CellIntegrals::new(&ker, grid)?;
        let weights: Vec<f64> = grid.windows(2).map(|w| (w[1].powi(ni) - w[0].powi(ni)) / nf).collect();
        let r2 = grid
            .windows(2)
            .zip(&weights)
            .map(|(w, v)| (w[1].powi(ni + 2) - w[0].powi(ni + 2)) / (nf + 2.0) / v)
            .collect();
        let centers = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let face_area = grid[1..grid.len() - 1].iter().map(|r| r.powi(ni - 1)).collect();
        Ok(Simulator {
            params: *params,
            opts,
            ci,
            weights,
            r2,
            centers,
            face_area,
            sigma: surface_area(n),
        })
    }

    pub fn grid(&self) -> &[f64] {
        self.ci.grid()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Initial state: `init` projected onto the simulation grid.
    pub fn start(&self, init: &RadialDensity) -> Result<SimState> {
        let rho = if init.grid() == self.grid() {
            init.clone()
        } else {
            init.project(self.grid(), self.params.n)?
        };
        let conv = self.ci.apply(rho.values());
        let f = self.energy_parts(rho.values(), &conv).total;
        Ok(SimState {
            density: rho,
            time: 0.0,
            dt: 0.0,
            energy_history: vec![(0.0, f)],
            steps: 0,
            rate: f64::INFINITY,
            cached: Some(conv),
            since_refresh: 0,
        })
    }

    fn energy_parts(&self, v: &[f64], conv: &[f64]) -> EnergyBreakdown {
        let m = self.params.m;
        let ent: f64 = self.sigma * v.iter().zip(&self.weights).map(|(x, w)| x.powf(m) * w).sum::<f64>() / (m - 1.0);
        let q: f64 = conv.iter().zip(v).map(|(a, b)| a * b).sum();
        let inter = self.sigma * q / (2.0 * self.params.k);
        let conf = 0.5
            * self.params.chi
            * self.sigma
            * v.iter().zip(&self.weights).zip(&self.r2).map(|((x, w), r2)| x * w * r2).sum::<f64>();
        EnergyBreakdown::new(ent, inter, conf)
    }

    pub fn energy(&self, rho: &RadialDensity) -> EnergyBreakdown {
        self.energy_parts(rho.values(), &self.ci.apply(rho.values()))
    }

    /// Face velocities -Δξ/Δc at interior faces.
    fn velocities(&self, v: &[f64], conv: &[f64]) -> Vec<f64> {
        let m = self.params.m;
        let (k, chi) = (self.params.k, self.params.chi);
        let xi: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let ent = if x > 0.0 { m / (m - 1.0) * x.powf(m - 1.0) } else { 0.0 };
                ent + conv[j] / (self.weights[j] * k) + 0.5 * chi * self.r2[j]
            })
            .collect();
        (0..v.len() - 1)
            .map(|j| -(xi[j + 1] - xi[j]) / (self.centers[j + 1] - self.centers[j]))
            .collect()
    }

    /// Largest admissible dt for the given velocities.
    fn dt_cap(&self, v: &[f64], vel: &[f64]) -> f64 {
        let m = self.params.m;
        let g = self.grid();
        let min_dr = g.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let peak = v.iter().cloned().fold(0.0, f64::max);
        let mut cap = self.opts.cfl * min_dr * min_dr / (m * peak.powf(m - 1.0)).max(1e-300);
        for j in 0..v.len() {
            let right = if j + 1 < v.len() { self.face_area[j] * vel[j].max(0.0) } else { 0.0 };
            let left = if j > 0 { self.face_area[j - 1] * (-vel[j - 1]).max(0.0) } else { 0.0 };
            let out = right + left;
            if out > 0.0 {
                cap = cap.min(0.5 * self.weights[j] / out);
            }
        }
        cap
    }

    fn advance(&self, v: &[f64], vel: &[f64], dt: f64) -> Vec<f64> {
        let cells = v.len();
        let mut flux = vec![0.0; cells + 1];
        for j in 0..cells - 1 {
            let u = vel[j];
            let up = if u > 0.0 { v[j] } else { v[j + 1] };
            flux[j + 1] = self.face_area[j] * u * up;
        }
        (0..cells)
            .map(|j| v[j] - dt * (flux[j + 1] - flux[j]) / self.weights[j])
            .collect()
    }

    /// One accepted step; dt is halved on negativity or energy increase.
    pub fn step(&self, state: &mut SimState) -> Result<()> {
        let v = state.density.values().to_vec();
        let refresh = state.cached.is_none() || state.since_refresh + 1 >= self.opts.refresh_every;
        let conv = match &state.cached {
            Some(c) => c.clone(),
            None => self.ci.apply(&v),
        };
        let vel = self.velocities(&v, &conv);
        let cap = self.dt_cap(&v, &vel);
        let mut dt = if state.dt > 0.0 { cap.min(2.0 * state.dt) } else { cap };
        let f_old = state.energy();
        loop {
            if dt < self.opts.min_dt {
                return Err(Error::Instability(format!("dt fell below {:e} at t = {}", self.opts.min_dt, state.time)));
            }
            let mut next = self.advance(&v, &vel, dt);
            if let Some(&low) = next.iter().min_by(|a, b| a.total_cmp(b)) {
                if low < -1e-12 {
                    dt *= 0.5;
                    continue;
                }
            }
            for x in next.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            let (conv_next, f_new) = if refresh {
                let c = self.ci.apply(&next);
                let f = self.energy_parts(&next, &c).total;
                (Some(c), Some(f))
            } else {
                (None, None)
            };
            if let Some(f) = f_new {
                if f > f_old + self.opts.energy_slack * f_old.abs() {
                    dt *= 0.5;
                    continue;
                }
            }
            let change: f64 = self.sigma
                * next
                    .iter()
                    .zip(&v)
                    .zip(&self.weights)
                    .map(|((a, b), w)| (a - b).abs() * w)
                    .sum::<f64>();
            state.rate = change / (dt * self.params.mass);
            state.time += dt;
            state.dt = dt;
            state.steps += 1;
            state.density = RadialDensity::new(self.grid().to_vec(), next)?;
            match (conv_next, f_new) {
                (Some(c), Some(f)) => {
                    state.cached = Some(c);
                    state.since_refresh = 0;
                    state.energy_history.push((state.time, f));
                }
                _ => {
                    // keep the stale convolution until the next refresh
                    state.since_refresh += 1;
                }
            }
            return Ok(());
        }
    }

    /// Step until the relative L¹ rate drops below `stall_tol` or `t_max` is reached.
    pub fn run(&self, state: &mut SimState, t_max: f64, stall_tol: f64) -> Result<()> {
        while state.time < t_max {
            if state.steps >= self.opts.max_steps {
                return Err(Error::Timeout {
                    time: state.time,
                    rate: state.rate,
                });
            }
            self.step(state)?;
            if state.rate < stall_tol {
                return Ok(());
            }
        }
        if t_max > 0.0 && state.rate >= stall_tol {
            return Err(Error::Timeout {
                time: state.time,
                rate: state.rate,
            });
        }
        Ok(())
    }
}

/// Evolve `init` on its own grid with default options.
pub fn run_to_equilibrium(init: &RadialDensity, params: &ModelParams, t_max: f64, stall_tol: f64) -> Result<SimState> {
    crate::steady::check_regime(params)?;
    let sim = Simulator::new(params, init.grid(), EvolveOptions::default())?;
    let mut state = sim.start(init)?;
    sim.run(&mut state, t_max, stall_tol)?;
    Ok(state)
}

/// Single step with freshly built integrals; prefer `Simulator` in loops.
pub fn step(state: &SimState, params: &ModelParams) -> Result<SimState> {
    let sim = Simulator::new(params, state.density.grid(), EvolveOptions::default())?;
    let mut next = state.clone();
    sim.step(&mut next)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_horizon_returns_input() {
        let p = ModelParams::new(3, -1.0, 2.0, 0.0, 1.0).unwrap();
        let rho = RadialDensity::uniform_ball(3, 1.0, 1.0, 40).unwrap();
        let s = run_to_equilibrium(&rho, &p, 0.0, 1e-6).unwrap();
        assert_eq!(s.density, rho);
        assert_eq!(s.time, 0.0);
    }

    #[test]
    fn mass_conserved_and_energy_decreasing() {
        let p = ModelParams::new(3, -1.0, 2.0, 0.0, 1.0).unwrap();
        let grid = RadialDensity::uniform_grid(1.6, 48);
        let sim = Simulator::new(&p, &grid, EvolveOptions::default()).unwrap();
        let init = RadialDensity::uniform_ball(3, 1.0, 1.0, 30).unwrap();
        let mut st = sim.start(&init).unwrap();
        let m0 = st.density.mass(3);
        for _ in 0..1000 {
            sim.step(&mut st).unwrap();
        }
        assert!((st.density.mass(3) - m0).abs() < 1e-10 * m0);
        for w in st.energy_history.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-8 * w[0].1.abs());
        }
        assert!(st.energy_history.last().unwrap().1 < st.energy_history[0].1);
    }

    #[test]
    fn stale_refresh_still_conserves_mass() {
        let p = ModelParams::new(3, -1.5, 1.5, 1.0, 0.5).unwrap();
        let grid = RadialDensity::uniform_grid(2.0, 32);
        let opts = EvolveOptions {
            refresh_every: 4,
            ..Default::default()
        };
        let sim = Simulator::new(&p, &grid, opts).unwrap();
        let init = RadialDensity::uniform_ball(3, 0.5, 1.2, 20).unwrap();
        let mut st = sim.start(&init).unwrap();
        for _ in 0..200 {
            sim.step(&mut st).unwrap();
        }
        assert!((st.density.mass(3) - 0.5).abs() < 1e-12);
        assert_eq!(st.energy_history.len(), 51);
    }
}
