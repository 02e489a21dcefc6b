//! Piecewise-constant radial densities.

use crate::error::{Error, Result};
use crate::kernel::{surface_area, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// A radial profile constant on each cell [r_j, r_{j+1}], zero beyond r_J.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl RadialDensity {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || grid.len() != values.len() + 1 {
            return Err(Error::InvalidDensity(format!(
                "grid has {} nodes for {} cells",
                grid.len(),
                values.len()
            )));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidDensity("grid must start at r = 0".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidDensity("grid must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDensity(format!("value {v} is not a finite nonnegative number")));
        }
        Ok(RadialDensity { grid, values })
    }

    /// Uniform grid of `cells` cells on [0, r_max].
    pub fn uniform_grid(r_max: f64, cells: usize) -> Vec<f64> {
        (0..=cells).map(|j| r_max * j as f64 / cells as f64).collect()
    }

    /// Constant density of total mass `mass` on the ball of radius `radius`,
    /// on a uniform grid of `cells` cells.
    pub fn uniform_ball(n: usize, mass: f64, radius: f64, cells: usize) -> Result<Self> {
        if !(radius > 0.0) || cells == 0 {
            return Err(Error::InvalidDensity("ball needs positive radius and cells".into()));
        }
        let rho0 = mass * n as f64 / (surface_area(n) * radius.powi(n as i32));
        RadialDensity::new(Self::uniform_grid(radius, cells), vec![rho0; cells])
    }

    /// Sample `f` at cell midpoints of `grid`.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Vec<f64>, f: F) -> Result<Self> {
        let values = grid.windows(2).map(|w| f(0.5 * (w[0] + w[1])).max(0.0)).collect();
        RadialDensity::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn outer_radius(&self) -> f64 {
        *self.grid.last().expect("nonempty grid")
    }

    /// (r_{j+1}^N - r_j^N)/N: cell volume without the σ_N factor.
    pub fn cell_weight(&self, n: usize, j: usize) -> f64 {
        let ni = n as i32;
        (self.grid[j + 1].powi(ni) - self.grid[j].powi(ni)) / n as f64
    }

    pub fn cell_weights(&self, n: usize) -> Vec<f64> {
        (0..self.cells()).map(|j| self.cell_weight(n, j)).collect()
    }

    pub fn mass(&self, n: usize) -> f64 {
        surface_area(n) * (0..self.cells()).map(|j| self.values[j] * self.cell_weight(n, j)).sum::<f64>()
    }

    /// M_ρ(r) = σ_N ∫₀^r ρ(s) s^{N-1} ds.
    pub fn cumulative_mass(&self, n: usize, r: f64) -> f64 {
        let ni = n as i32;
        let mut acc = 0.0;
        for j in 0..self.cells() {
            let (lo, hi) = (self.grid[j], self.grid[j + 1]);
            if r >= hi {
                acc += self.values[j] * (hi.powi(ni) - lo.powi(ni));
            } else {
                if r > lo {
                    acc += self.values[j] * (r.powi(ni) - lo.powi(ni));
                }
                break;
            }
        }
        surface_area(n) * acc / n as f64
    }

    /// Cumulative masses at every node.
    pub fn node_masses(&self, n: usize) -> Vec<f64> {
        let s = surface_area(n);
        let mut out = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        out.push(0.0);
        for j in 0..self.cells() {
            acc += self.values[j] * self.cell_weight(n, j);
            out.push(s * acc);
        }
        out
    }

    /// σ_N ∫ r² ρ r^{N-1} dr.
    pub fn second_moment(&self, n: usize) -> f64 {
        let p = n as i32 + 2;
        let s: f64 = (0..self.cells())
            .map(|j| self.values[j] * (self.grid[j + 1].powi(p) - self.grid[j].powi(p)))
            .sum();
        surface_area(n) * s / (n as f64 + 2.0)
    }

    /// σ_N ∫ ρ^m r^{N-1} dr.
    pub fn power_integral(&self, n: usize, m: f64) -> f64 {
        surface_area(n)
            * (0..self.cells())
                .map(|j| self.values[j].powf(m) * self.cell_weight(n, j))
                .sum::<f64>()
    }

    /// ρ_λ(r) = λ^N ρ(λ r): grid divided by λ, values multiplied by λ^N.
    pub fn dilate(&self, lambda: f64, n: usize) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("dilation factor {lambda} must be positive")));
        }
        let f = lambda.powi(n as i32);
        RadialDensity::new(
            self.grid.iter().map(|r| r / lambda).collect(),
            self.values.iter().map(|v| v * f).collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        RadialDensity::new(self.grid.clone(), self.values.iter().map(|v| v * factor).collect())
    }

    /// Rescale values so that the mass equals `mass`.
    pub fn normalized(&self, n: usize, mass: f64) -> Result<Self> {
        let cur = self.mass(n);
        if !(cur > 0.0) {
            return Err(Error::Degenerate("cannot normalize a zero-mass density".into()));
        }
        self.scaled(mass / cur)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Right end of the last cell carrying positive density.
    pub fn support_radius(&self) -> f64 {
        match self.values.iter().rposition(|v| *v > 0.0) {
            Some(j) => self.grid[j + 1],
            None => 0.0,
        }
    }

    /// Number of cells carrying positive density.
    pub fn support_cells(&self) -> usize {
        self.values.iter().filter(|v| **v > 0.0).count()
    }

    /// Value at radius r (right-continuous on cell boundaries).
    pub fn value_at(&self, r: f64) -> f64 {
        if r < 0.0 || r >= self.outer_radius() {
            return 0.0;
        }
        let j = self.grid.partition_point(|x| *x <= r) - 1;
        self.values[j.min(self.cells() - 1)]
    }

    /// Admissible reference class: nonincreasing with the configured mass.
    pub fn check_membership(&self, params: &ModelParams) -> Result<()> {
        if !self.is_nonincreasing() {
            return Err(Error::InvalidDensity("profile is not nonincreasing".into()));
        }
        let m = self.mass(params.n);
        if (m - params.mass).abs() > 1e-12 * params.mass.max(1.0) {
            return Err(Error::MassMismatch {
                source_mass: m,
                target_mass: params.mass,
            });
        }
        Ok(())
    }

    /// Exact L¹ distance σ_N ∫ |ρ - μ| r^{N-1} dr between piecewise-constant profiles.
    pub fn l1_distance(&self, other: &RadialDensity, n: usize) -> f64 {
        let mut nodes: Vec<f64> = self.grid.iter().chain(other.grid.iter()).copied().collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let ni = n as i32;
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let d = (self.value_at(mid) - other.value_at(mid)).abs();
            acc += d * (w[1].powi(ni) - w[0].powi(ni));
        }
        surface_area(n) * acc / n as f64
    }

    /// Cell averages of this density over the cells of `grid` (mass-preserving projection).
    pub fn project(&self, grid: &[f64], n: usize) -> Result<Self> {
        let ni = n as i32;
        let mut values = Vec::with_capacity(grid.len() - 1);
        for w in grid.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut acc = 0.0;
            for j in 0..self.cells() {
                let a = self.grid[j].max(lo);
                let b = self.grid[j + 1].min(hi);
                if b > a {
                    acc += self.values[j] * (b.powi(ni) - a.powi(ni));
                }
            }
            values.push(acc / (hi.powi(ni) - lo.powi(ni)));
        }
        RadialDensity::new(grid.to_vec(), values)
    }

    /// CSV with header `r,rho`: one row per node, the last row carrying the
    /// zero value beyond the outer radius.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,rho\n");
        for j in 0..=self.cells() {
            let v = if j < self.cells() { self.values[j] } else { 0.0 };
            let _ = writeln!(s, "{:.16e},{:.16e}", self.grid[j], v);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                header_seen = true;
                if line.replace(' ', "") != "r,rho" {
                    return Err(Error::InvalidDensity(format!(
                        "line {}: expected header `r,rho`",
                        lineno + 1
                    )));
                }
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.map(str::trim)
                    .ok_or_else(|| Error::InvalidDensity(format!("line {}: missing column", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidDensity(format!("line {}: {e}", lineno + 1)))
            };
            grid.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        if grid.len() < 2 {
            return Err(Error::InvalidDensity("need at least two rows".into()));
        }
        let last = values.pop().expect("nonempty");
        if last != 0.0 {
            return Err(Error::InvalidDensity(
                "last row marks the outer radius and must carry rho = 0".into(),
            ));
        }
        RadialDensity::new(grid, values)
    }
}

pub fn mass(rho: &RadialDensity, params: &ModelParams) -> f64 {
    rho.mass(params.n)
}

pub fn cumulative_mass(rho: &RadialDensity, params: &ModelParams, r: f64) -> f64 {
    rho.cumulative_mass(params.n, r)
}

pub fn second_moment(rho: &RadialDensity, params: &ModelParams) -> f64 {
    rho.second_moment(params.n)
}

/// Deterministic random member of Y_M^*: sorted nonnegative draws on a uniform
/// grid whose radius is also drawn, normalized to the configured mass.
pub fn random_decreasing(seed: u64, params: &ModelParams, cells: usize) -> Result<RadialDensity> {
    if cells < 4 {
        return Err(Error::InvalidDensity(format!("need at least 4 cells, got {cells}")));
    }
    if !(params.mass > 0.0) {
        return Err(Error::Degenerate("random density needs positive mass".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = (rng.random_range(-1.0f64..1.0) * 0.9).exp() * 1.3;
    let shape = rng.random_range(0.3f64..3.0);
    let zero_frac = rng.random_range(0.0f64..0.5);
    let mut values: Vec<f64> = (0..cells)
        .map(|_| {
            if rng.random::<f64>() < zero_frac {
                0.0
            } else {
                rng.random::<f64>().powf(shape)
            }
        })
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    if values[0] == 0.0 {
        values[0] = 1.0;
    }
    let rho = RadialDensity::new(RadialDensity::uniform_grid(radius, cells), values)?;
    rho.normalized(params.n, params.mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_mass_and_moments() {
        let rho = RadialDensity::uniform_ball(3, 2.0, 1.5, 17).unwrap();
        assert!((rho.mass(3) - 2.0).abs() < 1e-14);
        assert!((rho.cumulative_mass(3, 0.75) - 2.0 / 8.0).abs() < 1e-14);
        assert_eq!(rho.cumulative_mass(3, 0.0), 0.0);
        assert!((rho.cumulative_mass(3, 5.0) - 2.0).abs() < 1e-14);
        assert!((rho.second_moment(3) - 3.0 * 2.0 * 1.5 * 1.5 / 5.0).abs() < 1e-13);
        let zero = RadialDensity::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        assert_eq!(zero.mass(3), 0.0);
        assert_eq!(zero.second_moment(3), 0.0);
    }

    #[test]
    fn dilation_preserves_mass() {
        let rho = RadialDensity::uniform_ball(2, 1.0, 1.0, 8).unwrap();
        let d = rho.dilate(2.0, 2).unwrap();
        assert!((d.mass(2) - 1.0).abs() < 1e-14);
        assert!((d.second_moment(2) - rho.second_moment(2) / 4.0).abs() < 1e-14);
        assert!((d.values()[0] - 4.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn csv_round_trip() {
        let rho = random_decreasing(7, &ModelParams::new(3, -1.0, 2.0, 0.0, 1.0).unwrap(), 9).unwrap();
        let back = RadialDensity::from_csv(&rho.to_csv()).unwrap();
        assert_eq!(back, rho);
        assert!(RadialDensity::from_csv("r,rho\n0,1\n1,1\n").is_err());
        assert!(RadialDensity::from_csv("x,y\n0,1\n1,0\n").is_err());
    }

    #[test]
    fn random_densities_are_admissible_and_deterministic() {
        let p = ModelParams::new(3, -1.5, 1.5, 0.0, 0.7).unwrap();
        for seed in 0..1000 {
            let rho = random_decreasing(seed, &p, 12).unwrap();
            rho.check_membership(&p).unwrap();
        }
        assert_eq!(random_decreasing(3, &p, 10).unwrap(), random_decreasing(3, &p, 10).unwrap());
    }

    #[test]
    fn l1_and_projection() {
        let a = RadialDensity::uniform_ball(3, 1.0, 1.0, 4).unwrap();
        let b = RadialDensity::uniform_ball(3, 1.0, 2.0, 3).unwrap();
        // disjoint-ish overlap: |ρa - ρb| integrated exactly
        let (ra, rb) = (a.values()[0], b.values()[0]);
        let exact = 4.0 * PI / 3.0 * ((ra - rb) * 1.0 + rb * (8.0 - 1.0));
        assert!((a.l1_distance(&b, 3) - exact).abs() < 1e-13);
        let p = a.project(&RadialDensity::uniform_grid(1.0, 7), 3).unwrap();
        assert!((p.mass(3) - 1.0).abs() < 1e-14);
        assert!(a.l1_distance(&p, 3) < 1e-13);
    }
}
