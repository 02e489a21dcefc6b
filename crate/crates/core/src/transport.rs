//! Monotone radial transport between two densities of equal mass.
//!
//! Both densities are piecewise constant, so on the common refinement of
//! their cumulative-mass levels the map is exact: inside a piece
//! ρ̄ (a^N - a₀^N) = ρ (ψ'(a)^N - r₀^N), hence (ψ')^N is affine in a^N and the
//! Jacobian factor φ = ρ̄/ρ is constant.

use crate::density::RadialDensity;
use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::kernel::{surface_area, Kernel, ModelParams};
use crate::quad::{self, GaussLegendre};
use rayon::prelude::*;
use serde::Serialize;

const MASS_TOL: f64 = 1e-10;
const OUTER_ORDER: usize = 8;
/// Outer-piece breakpoints, graded toward both ends.
const OUTER_BREAKS: [f64; 9] = [0.0, 1e-3, 0.02, 0.15, 0.5, 0.85, 0.98, 0.999, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    n: usize,
    /// source radii a_p bounding the pieces
    source_grid: Vec<f64>,
    /// ψ'(a_p)
    psi_prime: Vec<f64>,
    /// φ on each piece
    phi: Vec<f64>,
    /// source density on each piece
    source_values: Vec<f64>,
}

/// Radius where the cumulative mass of `rho` reaches `level`, inside cell j.
fn invert_in_cell(n: usize, grid: &[f64], node_mass: &[f64], value: f64, j: usize, level: f64) -> f64 {
    let nf = n as f64;
    let lo = grid[j];
    let add = nf * (level - node_mass[j]) / (surface_area(n) * value);
    (lo.powi(n as i32) + add.max(0.0)).powf(1.0 / nf).min(grid[j + 1])
}

pub fn build_map(source: &RadialDensity, target: &RadialDensity, n: usize) -> Result<TransportMap> {
    let ms = source.node_masses(n);
    let mt = target.node_masses(n);
    let (total_s, total_t) = (*ms.last().unwrap(), *mt.last().unwrap());
    if (total_s - total_t).abs() > MASS_TOL * total_s.abs().max(total_t.abs()) {
        return Err(Error::MassMismatch {
            source_mass: total_s,
            target_mass: total_t,
        });
    }
    if !(total_s > 0.0) || target.support_radius() == 0.0 {
        return Err(Error::Degenerate("transport needs a target with positive support".into()));
    }
    // target levels rescaled so both totals agree exactly
    let scale = total_s / total_t;
    let mt: Vec<f64> = mt.iter().map(|m| m * scale).collect();
    let tvals: Vec<f64> = target.values().iter().map(|v| v * scale).collect();

    // merged mass levels of all positive-density cells
    let mut levels: Vec<f64> = Vec::new();
    for (j, m) in ms.iter().enumerate().skip(1) {
        if source.values()[j - 1] > 0.0 {
            levels.push(*m);
        }
    }
    for (j, m) in mt.iter().enumerate().skip(1) {
        if tvals[j - 1] > 0.0 {
            levels.push(*m);
        }
    }
    levels.push(0.0);
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * total_s);
    if let Some(last) = levels.last_mut() {
        *last = total_s;
    }

    let locate = |nodes: &[f64], values: &[f64], level: f64| -> usize {
        // first positive cell whose upper cumulative mass reaches the level
        let mut j = nodes.partition_point(|m| *m < level).saturating_sub(1);
        while j + 1 < nodes.len() - 1 && (values[j] == 0.0 || nodes[j + 1] < level) {
            j += 1;
        }
        j
    };

    let mut a = Vec::with_capacity(levels.len());
    let mut r = Vec::with_capacity(levels.len());
    let mut phi = Vec::with_capacity(levels.len());
    let mut sv = Vec::with_capacity(levels.len());
    a.push(0.0);
    r.push(0.0);
    for w in levels.windows(2) {
        let (l0, l1) = (w[0], w[1]);
        if l1 <= l0 {
            continue;
        }
        let mid = 0.5 * (l0 + l1);
        let js = locate(&ms, source.values(), mid);
        let jt = locate(&mt, &tvals, mid);
        let (vs, vt) = (source.values()[js], tvals[jt]);
        if !(vs > 0.0 && vt > 0.0) {
            return Err(Error::Degenerate("mass level falls outside a support".into()));
        }
        a.push(invert_in_cell(n, source.grid(), &ms, vs, js, l1));
        r.push(invert_in_cell(n, target.grid(), &mt, vt, jt, l1));
        phi.push(vs / vt);
        sv.push(vs);
    }
    Ok(TransportMap {
        n,
        source_grid: a,
        psi_prime: r,
        phi,
        source_values: sv,
    })
}

impl TransportMap {
    pub fn source_grid(&self) -> &[f64] {
        &self.source_grid
    }

    pub fn psi_prime_nodes(&self) -> &[f64] {
        &self.psi_prime
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn pieces(&self) -> usize {
        self.phi.len()
    }

    pub fn support_radius(&self) -> f64 {
        *self.source_grid.last().unwrap()
    }

    fn piece_of(&self, a: f64) -> usize {
        self.source_grid
            .partition_point(|x| *x <= a)
            .saturating_sub(1)
            .min(self.pieces() - 1)
    }

    /// ψ'(a) for a in the source support.
    pub fn psi_prime(&self, a: f64) -> f64 {
        let p = self.piece_of(a);
        self.psi_prime_in(p, a)
    }

    fn psi_prime_in(&self, p: usize, a: f64) -> f64 {
        let ni = self.n as i32;
        let (a0, r0) = (self.source_grid[p], self.psi_prime[p]);
        let x = r0.powi(ni) + (a.powi(ni) - a0.powi(ni)) * self.phi[p];
        x.max(0.0).powf(1.0 / self.n as f64)
    }

    /// ψ'(hi) - ψ'(hi - d) inside piece p, accurate for small d.
    fn psi_difference(&self, p: usize, hi: f64, d: f64, r_hi: f64, r_lo: f64) -> f64 {
        let lo = hi - d;
        let (mut sa, mut sr) = (0.0, 0.0);
        for i in 0..self.n {
            let j = (self.n - 1 - i) as i32;
            sa += hi.powi(i as i32) * lo.powi(j);
            sr += r_hi.powi(i as i32) * r_lo.powi(j);
        }
        if sr == 0.0 {
            return r_hi - r_lo;
        }
        self.phi[p] * d * sa / sr
    }

    /// φ at a point of the source support.
    pub fn phi_at(&self, a: f64) -> f64 {
        self.phi[self.piece_of(a)]
    }

    /// ∫_lo^hi φ(s)^q s^{N-1} ds, exact for the piecewise-constant φ.
    pub fn phi_power_integral(&self, q: f64, lo: f64, hi: f64) -> f64 {
        let ni = self.n as i32;
        let mut acc = 0.0;
        for p in 0..self.pieces() {
            let (x0, x1) = (self.source_grid[p].max(lo), self.source_grid[p + 1].min(hi));
            if x1 > x0 {
                acc += self.phi[p].powf(q) * (x1.powi(ni) - x0.powi(ni));
            }
        }
        acc / self.n as f64
    }

    /// Rows (a, ψ'(a), φ) at the piece boundaries; φ is that of the piece to the left.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        (0..=self.pieces())
            .map(|i| {
                let phi = self.phi[i.saturating_sub(1).min(self.pieces() - 1)];
                (self.source_grid[i], self.psi_prime[i], phi)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,psi_prime,phi\n");
        for (a, r, f) in self.rows() {
            out.push_str(&format!("{a:.16e},{r:.16e},{f:.16e}\n"));
        }
        out
    }

    /// The pushed-forward density ρ̄/φ on the image grid.
    pub fn target_density(&self) -> Result<RadialDensity> {
        let vals = self
            .phi
            .iter()
            .zip(&self.source_values)
            .map(|(f, v)| v / f)
            .collect();
        RadialDensity::new(self.psi_prime.clone(), vals)
    }
}

/// F[ρ] for ρ = ψ'#ρ̄, evaluated in the source variable a.
pub fn pushforward_energy(map: &TransportMap, params: &ModelParams) -> Result<EnergyBreakdown> {
    let n = map.n;
    let ni = n as i32;
    let nf = n as f64;
    let m = params.m;
    let sigma = surface_area(n);
    let k = params.k;
    let pieces = map.pieces();
    let ker = Kernel::from_params(params)?;

    let mut ent = 0.0;
    for p in 0..pieces {
        let (lo, hi) = (map.source_grid[p], map.source_grid[p + 1]);
        ent += map.phi[p].powf(1.0 - m) * map.source_values[p].powf(m) * (hi.powi(ni) - lo.powi(ni)) / nf;
    }
    let entropy = sigma * ent / (m - 1.0);

    let gl = GaussLegendre::new(10);
    let mut conf = 0.0;
    if params.chi != 0.0 {
        for p in 0..pieces {
            let (lo, hi) = (map.source_grid[p], map.source_grid[p + 1]);
            let v = map.source_values[p];
            conf += v * gl.integrate(lo, hi, |a| {
                let r = map.psi_prime_in(p, a);
                r * r * a.powi(ni - 1)
            });
        }
    }
    let confinement = 0.5 * params.chi * sigma * conf;

    // (σ/k) ∬_{b<a} ψ'(a)^k ϑ(ψ'(b)/ψ'(a)) db̄ dā, outer piece by outer piece;
    // the inner integral has a weak power singularity at the piece ends
    let outer_rule = GaussLegendre::new(OUTER_ORDER);
    let inter = (0..pieces)
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let (lo, hi) = (map.source_grid[p], map.source_grid[p + 1]);
            let vp = map.source_values[p];
            let mut acc = 0.0;
            let nodes = OUTER_BREAKS.windows(2).flat_map(|t| {
                let (x0, x1) = (lo + t[0] * (hi - lo), lo + t[1] * (hi - lo));
                outer_rule.mapped(x0, x1).collect::<Vec<_>>()
            });
            for (a, wa) in nodes {
                let ra = map.psi_prime_in(p, a);
                let mut inner = 0.0;
                for q in 0..=p {
                    let (b0, b1) = (map.source_grid[q], map.source_grid[q + 1].min(a));
                    if b1 <= b0 {
                        continue;
                    }
                    let vq = map.source_values[q];
                    let r_top = map.psi_prime_in(q, b1);
                    let f = |b: f64, db: f64| -> Result<f64> {
                        let rb = map.psi_prime_in(q, b);
                        let gap = (ra - r_top) + map.psi_difference(q, b1, db, r_top, rb);
                        Ok(ker.theta_c(rb / ra, gap / ra)? * b.powi(ni - 1))
                    };
                    inner += vq
                        * if a - b1 >= b1 - b0 {
                            // change variables to r = ψ'(b): ρ̄ b^{N-1} db = (ρ̄/φ) r^{N-1} dr
                            let (r0, r1) = (map.psi_prime[q], map.psi_prime_in(q, b1));
                            let sh = ker.shell_c(r1 / ra, (ra - r1) / ra)? - ker.shell_c(r0 / ra, (ra - r0) / ra)?;
                            ra.powi(ni) * sh / map.phi[q]
                        } else {
                            let mut err = None;
                            let v = quad::tanh_sinh(
                                |b, _, db| match f(b, db) {
                                    Ok(v) => v,
                                    Err(e) => {
                                        err = Some(e);
                                        f64::NAN
                                    }
                                },
                                b0,
                                b1,
                                1e-10,
                            )?;
                            if let Some(e) = err {
                                if !v.is_finite() {
                                    return Err(e);
                                }
                            }
                            v
                        };
                }
                acc += wa * ra.powf(k) * inner * a.powi(ni - 1);
            }
            Ok(vp * acc)
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum::<f64>();
    let interaction = sigma * inter / k;
    Ok(EnergyBreakdown::new(entropy, interaction, confinement))
}

/// Minimum over sampled radii of the three Jensen bounds, each as
/// (bound - value)/|value| with the sign that makes it nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JensenGaps {
    /// N a^{k-N} ∫₀^a φ^{k/N} s^{N-1} ds - ψ'(a)^k
    pub interaction_origin: f64,
    /// N (a^N - b^N)^{k/N-1} ∫_b^a φ^{k/N} s^{N-1} ds - (ψ'(a)^N - ψ'(b)^N)^{k/N}
    pub interaction_pair: f64,
    /// ψ'(a)² - N a^{2-N} ∫₀^a φ^{2/N} s^{N-1} ds
    pub confinement: f64,
    /// largest gap seen over all samples and all three bounds
    pub largest: f64,
    pub samples: usize,
}

pub fn jensen_gap(map: &TransportMap, params: &ModelParams) -> JensenGaps {
    let n = map.n;
    let nf = n as f64;
    let k = params.k;
    // sample at piece midpoints and boundaries inside the support
    let mut pts: Vec<f64> = Vec::new();
    for p in 0..map.pieces() {
        let (lo, hi) = (map.source_grid[p], map.source_grid[p + 1]);
        pts.push(0.5 * (lo + hi));
        if lo > 0.0 {
            pts.push(lo);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if pts.len() > 64 {
        let step = pts.len() as f64 / 64.0;
        pts = (0..64).map(|i| pts[(i as f64 * step) as usize]).collect();
    }
    let rel = |bound: f64, value: f64| (bound - value) / value.abs().max(f64::MIN_POSITIVE);
    let mut g1 = f64::INFINITY;
    let mut g3 = f64::INFINITY;
    let mut largest = f64::NEG_INFINITY;
    for &a in &pts {
        let ra = map.psi_prime(a);
        let b1 = nf * a.powf(k - nf) * map.phi_power_integral(k / nf, 0.0, a);
        let v1 = rel(b1, ra.powf(k));
        let b3 = nf * a.powf(2.0 - nf) * map.phi_power_integral(2.0 / nf, 0.0, a);
        let v3 = -rel(b3, ra * ra);
        g1 = g1.min(v1);
        g3 = g3.min(v3);
        largest = largest.max(v1).max(v3);
    }
    let (g2, l2) = pts
        .par_iter()
        .map(|&a| {
            let ra = map.psi_prime(a);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &b in pts.iter().take_while(|b| **b < a * (1.0 - 1e-6)) {
                let rb = map.psi_prime(b);
                let an = a.powf(nf) - b.powf(nf);
                let bound = nf * an.powf(k / nf - 1.0) * map.phi_power_integral(k / nf, b, a);
                let value = (ra.powf(nf) - rb.powf(nf)).powf(k / nf);
                let g = rel(bound, value);
                lo = lo.min(g);
                hi = hi.max(g);
            }
            (lo, hi)
        })
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |x, y| (x.0.min(y.0), x.1.max(y.1)));
    JensenGaps {
        interaction_origin: g1,
        interaction_pair: g2,
        confinement: g3,
        largest: largest.max(l2),
        samples: pts.len(),
    }
}

/// z^{1-m}/(m-1) - z^{1-m_c}/(m_c-1) - (1/(m-1) - 1/(m_c-1)), nonnegative for m ≥ m_c.
pub fn entropy_z_gap(z: f64, m: f64, m_c: f64) -> f64 {
    z.powf(1.0 - m) / (m - 1.0) - z.powf(1.0 - m_c) / (m_c - 1.0) - (1.0 / (m - 1.0) - 1.0 / (m_c - 1.0))
}

/// z^{2/N}/2 - z^{k/N}/k - (1/2 - 1/k), nonnegative for k < 0.
pub fn confinement_z_gap(z: f64, n: usize, k: f64) -> f64 {
    let nf = n as f64;
    z.powf(2.0 / nf) / 2.0 - z.powf(k / nf) / k - (0.5 - 1.0 / k)
}

/// The lower bound on F[ρ] obtained before the z-inequalities are applied:
/// Nσ[(1/N)∫(φ^{1-m}/(m-1) - φ^{1-m_c}/(m_c-1)) ρ̄^m a^{N-1} da
///    + χ ∫∫_{s<a} (φ(s)^{2/N}/2 - φ(s)^{k/N}/k) s^{N-1} a^{2-N} ds dā].
pub fn transport_lower_bound(map: &TransportMap, params: &ModelParams) -> f64 {
    let n = map.n;
    let ni = n as i32;
    let nf = n as f64;
    let (m, k) = (params.m, params.k);
    let mc = 1.0 - k / nf;
    let sigma = surface_area(n);
    let mut first = 0.0;
    let mut second = 0.0;
    let gl = GaussLegendre::new(8);
    for p in 0..map.pieces() {
        let (lo, hi) = (map.source_grid[p], map.source_grid[p + 1]);
        let v = map.source_values[p];
        let f = map.phi[p];
        first += (f.powf(1.0 - m) / (m - 1.0) - f.powf(1.0 - mc) / (mc - 1.0)) * v.powf(m) * (hi.powi(ni) - lo.powi(ni))
            / nf;
        if params.chi != 0.0 {
            second += v * gl.integrate(lo, hi, |a| {
                let inner = map.phi_power_integral(2.0 / nf, 0.0, a) / 2.0 - map.phi_power_integral(k / nf, 0.0, a) / k;
                inner * a.powf(2.0 - nf) * a.powi(ni - 1)
            });
        }
    }
    nf * sigma * (first / nf + params.chi * second)
}

/// F[ρ] - F[ρ̄] over seeded random nonincreasing densities of the same mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub reference_energy: f64,
    /// (seed, F[ρ] - F[ρ̄]) per trial
    pub gaps: Vec<(u64, f64)>,
    pub min_gap: f64,
    pub worst_seed: u64,
}

impl FuzzReport {
    /// True when every gap is at least -tol.
    pub fn holds(&self, tol: f64) -> bool {
        self.min_gap >= -tol
    }
}

pub fn inequality_fuzz(
    params: &ModelParams,
    reference: &RadialDensity,
    trials: usize,
    seed: u64,
    cells: usize,
) -> Result<FuzzReport> {
    let reference_energy = crate::energy::evaluate(reference, params)?.total;
    let gaps = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            let rho = crate::density::random_decreasing(s, params, cells)?;
            Ok((s, crate::energy::evaluate(&rho, params)?.total - reference_energy))
        })
        .collect::<Result<Vec<_>>>()?;
    let (worst_seed, min_gap) = gaps
        .iter()
        .cloned()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((seed, f64::INFINITY));
    Ok(FuzzReport {
        reference_energy,
        gaps,
        min_gap,
        worst_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn identity_map() {
        let rho = RadialDensity::new(vec![0.0, 0.4, 0.9, 1.3], vec![1.5, 0.7, 0.2]).unwrap();
        let map = build_map(&rho, &rho, 3).unwrap();
        for (a, r, f) in map.rows() {
            assert!((a - r).abs() < 1e-14);
            assert!((f - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dilation_map() {
        let rho = RadialDensity::new(vec![0.0, 0.4, 0.9, 1.3], vec![1.5, 0.7, 0.2]).unwrap();
        let lam = 1.7;
        let d = rho.dilate(lam, 3).unwrap();
        let map = build_map(&rho, &d, 3).unwrap();
        for (a, r, f) in map.rows() {
            assert!((r - a / lam).abs() < 1e-14);
            assert!(rel(f, lam.powi(-3)) < 1e-13);
        }
    }

    #[test]
    fn mass_mismatch_rejected() {
        let a = RadialDensity::uniform_ball(3, 1.0, 1.0, 4).unwrap();
        let b = RadialDensity::uniform_ball(3, 1.1, 1.0, 4).unwrap();
        assert!(matches!(build_map(&a, &b, 3), Err(Error::MassMismatch { .. })));
    }

    #[test]
    fn z_gaps() {
        for &z in &[0.5, 2.0] {
            assert!(entropy_z_gap(z, 2.0, 1.5) > 0.0);
            assert!(confinement_z_gap(z, 3, -1.5) > 0.0);
        }
        assert!(entropy_z_gap(1.0, 2.0, 1.5).abs() < 1e-15);
        assert!(confinement_z_gap(1.0, 3, -1.5).abs() < 1e-15);
    }
}
