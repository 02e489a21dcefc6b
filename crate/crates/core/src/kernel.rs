//! Radial reduction of the power-law kernel |x|^k/k.
//!
//! For radial densities the interaction reduces to the one-dimensional kernel
//! Θ(r, η) = max(r, η)^k ϑ(min/max), with
//! ϑ(s) = d_N F(-k/2, 1 - (k+N)/2; N/2; s²).

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::specfun::{gamma, Hyp2F1};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Model parameters: dimension, kernel exponent, diffusion exponent,
/// confinement switch and total mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub k: f64,
    pub m: f64,
    pub chi: f64,
    pub mass: f64,
}

impl ModelParams {
    pub fn new(n: usize, k: f64, m: f64, chi: f64, mass: f64) -> Result<Self> {
        let p = ModelParams { n, k, m, chi, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.n as f64;
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("dimension {} < 2", self.n)));
        }
        if !(self.k > -nf && self.k < 0.0) {
            return Err(Error::InvalidParams(format!(
                "k = {} outside (-{}, 0)",
                self.k, self.n
            )));
        }
        if !(self.m > 1.0) || !self.m.is_finite() {
            return Err(Error::InvalidParams(format!("m = {} must exceed 1", self.m)));
        }
        if self.chi != 0.0 && self.chi != 1.0 {
            return Err(Error::InvalidParams(format!("chi = {} not in {{0, 1}}", self.chi)));
        }
        if !(self.mass >= 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidParams(format!("mass = {} must be >= 0", self.mass)));
        }
        Ok(())
    }

    /// Fair-competition exponent 1 - k/N.
    pub fn m_c(&self) -> f64 {
        1.0 - self.k / self.n as f64
    }

    /// Upper end of the uniqueness window: (2-k-N)/(1-k-N) for k < 1-N, else ∞.
    pub fn m_star(&self) -> f64 {
        let nf = self.n as f64;
        if self.k < 1.0 - nf {
            (2.0 - self.k - nf) / (1.0 - self.k - nf)
        } else {
            f64::INFINITY
        }
    }

    /// k = 2 - N, where ϑ is constant.
    pub fn is_newtonian(&self) -> bool {
        (self.k - (2.0 - self.n as f64)).abs() < 1e-12
    }

    pub fn is_fair_competition(&self) -> bool {
        (self.m - self.m_c()).abs() < 1e-12
    }

    pub fn with_mass(&self, mass: f64) -> Self {
        ModelParams { mass, ..*self }
    }

    pub fn with_k(&self, k: f64) -> Self {
        ModelParams { k, ..*self }
    }
}

/// σ_N = 2π^{N/2}/Γ(N/2).
pub fn surface_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h).expect("N/2 > 0")
}

/// d_N = 2^{N-2} σ_{N-1} Γ((N-1)/2)² / Γ(N-1).
pub fn d_constant(n: usize) -> f64 {
    assert!(n >= 2, "d_N needs N >= 2");
    let nf = n as f64;
    let g = gamma((nf - 1.0) / 2.0).expect("positive");
    2f64.powf(nf - 2.0) * surface_area(n - 1) * g * g / gamma(nf - 1.0).expect("positive")
}

/// Prepared kernel evaluator for one (N, k).
#[derive(Debug, Clone)]
pub struct Kernel {
    n: usize,
    k: f64,
    dn: f64,
    sigma: f64,
    theta_f: Hyp2F1,
    dtheta_f: Hyp2F1,
    shell_f: Hyp2F1,
    dtheta_scale: f64,
}

impl Kernel {
    pub fn new(n: usize, k: f64) -> Result<Self> {
        let nf = n as f64;
        if n < 2 {
            return Err(Error::InvalidParams(format!("dimension {n} < 2")));
        }
        if !(k > -nf && k < 0.0) {
            return Err(Error::InvalidParams(format!("k = {k} outside (-{n}, 0)")));
        }
        let a = -k / 2.0;
        let b = 1.0 - (k + nf) / 2.0;
        let c = nf / 2.0;
        Ok(Kernel {
            n,
            k,
            dn: d_constant(n),
            sigma: surface_area(n),
            theta_f: Hyp2F1::new(a, b, c)?,
            dtheta_f: Hyp2F1::new(a + 1.0, b + 1.0, c + 1.0)?,
            shell_f: Hyp2F1::new(a, b, c + 1.0)?,
            dtheta_scale: a * b / c,
        })
    }

    pub fn from_params(p: &ModelParams) -> Result<Self> {
        Kernel::new(p.n, p.k)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn d_n(&self) -> f64 {
        self.dn
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// ϑ(s) for 0 ≤ s ≤ 1; at s = 1 only when the limit is finite.
    pub fn theta(&self, s: f64) -> Result<f64> {
        self.theta_c(s, 1.0 - s)
    }

    /// ϑ(s) with 1 - s supplied by the caller.
    pub fn theta_c(&self, s: f64, one_minus_s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("s = {s} outside [0, 1]")));
        }
        if one_minus_s <= 0.0 {
            return self
                .theta_f
                .at_one()
                .map(|v| self.dn * v)
                .map_err(|_| Error::Singularity("ϑ diverges at s = 1".into()));
        }
        let w = one_minus_s * (2.0 - one_minus_s);
        Ok(self.dn * self.theta_f.eval_with_complement(s * s, w)?)
    }

    /// dϑ/ds for 0 ≤ s < 1.
    pub fn theta_prime(&self, s: f64) -> Result<f64> {
        self.theta_prime_c(s, 1.0 - s)
    }

    pub fn theta_prime_c(&self, s: f64, one_minus_s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("s = {s} outside [0, 1]")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let f = if one_minus_s <= 0.0 {
            self.dtheta_f
                .at_one()
                .map_err(|_| Error::Singularity("ϑ' diverges at s = 1".into()))?
        } else {
            let w = one_minus_s * (2.0 - one_minus_s);
            self.dtheta_f.eval_with_complement(s * s, w)?
        };
        Ok(self.dn * 2.0 * s * self.dtheta_scale * f)
    }

    /// ∫₀ˣ ϑ(t) t^{N-1} dt = (d_N/N) x^N F(-k/2, 1-(k+N)/2; N/2+1; x²), finite up to x = 1.
    pub fn shell(&self, x: f64) -> Result<f64> {
        self.shell_c(x, 1.0 - x)
    }

    pub fn shell_c(&self, x: f64, one_minus_x: f64) -> Result<f64> {
        let nf = self.n as f64;
        if x == 0.0 {
            return Ok(0.0);
        }
        let f = if one_minus_x <= 0.0 {
            self.shell_f.at_one()?
        } else {
            let w = one_minus_x * (2.0 - one_minus_x);
            self.shell_f.eval_with_complement(x * x, w)?
        };
        Ok(self.dn / nf * x.powi(self.n as i32) * f)
    }

    /// Θ(r, η) = max^k ϑ(min/max); singular on the diagonal.
    pub fn big_theta(&self, r: f64, eta: f64) -> Result<f64> {
        if !(r > 0.0 && eta > 0.0) {
            if r == 0.0 && eta > 0.0 {
                return Ok(eta.powf(self.k) * self.dn);
            }
            if eta == 0.0 && r > 0.0 {
                return Ok(r.powf(self.k) * self.dn);
            }
            return Err(Error::Domain(format!("Θ needs positive radii ({r}, {eta})")));
        }
        if r == eta {
            return Err(Error::Singularity(format!("Θ on the diagonal r = η = {r}")));
        }
        let (lo, hi) = if r < eta { (r, eta) } else { (eta, r) };
        Ok(hi.powf(self.k) * self.theta_c(lo / hi, (hi - lo) / hi)?)
    }

    /// Angular-quadrature value of Θ(r, η), independent of the series route.
    pub fn big_theta_angular(&self, r: f64, eta: f64) -> Result<f64> {
        big_theta_angular(self.n, self.k, r, eta)
    }
}

/// ϑ(s) for the given parameters.
pub fn theta(params: &ModelParams, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        if s == 1.0 {
            return Kernel::from_params(params)?.theta(1.0);
        }
        return Err(Error::Domain(format!("s = {s} outside [0, 1)")));
    }
    Kernel::from_params(params)?.theta(s)
}

/// ϑ'(s) for the given parameters.
pub fn theta_prime(params: &ModelParams, s: f64) -> Result<f64> {
    Kernel::from_params(params)?.theta_prime(s)
}

/// Θ(r, η) for the given parameters.
pub fn big_theta(params: &ModelParams, r: f64, eta: f64) -> Result<f64> {
    Kernel::from_params(params)?.big_theta(r, eta)
}

/// σ_{N-1} ∫₀^π (r² + η² - 2rη cos θ)^{k/2} sin^{N-2} θ dθ, computed after the
/// substitution t = cos²(θ/2):
/// 2^{N-2} σ_{N-1} (r+η)^k ∫₀¹ (1 - q t)^{k/2} (t(1-t))^{(N-3)/2} dt, q = 4rη/(r+η)².
pub fn big_theta_angular(n: usize, k: f64, r: f64, eta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("dimension {n} < 2")));
    }
    if r == eta {
        return Err(Error::Singularity(format!("Θ on the diagonal r = η = {r}")));
    }
    let nf = n as f64;
    let sum = r + eta;
    let q = 4.0 * r * eta / (sum * sum);
    // 1 - q = ((r - η)/(r + η))², kept exact for near-diagonal pairs
    let gap = (r - eta) / sum;
    let one_minus_q = gap * gap;
    let p = (nf - 1.0) / 2.0;
    let tol = Tolerance {
        rel: 1e-13,
        abs: 0.0,
        max_intervals: 5000,
    };
    // t near 0: weight t^{p-1}
    let left = quad::power_weighted_left(
        |t| (1.0 - q * t).powf(k / 2.0) * (1.0 - t).powf(p - 1.0),
        p,
        0.5,
        tol,
    )?;
    // t near 1: v = 1 - t, weight v^{p-1}; 1 - q t = (1 - q) + q v
    let right = quad::power_weighted_left(
        |v| (one_minus_q + q * v).powf(k / 2.0) * (1.0 - v).powf(p - 1.0),
        p,
        0.5,
        tol,
    )?;
    Ok(2f64.powf(nf - 2.0) * surface_area(n - 1) * sum.powf(k) * (left + right))
}

/// ϑ(s) by angular quadrature.
pub fn theta_angular(n: usize, k: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(d_constant(n));
    }
    big_theta_angular(n, k, 1.0, s)
}
