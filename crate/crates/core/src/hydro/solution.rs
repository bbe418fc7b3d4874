use serde::{Deserialize, Serialize};

use super::phi::PhiEvaluator;
use crate::error::{Result, ZrpError};
use crate::rates::RateFunction;

/// Macroscopic initial condition: solid occupancies `u_1 >= u_2 >= ... >= 0`
/// (per site, in units of `n`) and total density `ρ >= Σ u_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    u: Vec<f64>,
    rho: f64,
}

impl Profile {
    /// Trailing zeros are dropped.
    pub fn new(mut u: Vec<f64>, rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(ZrpError::InvalidProfile(format!(
                "density must be finite and nonnegative, got {rho}"
            )));
        }
        if let Some(bad) = u.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(ZrpError::InvalidProfile(format!(
                "entries must be finite and nonnegative, got {bad}"
            )));
        }
        if let Some(k) = u.windows(2).position(|w| w[1] > w[0]) {
            return Err(ZrpError::InvalidProfile(format!(
                "not nonincreasing at position {}",
                k + 2
            )));
        }
        let total: f64 = u.iter().sum();
        if total > rho * (1.0 + 1e-12) + 1e-15 {
            return Err(ZrpError::InvalidProfile(format!(
                "solid mass {total} exceeds density {rho}"
            )));
        }
        while u.last() == Some(&0.0) {
            u.pop();
        }
        Ok(Self { u, rho })
    }

    /// All mass on one site: `u = (ρ)`.
    pub fn condensed(rho: f64) -> Result<Self> {
        Self::new(vec![rho], rho)
    }

    pub fn liquid(rho: f64) -> Result<Self> {
        Self::new(Vec::new(), rho)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Number of nonzero solid entries `L`.
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn solid_mass(&self) -> f64 {
        self.u.iter().sum()
    }

    /// `u_k` for 1-based `k`, zero beyond `L`.
    pub fn u_at(&self, k: usize) -> f64 {
        if k == 0 {
            return f64::INFINITY;
        }
        self.u.get(k - 1).copied().unwrap_or(0.0)
    }
}

/// Explicit dissolution function `f` for a profile, described by the
/// densities `ρ_k = ρ + k u_{k+1} - Σ_{i<=k} u_i` and the times
/// `t_k = Σ_{i>=k} (Φ(ρ_{i-1}) - Φ(ρ_i)) / i` at which `f` reaches `u_k`.
///
/// On `[t_{k+1}, t_k)` with `k >= 1`,
/// `f(t) = u_{k+1} + (Φ^{-1}(Φ(ρ_k) + k (t - t_{k+1})) - ρ_k) / k`.
/// On `[t_1, ∞)` the solid phase is gone and `f` grows linearly with slope
/// `1 - Ψ^{-1}(ρ)`.
#[derive(Debug, Clone)]
pub struct HydroSolution {
    profile: Profile,
    phi: PhiEvaluator,
    /// `ρ_0..=ρ_L`.
    rho_seq: Vec<f64>,
    /// `Φ(ρ_0)..=Φ(ρ_L)`.
    phi_rho: Vec<f64>,
    /// `t_1..=t_L`.
    t_seq: Vec<f64>,
    liquid_slope: f64,
}

impl HydroSolution {
    pub fn new(rate: &RateFunction, profile: &Profile) -> Self {
        let rho = profile.rho();
        let l = profile.len();
        let phi = PhiEvaluator::new(rate, rho);
        let mut rho_seq = Vec::with_capacity(l + 1);
        let mut partial = 0.0;
        for k in 0..=l {
            if k > 0 {
                partial += profile.u_at(k);
            }
            let r = rho + k as f64 * profile.u_at(k + 1) - partial;
            rho_seq.push(r.max(0.0));
        }
        let phi_rho: Vec<f64> = rho_seq.iter().map(|&r| phi.phi(r)).collect();
        let mut t_seq = vec![0.0; l];
        let mut acc = 0.0;
        for k in (1..=l).rev() {
            acc += (phi_rho[k - 1] - phi_rho[k]) / k as f64;
            t_seq[k - 1] = acc;
        }
        let liquid_slope = 1.0 - rate.psi_inv_unchecked(rho);
        Self {
            profile: profile.clone(),
            phi,
            rho_seq,
            phi_rho,
            t_seq,
            liquid_slope,
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn phi(&self) -> &PhiEvaluator {
        &self.phi
    }

    /// `ρ_0, ..., ρ_L`.
    pub fn rho_seq(&self) -> &[f64] {
        &self.rho_seq
    }

    /// `t_1, ..., t_L`.
    pub fn t_seq(&self) -> &[f64] {
        &self.t_seq
    }

    /// `γ = Φ(ρ)`.
    pub fn gamma(&self) -> f64 {
        self.phi_rho[0]
    }

    /// `f^{-1}(u_1) = t_1`, zero without a solid phase.
    pub fn mixing_prediction(&self) -> f64 {
        self.t_seq.first().copied().unwrap_or(0.0)
    }

    fn t_at(&self, k: usize) -> f64 {
        if k == 0 {
            f64::INFINITY
        } else {
            self.t_seq.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = self.t_seq.partition_point(|&tk| tk > t);
        self.f_on_piece(k, t)
    }

    /// Evaluates the formula of piece `[t_{k+1}, t_k)` at `t`.
    fn f_on_piece(&self, k: usize, t: f64) -> f64 {
        let t_next = self.t_at(k + 1);
        let base = self.profile.u_at(k + 1);
        if k == 0 {
            let start = if self.profile.is_empty() { 0.0 } else { self.profile.u_at(1) };
            return start + (t - t_next) * self.liquid_slope;
        }
        let kf = k as f64;
        let arg = self.phi_rho[k] + kf * (t - t_next);
        base + (self.phi.phi_inv(arg) - self.rho_seq[k]) / kf
    }

    /// Left limit `f(t_k-)`, evaluated with the formula of the piece ending at `t_k`.
    pub fn f_left_limit(&self, k: usize) -> f64 {
        self.f_on_piece(k, self.t_at(k))
    }

    /// `[u_k - f(t)]_+` for 1-based `k`.
    pub fn solid_site(&self, k: usize, t: f64) -> f64 {
        (self.profile.u_at(k) - self.f(t)).max(0.0)
    }

    /// Smallest `t` with `f(t) >= v`, by bisection on the increasing `f`.
    pub fn f_inverse(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = v / self.liquid_slope.max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.f(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Breakpoints `ρ_k`, `t_k` and the explicit `f` for a profile.
pub fn breakpoints(rate: &RateFunction, profile: &Profile) -> HydroSolution {
    HydroSolution::new(rate, profile)
}

pub fn f_explicit(solution: &HydroSolution, t: f64) -> f64 {
    solution.f(t)
}

/// Rescaled mixing time `f^{-1}(u_1)` from profile `u`.
pub fn mixing_prediction(rate: &RateFunction, profile: &Profile) -> f64 {
    HydroSolution::new(rate, profile).mixing_prediction()
}
