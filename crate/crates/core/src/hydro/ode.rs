//! Direct numerical integration of `f' = 1 - Ψ^{-1}(ρ - Σ_k [u_k - f]_+)`,
//! `f(0) = 0`, independent of the explicit piecewise solution.
//!
//! The right-hand side is continuous but has a kink whenever `f` crosses
//! some `u_k`. Steps are classical RK4 with the set of still-solid sites
//! frozen; a step that would carry `f` past the next `u_k` is shortened by
//! bisection so that it lands on the crossing, and integration resumes with
//! that site removed. Each smooth piece keeps fourth-order accuracy.

use super::phi::gamma;
use super::solution::Profile;
use crate::error::Result;
use crate::rates::RateFunction;
use crate::sim::check_grid;

struct Rhs<'a> {
    rate: &'a RateFunction,
    rho: f64,
    /// Number of solid sites still above `f` (a prefix of the sorted profile).
    active: usize,
    /// Sum of the active `u_k`.
    active_mass: f64,
}

impl Rhs<'_> {
    #[inline]
    fn eval(&self, f: f64) -> f64 {
        let liquid = (self.rho - self.active_mass + self.active as f64 * f).max(0.0);
        1.0 - self.rate.psi_inv_unchecked(liquid)
    }

    fn rk4(&self, f: f64, h: f64) -> f64 {
        let k1 = self.eval(f);
        let k2 = self.eval(f + 0.5 * h * k1);
        let k3 = self.eval(f + 0.5 * h * k2);
        let k4 = self.eval(f + h * k3);
        f + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }
}

/// Values of `f` on `grid` (strictly increasing, nonnegative). The step is
/// at most `1e-4 γ`.
pub fn f_ode(rate: &RateFunction, profile: &Profile, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let g = gamma(rate, profile.rho())?;
    let end = grid.last().copied().unwrap_or(0.0);
    let h_max = if g > 0.0 { 1e-4 * g } else { 1e-4 * end.max(1.0) };
    let u = profile.u();
    let mut rhs = Rhs {
        rate,
        rho: profile.rho(),
        active: u.len(),
        active_mass: profile.solid_mass(),
    };
    let mut t = 0.0;
    let mut f = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        while t < target {
            let h = h_max.min(target - t);
            let next = rhs.rk4(f, h);
            let threshold = if rhs.active > 0 { u[rhs.active - 1] } else { f64::INFINITY };
            if next < threshold {
                t = if h == target - t { target } else { t + h };
                f = next;
                continue;
            }
            // Land exactly on the crossing `f = threshold`.
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if rhs.rk4(f, mid) < threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            t = if hi == target - t { target } else { t + hi };
            f = threshold;
            while rhs.active > 0 && u[rhs.active - 1] <= f {
                rhs.active -= 1;
                rhs.active_mass -= u[rhs.active];
            }
        }
        out.push(f);
    }
    Ok(out)
}
