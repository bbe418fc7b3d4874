use crate::error::{domain, Result};
use crate::quadrature::integrate;
use crate::rates::RateFunction;

/// Absolute tolerance handed to the quadrature for one cached piece.
const PIECE_TOL: f64 = 1e-13;
/// Quadrature tolerance for the public one-shot `phi`.
const PHI_TOL: f64 = 1e-11;
const NODES: usize = 64;

/// `Φ(t) = ∫_0^t ds / (1 - Ψ^{-1}(s))` with its inverse.
///
/// Values of `Φ` at evenly spaced nodes on `[0, span]` are cached; a query
/// integrates only from the nearest node below, so repeated calls inside
/// root-finding loops stay cheap and carry no interpolation error.
#[derive(Debug, Clone)]
pub struct PhiEvaluator {
    rate: RateFunction,
    step: f64,
    cumulative: Vec<f64>,
}

impl PhiEvaluator {
    pub fn new(rate: &RateFunction, span: f64) -> Self {
        let span = if span.is_finite() && span > 0.0 { span } else { 1.0 };
        let step = span / NODES as f64;
        let mut cumulative = Vec::with_capacity(NODES + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 0..NODES {
            let a = k as f64 * step;
            acc += integrate(|s| integrand(rate, s), a, a + step, PIECE_TOL);
            cumulative.push(acc);
        }
        Self {
            rate: rate.clone(),
            step,
            cumulative,
        }
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }

    /// `Φ'(t) = 1 / (1 - Ψ^{-1}(t))`.
    pub fn derivative(&self, t: f64) -> f64 {
        integrand(&self.rate, t)
    }

    pub fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let last = self.cumulative.len() - 1;
        let k = ((t / self.step) as usize).min(last);
        let a = k as f64 * self.step;
        self.cumulative[k] + integrate(|s| integrand(&self.rate, s), a, t, PIECE_TOL)
    }

    /// `Φ^{-1}(v)`, with `|Φ(result) - v| <= 1e-12 (1 + v)` up to quadrature error.
    pub fn phi_inv(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        // Φ' >= 1, so Φ^{-1} moves at most as fast as its argument.
        let last = self.cumulative.len() - 1;
        let (mut lo, mut hi) = match self.cumulative.partition_point(|&c| c <= v) {
            idx if idx > last => {
                let a = last as f64 * self.step;
                (a, a + (v - self.cumulative[last]))
            }
            idx => ((idx - 1) as f64 * self.step, idx as f64 * self.step),
        };
        let tol = 1e-12 * (1.0 + v);
        let mut t = 0.5 * (lo + hi);
        for _ in 0..100 {
            let g = self.phi(t) - v;
            if g.abs() <= tol {
                return t;
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let newton = t - g / self.derivative(t);
            t = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        t
    }
}

#[inline]
fn integrand(rate: &RateFunction, s: f64) -> f64 {
    1.0 / (1.0 - rate.psi_inv_unchecked(s.max(0.0)))
}

/// `Φ(t)` by direct adaptive quadrature.
pub fn phi(rate: &RateFunction, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(domain("t", format!("need finite t >= 0, got {t}")));
    }
    Ok(integrate(|s| integrand(rate, s), 0.0, t, PHI_TOL))
}

/// `Φ^{-1}(v)`.
pub fn phi_inv(rate: &RateFunction, v: f64) -> Result<f64> {
    if !v.is_finite() || v < 0.0 {
        return Err(domain("v", format!("need finite v >= 0, got {v}")));
    }
    Ok(PhiEvaluator::new(rate, v).phi_inv(v))
}

/// `γ = Φ(ρ)`, the rescaled worst-case mixing time at density `ρ`.
pub fn gamma(rate: &RateFunction, rho: f64) -> Result<f64> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(domain("rho", format!("need finite rho >= 0, got {rho}")));
    }
    phi(rate, rho)
}
