//! Hydrodynamic limit of the condensed phase: `Φ`, the dissolution
//! function `f`, and the resulting mixing-time predictions.

mod ode;
mod phi;
mod solution;

pub use ode::f_ode;
pub use phi::{gamma, phi, phi_inv, PhiEvaluator};
pub use solution::{breakpoints, f_explicit, mixing_prediction, HydroSolution, Profile};

use serde::{Deserialize, Serialize};

/// JSON report `{gamma, rho_k, t_k, prediction}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub gamma: f64,
    pub rho_k: Vec<f64>,
    pub t_k: Vec<f64>,
    pub prediction: f64,
}

impl From<&HydroSolution> for PredictionReport {
    fn from(s: &HydroSolution) -> Self {
        Self {
            gamma: s.gamma(),
            rho_k: s.rho_seq().to_vec(),
            t_k: s.t_seq().to_vec(),
            prediction: s.mixing_prediction(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::RateFunction;
    use approx::assert_abs_diff_eq;

    fn one() -> RateFunction {
        RateFunction::rate_one()
    }

    #[test]
    fn profile_validation() {
        assert!(Profile::new(vec![0.3, 0.5], 1.0).is_err());
        assert!(Profile::new(vec![0.8, 0.5], 1.0).is_err());
        assert!(Profile::new(vec![-0.1], 1.0).is_err());
        assert!(Profile::new(vec![0.5], -1.0).is_err());
        let p = Profile::new(vec![0.5, 0.2, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn condensed_profile_breakpoints() {
        let s = breakpoints(&one(), &Profile::condensed(1.0).unwrap());
        assert_eq!(s.rho_seq(), &[1.0, 0.0]);
        assert_abs_diff_eq!(s.t_seq()[0], 1.5, epsilon = 1e-10);
        assert_abs_diff_eq!(s.mixing_prediction(), s.gamma(), epsilon = 1e-12);
    }

    #[test]
    fn liquid_profile_has_no_breakpoints() {
        let s = breakpoints(&one(), &Profile::liquid(1.0).unwrap());
        assert!(s.t_seq().is_empty());
        assert_eq!(s.mixing_prediction(), 0.0);
        // f(t) = t (1 - Ψ^{-1}(1)) = t / 2.
        assert_abs_diff_eq!(s.f(3.0), 1.5, epsilon = 1e-14);
    }

    #[test]
    fn two_block_breakpoints() {
        let s = breakpoints(&one(), &Profile::new(vec![0.5, 0.5], 1.0).unwrap());
        assert_eq!(s.rho_seq(), &[1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(s.t_seq()[0], 0.75, epsilon = 1e-10);
        assert_abs_diff_eq!(s.t_seq()[1], 0.75, epsilon = 1e-10);
        assert_abs_diff_eq!(s.mixing_prediction(), 0.75, epsilon = 1e-10);
    }

    #[test]
    fn condensed_rate_one_closed_form() {
        let s = breakpoints(&one(), &Profile::condensed(1.0).unwrap());
        assert_eq!(s.f(0.0), 0.0);
        for i in 0..=30 {
            let t = i as f64 * 0.05;
            assert_abs_diff_eq!(s.f(t), (1.0 + 2.0 * t).sqrt() - 1.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(s.f(1.5), 1.0, epsilon = 1e-12);
        for t in [1.6, 2.0, 4.0] {
            assert_abs_diff_eq!(s.f(t), 1.0 + (t - 1.5) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn continuity_and_values_at_breakpoints() {
        let rate = RateFunction::new(&[0.5]).unwrap();
        let p = Profile::new(vec![0.8, 0.3, 0.1], 1.5).unwrap();
        let s = breakpoints(&rate, &p);
        for k in 1..=p.len() {
            let tk = s.t_seq()[k - 1];
            assert_abs_diff_eq!(s.f(tk), p.u_at(k), epsilon = 1e-9);
            assert_abs_diff_eq!(s.f_left_limit(k), p.u_at(k), epsilon = 1e-9);
            assert_abs_diff_eq!(s.f_inverse(p.u_at(k)), tk, epsilon = 1e-8);
        }
    }

    #[test]
    fn ode_slope_at_origin() {
        let p = Profile::new(vec![0.6, 0.2], 1.0).unwrap();
        let h = 1e-7;
        let v = f_ode(&one(), &p, &[0.0, h]).unwrap();
        assert_eq!(v[0], 0.0);
        // 1 - Ψ^{-1}(0.2) = 1 - 0.2/1.2
        assert_abs_diff_eq!(v[1] / h, 1.0 - 0.2 / 1.2, epsilon = 1e-6);
    }

    #[test]
    fn ode_matches_explicit() {
        let p = Profile::new(vec![0.5, 0.3, 0.1], 1.2).unwrap();
        let rate = RateFunction::threshold(2).unwrap();
        let s = breakpoints(&rate, &p);
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 2.0 * s.gamma() / 200.0).collect();
        let ode = f_ode(&rate, &p, &grid).unwrap();
        for (t, v) in grid.iter().zip(&ode) {
            assert_abs_diff_eq!(s.f(*t), *v, epsilon = 1e-7);
        }
    }

    #[test]
    fn report_shape() {
        let s = breakpoints(&one(), &Profile::new(vec![0.5, 0.5], 1.0).unwrap());
        let r = PredictionReport::from(&s);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("gamma").is_some());
        assert_eq!(json["t_k"].as_array().unwrap().len(), 2);
    }
}
