//! Rate functions and the quantities derived from them: the generating
//! series `R`, the fugacity-to-density map `Ψ(z) = z R'(z) / R(z)`, its
//! inverse, and the grand-canonical single-site laws `q(z)` and `q̄(s)`.
//!
//! Rates are stored in eventually-one form: an explicit nondecreasing head
//! `r(1..=K)` in `(0, 1]` and `r(k) = 1` for every `k > K`. The geometric
//! tail of `R` then sums in closed form, so `R`, `R'` and `Ψ` carry no
//! series truncation error. A rate with a slowly converging tail has to be
//! cut at some `K` by the caller; everything downstream is exact for the cut
//! rate only.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::error::{domain, Result, ZrpError};

/// Tail mass below which `q(z)` is truncated.
pub const Q_TAIL_MASS: f64 = 1e-14;

const PSI_INV_MAX_ITER: usize = 200;

/// Monotone rate function `r` with `r(0) = 0`, `r(k) = head[k-1]` for
/// `1 <= k <= K` and `r(k) = 1` beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    head: Vec<f64>,
    /// `ln Π_{j<=k} r(j)` for `k = 0..=K`.
    log_prod: Vec<f64>,
    /// `1 / Π_{j<=k} r(j)` for `k = 0..=K`.
    inv_prod: Vec<f64>,
    time_rescale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RateFile {
    head: Vec<f64>,
}

impl RateFunction {
    /// Rescales a positive nondecreasing table so that its supremum is 1.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(ZrpError::EmptyRateTable);
        }
        for (index, &value) in raw.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ZrpError::NonPositiveRate { index, value });
            }
            if index > 0 && value < raw[index - 1] {
                return Err(ZrpError::NonMonotoneRate { index });
            }
        }
        let sup = raw[raw.len() - 1];
        let head: Vec<f64> = raw.iter().map(|r| r / sup).collect();
        Ok(Self::from_normalized(head, sup))
    }

    /// Builds a rate from an already normalized head: nondecreasing values
    /// in `(0, 1]`, with `r(k) = 1` implied for `k > K`.
    pub fn new(head: &[f64]) -> Result<Self> {
        if head.is_empty() {
            return Err(ZrpError::EmptyRateTable);
        }
        for (index, &value) in head.iter().enumerate() {
            if !(value.is_finite() && value > 0.0 && value <= 1.0) {
                return Err(ZrpError::NonPositiveRate { index, value });
            }
            if index > 0 && value < head[index - 1] {
                return Err(ZrpError::NonMonotoneRate { index });
            }
        }
        Ok(Self::from_normalized(head.to_vec(), 1.0))
    }

    fn from_normalized(head: Vec<f64>, time_rescale: f64) -> Self {
        let mut log_prod = Vec::with_capacity(head.len() + 1);
        let mut acc = 0.0;
        log_prod.push(0.0);
        for r in &head {
            acc += r.ln();
            log_prod.push(acc);
        }
        let inv_prod = log_prod.iter().map(|l| (-l).exp()).collect();
        Self {
            head,
            log_prod,
            inv_prod,
            time_rescale,
        }
    }

    /// The constant rate `r(k) = 1` for `k >= 1`.
    pub fn rate_one() -> Self {
        Self::from_normalized(vec![1.0], 1.0)
    }

    /// `r(j) = min(1, j / k0)`.
    pub fn threshold(k0: usize) -> Result<Self> {
        if k0 == 0 {
            return Err(domain("k0", "threshold must be at least 1"));
        }
        let head = (1..=k0).map(|j| j as f64 / k0 as f64).collect();
        Ok(Self::from_normalized(head, 1.0))
    }

    /// Named presets: `rate-one` and `threshold-<k0>`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "rate-one" => Ok(Self::rate_one()),
            _ => {
                let k0 = name
                    .strip_prefix("threshold-")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| ZrpError::UnknownPreset(name.to_string()))?;
                Self::threshold(k0)
            }
        }
    }

    /// Parses `{ "head": [r1, ..., rK] }`; the head must already lie in `(0, 1]`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: RateFile = serde_json::from_str(text)?;
        Self::new(&file.head)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&RateFile {
            head: self.head.clone(),
        })
        .expect("rate table serializes")
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    /// Number of explicitly stored values `K`.
    pub fn k(&self) -> usize {
        self.head.len()
    }

    pub fn time_rescale(&self) -> f64 {
        self.time_rescale
    }

    /// Always true: the representation fixes `r(k) = 1` for `k > K`.
    pub fn tail_is_one(&self) -> bool {
        true
    }

    #[inline]
    pub fn rate(&self, k: u64) -> f64 {
        match k {
            0 => 0.0,
            k if (k as usize) <= self.head.len() => self.head[k as usize - 1],
            _ => 1.0,
        }
    }

    /// `Δ(k) = r(k+1) - r(k)`.
    #[inline]
    pub fn delta(&self, k: u64) -> f64 {
        self.rate(k + 1) - self.rate(k)
    }

    /// `ln Π_{j<=k} r(j)`.
    pub fn log_rate_product(&self, k: u64) -> f64 {
        let kk = self.head.len();
        if (k as usize) <= kk {
            self.log_prod[k as usize]
        } else {
            self.log_prod[kk]
        }
    }

    /// `(1-z) R(z)` and `(1-z)^2 R'(z)`, both bounded as `z -> 1`.
    fn scaled_series(&self, z: f64) -> (f64, f64) {
        let kk = self.head.len();
        let om = 1.0 - z;
        let inv_pk = self.inv_prod[kk];
        let mut s = 0.0;
        let mut ds = 0.0;
        let mut zk = 1.0;
        for k in 0..=kk {
            s += zk * self.inv_prod[k];
            if k < kk {
                ds += (k + 1) as f64 * zk * self.inv_prod[k + 1];
            }
            zk *= z;
        }
        // zk == z^(K+1) here.
        let z_pow_k = z.powi(kk as i32);
        let a = om * s + zk * inv_pk;
        let b = om * om * ds + ((kk + 1) as f64 * z_pow_k * om + zk) * inv_pk;
        (a, b)
    }

    fn check_fugacity(z: f64) -> Result<()> {
        if !(z.is_finite() && (0.0..1.0).contains(&z)) {
            return Err(domain("z", format!("need 0 <= z < 1, got {z}")));
        }
        Ok(())
    }

    /// `R(z)` and `R'(z)`.
    pub fn big_r(&self, z: f64) -> Result<(f64, f64)> {
        Self::check_fugacity(z)?;
        let om = 1.0 - z;
        let (a, b) = self.scaled_series(z);
        Ok((a / om, b / (om * om)))
    }

    /// `Ψ(z) = z R'(z) / R(z)`.
    pub fn psi(&self, z: f64) -> Result<f64> {
        Self::check_fugacity(z)?;
        Ok(self.psi_unchecked(z))
    }

    #[inline]
    fn psi_unchecked(&self, z: f64) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let (a, b) = self.scaled_series(z);
        z * b / ((1.0 - z) * a)
    }

    /// Inverse of `Ψ` by monotone bisection.
    pub fn psi_inv(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(domain("s", format!("need finite s >= 0, got {s}")));
        }
        Ok(self.psi_inv_unchecked(s))
    }

    pub(crate) fn psi_inv_unchecked(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let mut eta = 0.5;
        while self.psi_unchecked(1.0 - eta) <= s {
            if eta <= f64::EPSILON {
                return 1.0 - eta;
            }
            eta *= 0.5;
        }
        let mut lo = 0.0;
        let mut hi = 1.0 - eta;
        for _ in 0..PSI_INV_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.psi_unchecked(mid) <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (self.psi_unchecked(hi) - s).abs() < (s - self.psi_unchecked(lo)).abs() {
            hi
        } else {
            lo
        }
    }

    /// Grand-canonical single-site law `q(z; k) = z^k / (R(z) Π_{j<=k} r(j))`,
    /// truncated once the remaining mass drops below [`Q_TAIL_MASS`].
    pub fn q_dist(&self, z: f64) -> Result<DiscreteDist> {
        Self::check_fugacity(z)?;
        if z == 0.0 {
            return Ok(DiscreteDist::dirac(0));
        }
        let kk = self.head.len();
        let (a, _) = self.scaled_series(z);
        let ln_z = z.ln();
        let ln_r = a.ln() - (1.0 - z).ln();
        // Beyond K the mass past M is z^(M+1) / (P_K (1-z) R) = z^(M+1) / (P_K A).
        let ln_tail_prefactor = -self.log_prod[kk] - a.ln();
        let needed = (Q_TAIL_MASS.ln() - ln_tail_prefactor) / ln_z - 1.0;
        let m = (needed.ceil().max(0.0) as usize).max(kk);
        let tail = ((m + 1) as f64 * ln_z + ln_tail_prefactor).exp();
        let probs = (0..=m)
            .map(|k| (k as f64 * ln_z - self.log_rate_product(k as u64) - ln_r).exp())
            .collect();
        Ok(DiscreteDist::from_parts(probs, tail))
    }

    /// `q̄(s) = q(Ψ^{-1}(s))`, the grand-canonical law with mean `s`.
    pub fn q_bar(&self, s: f64) -> Result<DiscreteDist> {
        let z = self.psi_inv(s)?;
        if z == 0.0 {
            return Ok(DiscreteDist::dirac(0));
        }
        self.q_dist(z)
    }
}

/// Rate selection as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Preset { preset: String },
    File { file: String },
    Head { head: Vec<f64> },
    /// Unnormalized table, rescaled by its supremum.
    Raw { raw: Vec<f64> },
}

impl RateSpec {
    pub fn resolve(&self, base_dir: Option<&Path>) -> Result<RateFunction> {
        match self {
            RateSpec::Preset { preset } => RateFunction::preset(preset),
            RateSpec::Head { head } => RateFunction::new(head),
            RateSpec::Raw { raw } => RateFunction::normalize(raw),
            RateSpec::File { file } => {
                let path = Path::new(file);
                match base_dir {
                    Some(dir) if path.is_relative() => RateFunction::from_json_file(dir.join(path)),
                    _ => RateFunction::from_json_file(path),
                }
            }
        }
    }
}

impl Default for RateSpec {
    fn default() -> Self {
        RateSpec::Preset {
            preset: "rate-one".into(),
        }
    }
}
