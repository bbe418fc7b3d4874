//! Stationary law: exact sampling, the small-instance exact chain, and
//! total-variation estimators.

mod exact;
mod sampler;
mod tv;

pub use exact::{exact_small_chain, exact_tmix, exact_tv_curve, state_count, ExactChain, STATE_CAP};
pub use sampler::{sample_pi, SamplerMethod, StationarySampler};
pub use tv::{
    equilibrium_profile_check, tv_lower_bound, ProfileCheck, Reference, Statistic, TvEstimate,
    BOOTSTRAP_ROUNDS, MIN_SAMPLES,
};
