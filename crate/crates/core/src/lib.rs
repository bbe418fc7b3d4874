//! Simulation and numerical analysis of the mean-field zero-range process
//! with bounded nondecreasing rates.

pub mod config;
pub mod coupling;
pub mod dist;
pub mod equilibrium;
pub mod hydro;
pub mod error;
pub mod experiment;
pub mod observables;
pub mod rates;
pub mod quadrature;
pub mod seeding;
pub mod sim;
pub mod stats;

pub use config::OccupancyConfig;
pub use dist::DiscreteDist;
pub use error::{Result, ZrpError};
pub use rates::RateFunction;
