//! Secrecy outage analysis for RIS-partitioned NOMA downlinks over cascaded
//! Rayleigh channels: closed forms, numeric references and Monte Carlo.

pub mod channel_dist;
pub mod config;
pub mod secrecy;
pub mod error;
pub mod monte_carlo;
pub mod special_math;
pub mod sweep;
pub mod validation;

pub use error::{Error, Result};
