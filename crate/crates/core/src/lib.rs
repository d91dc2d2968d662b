//! Simulator of an eMBB network slice served by a UAV flying base station,
//! with a digital twin in the loop and a DDPG agent allocating bandwidth.
//!
//! The physical network ([`physical`]) draws traffic and channels, serves
//! allocations and flies the base station ([`mobility`]). The twin
//! ([`twin`]) mirrors it at a configurable cadence and builds the agent's
//! observation. Allocators ([`allocators`]) include two baselines and the
//! trained policy from [`ddpg`]; [`harness`] runs and compares them.

pub mod allocators;
pub mod config;
pub mod ddpg;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mobility;
pub mod par;
pub mod physical;
pub mod radio;
pub mod rng;
pub mod scenario;
pub mod twin;

pub use config::{load_config, ScenarioConfig};
pub use error::{Error, Result};
