//! Simulation and analysis of interwoven frustrated down-conversion networks.

pub mod bell;
pub mod error;
pub mod fock;
pub mod ghz;
pub mod lhv;
pub mod network;
pub mod reference;
pub mod symbolic;

pub use error::{Error, Result};
