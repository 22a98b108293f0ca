pub mod error;
pub mod features;
pub mod geometry;
pub mod learners;
pub mod profile;
pub mod projection;
pub mod region;
pub mod sample;
pub mod trace;

pub use error::{Error, Result};
pub mod simulator;
pub mod harness;
