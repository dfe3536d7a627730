pub mod allocators;
pub mod bench;
pub mod cli;
pub mod error;
pub mod graphnet;
pub mod ippo;
mod kernels;
pub mod pathing;
pub mod policy;
pub mod rng;
pub mod world;

pub use error::{Error, Result};
