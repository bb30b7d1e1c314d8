pub mod baselines;
pub mod checks;
pub mod cip;
pub mod diagnostics;
pub mod error;
pub mod generators;
pub mod harness;
pub mod instance;
pub mod io;
pub mod kernel;
pub mod learn_or_cover;
pub mod rng;

pub use error::{Error, Result};
pub use instance::{ArrivalOrder, BatchedInstance, CipInstance, SetSystem, Validate, Violation};
pub use rng::RngStream;
