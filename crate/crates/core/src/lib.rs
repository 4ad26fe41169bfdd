pub mod bandit;
pub mod combinatorial;
pub mod complexity;
pub mod error;
pub mod experiments;
pub mod game;
pub mod learners;
pub mod thresholds;

pub use error::{Error, Result};
