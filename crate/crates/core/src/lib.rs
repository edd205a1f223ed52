pub mod cli;
pub mod ctc;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod recurrent;
pub mod seed;
pub mod tensor;
pub mod text;
pub mod trainer;

pub use error::{Error, Result};
