pub mod envelope;
pub mod error;
pub mod gate;
pub mod ionchain;
pub mod linalg;
pub mod noise;
pub mod spectral;

pub use error::{Error, Result};
