pub mod csvio;
pub mod error;
pub mod gamma;
pub mod gauss;
pub mod meanfield;
pub mod popmc;
pub mod udist;

pub use error::{Error, Result};
