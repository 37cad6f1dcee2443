pub mod cartan;
pub mod circuit;
pub mod compiler;
pub mod error;
pub mod matrix;
pub mod simulator;
pub mod waveplate;

pub use error::{Error, Result};
