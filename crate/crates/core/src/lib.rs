pub mod cli;
pub mod error;
pub mod kernels;
pub mod numerics;
pub mod phasespace;
pub mod quantizer;
pub mod tomography;
pub mod wigner;

pub use error::{Error, Result};
