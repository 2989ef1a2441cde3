pub mod cli;
pub mod error;
pub mod experiments;
pub mod optical_gate;
pub mod protocol;
pub mod qmath;
pub mod selftest;
pub mod tomography;

pub use error::{Error, Result};
