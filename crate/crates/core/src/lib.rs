pub mod assembly;
pub mod error;
pub mod geometry;
pub mod hopf;
pub mod linalg;
pub mod mesh;
pub mod spectra;

pub use error::{Error, Result};
