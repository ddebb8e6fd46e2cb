pub mod asymmetry;
pub mod cli;
pub mod constructions;
pub mod cyclotomic;
pub mod detector;
pub mod error;
pub mod linalg;
pub mod report;
pub mod setfile;
pub mod weyl;
pub mod witness;

pub use error::{Error, Result};
