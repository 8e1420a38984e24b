pub mod basis;
pub mod certify;
pub mod cli;
pub mod error;
pub mod growth;
pub mod operator;
pub mod scalars;
pub mod spectral;
pub mod verdict;

pub use error::{Error, Result};
pub use growth::{generate_rapid, GrowthSequence};
pub use verdict::Verdict;
