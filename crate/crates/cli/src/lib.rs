//! File formats, example tensors, benchmark protocols and the command-line
//! driver around `gentensor-core`.

pub mod bench;
pub mod error;
pub mod gen;
pub mod io;
pub mod report;
pub mod tensor;

pub use error::{CliError, Result};
pub use tensor::Tensor;
