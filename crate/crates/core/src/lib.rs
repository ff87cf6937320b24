//! Total unimodularity, unimodularity and strong unimodularity testing.
//!
//! A {0, ±1} matrix is tested for total unimodularity by first signing it and
//! then testing the binary support for regularity through a decomposition into
//! graphic, cographic and R10 pieces joined by 1-, 2- and 3-sums.

pub mod bench;
pub mod bits;
pub mod decomposition;
pub mod engine;
pub mod error;
pub mod generators;
pub mod graphic;
pub mod io;
pub mod matrix;
pub mod oracles;
pub mod signing;
pub mod unimodular;

pub use error::Error;
pub use matrix::{BinaryMatrix, Label, Separation, TernaryMatrix};
