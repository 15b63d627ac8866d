//! Spectral laboratory for weighted Laplacians on real and complex
//! (Kaehler) metric measure spaces: operator assembly on a catalog of
//! model spaces, generalized eigenproblems, analytic identity checks and
//! toric Futaki geometry.

pub mod cli;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod holomorphic;
pub mod identities;
pub mod operators;
pub mod poly;
pub mod quad;
pub mod report;
pub mod spaces;
pub mod special;
pub mod toric;

pub use error::{Error, Result};
pub use cli::run_cli;
