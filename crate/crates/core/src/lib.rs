pub mod assembly;
pub mod cli;
pub mod cases;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod math_core;
pub mod mesh;
pub mod output;
pub mod quadrature;
pub mod simulation;
pub mod solver;
pub mod spaces;
pub mod study;
pub mod sparse;
pub mod validate;

pub use error::{Error, Result};
