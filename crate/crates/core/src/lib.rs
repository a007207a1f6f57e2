//! A proof checker for intensional Martin-Löf type theory with univalence,
//! function extensionality and 1-dimensional higher inductive types.

pub mod cli;
pub mod diag;
pub mod hit;
pub mod kernel;
pub mod loopcalc;
pub mod parser;
pub mod session;
pub mod stdlib;
pub mod syntax;

pub use session::{check_source, Session};
