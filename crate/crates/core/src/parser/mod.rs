//! Surface language: lexing, parsing, name resolution and printing.

pub mod lexer;
pub mod parse;
pub mod print;
pub mod resolve;
pub mod surface;

pub use parse::{parse_module, parse_term};
pub use print::{print, print_in};
