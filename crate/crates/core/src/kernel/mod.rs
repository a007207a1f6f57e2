//! The trusted core: evaluation, conversion and type checking.

pub mod decl;
pub mod elab;
pub mod env;
pub mod nbe;
pub mod value;

pub use decl::check_declaration;
pub use elab::{Ctx, Elab};
pub use env::{Decl, DeclId, DeclKind, Globals};
pub use nbe::Ev;
