//! Checking top-level definitions and axioms.

use std::sync::Arc;

use super::env::{instance, Decl, DeclKind, Globals};
use crate::diag::Result;
use crate::parser::resolve::ResolvedDecl;

/// Checks a resolved definition or axiom at the all-zero universe instance
/// and adds it to `g`. Other instances are checked on first use.
pub fn check_declaration(g: &mut Globals, rd: ResolvedDecl, kind: DeclKind) -> Result<Arc<Decl>> {
    let decl = Decl::new(rd.name, kind, rd.univars, rd.ty, rd.body, rd.span);
    instance(g, &decl, &vec![0; decl.nlevels()])?;
    g.insert(decl)
}
