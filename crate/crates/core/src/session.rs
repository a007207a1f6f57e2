//! Checking whole source files against a global environment.

use std::collections::HashSet;
use std::path::Path;

use crate::diag::{Diagnostic, Error, Result, SourceMap};
use crate::hit;
use crate::kernel::{check_declaration, DeclKind, Globals};
use crate::parser::lexer::{tokenize, Tok};
use crate::parser::parse_module;
use crate::parser::resolve::{check_fresh, check_univars, Resolver};
use crate::parser::surface::SDeclKind;
use crate::stdlib;
use crate::syntax::Name;

/// Checks every declaration of a source text, in order, stopping at the
/// first error. Returns the names declared (including synthesized ones).
pub fn check_source(g: &mut Globals, file: u32, src: &str) -> Result<Vec<Name>> {
    let decls = parse_module(file, src)?;
    let mut out = Vec::new();
    for d in &decls {
        match &d.kind {
            SDeclKind::Hit { .. } => out.extend(hit::declare(g, d)?),
            SDeclKind::Def { .. } | SDeclKind::Axiom { .. } => {
                let univars = check_univars(d)?;
                check_fresh(g, &d.name)?;
                let rd = Resolver::new(g, univars).decl(d)?;
                let kind = if matches!(d.kind, SDeclKind::Def { .. }) { DeclKind::Def } else { DeclKind::Axiom };
                out.push(check_declaration(g, rd, kind)?.name.clone());
            }
        }
    }
    Ok(out)
}

/// What a source file declares and which identifiers it mentions, found
/// without checking it.
#[derive(Clone, Debug, Default)]
pub struct SourceInfo {
    pub declares: HashSet<String>,
    pub mentions: HashSet<String>,
}

pub fn source_info(src: &str) -> SourceInfo {
    let mut info = SourceInfo::default();
    if let Ok(toks) = tokenize(0, src) {
        for t in toks {
            if let Tok::Ident(n) = t.tok {
                info.mentions.insert(n);
            }
        }
    }
    if let Ok(decls) = parse_module(0, src) {
        for d in decls {
            let n = d.name.text.clone();
            if let SDeclKind::Hit { ctors, .. } = &d.kind {
                info.declares.insert(format!("{n}-ind"));
                for c in ctors {
                    info.declares.insert(c.name.text.clone());
                    info.declares.insert(format!("{n}-{}-beta", c.name.text));
                }
            }
            info.declares.insert(n);
        }
    }
    for n in &info.declares {
        info.mentions.remove(n);
    }
    info
}

/// For each file, the earlier files declaring a name it mentions.
pub fn dependencies(infos: &[SourceInfo]) -> Vec<Vec<usize>> {
    (0..infos.len())
        .map(|i| (0..i).filter(|&j| !infos[i].mentions.is_disjoint(&infos[j].declares)).collect())
        .collect()
}

/// A checking session: the global environment plus the sources it was
/// built from, for rendering diagnostics.
#[derive(Clone, Default)]
pub struct Session {
    pub globals: Globals,
    pub sources: SourceMap,
}

impl Session {
    pub fn new() -> Session {
        Session::default()
    }

    /// A session with the prelude loaded. The prelude is part of the
    /// build, so failing to check it is an internal error.
    pub fn with_prelude() -> Session {
        let mut s = Session::new();
        if let Err(d) = s.add_source(stdlib::PRELUDE_PATH, stdlib::PRELUDE) {
            panic!("internal error: prelude does not check: {}", d.human());
        }
        s
    }

    pub fn add_source(&mut self, path: impl AsRef<Path>, text: &str) -> std::result::Result<Vec<Name>, Diagnostic> {
        let file = self.sources.add(path.as_ref(), text);
        check_source(&mut self.globals, file, text).map_err(|e| self.sources.diagnostic(&e))
    }

    pub fn diagnostic(&self, e: &Error) -> Diagnostic {
        self.sources.diagnostic(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prelude_checks() {
        let mut s = Session::new();
        let names = s.add_source(stdlib::PRELUDE_PATH, stdlib::PRELUDE).unwrap_or_else(|d| panic!("{}", d.human()));
        assert!(names.len() >= 15);
    }

    #[test]
    fn dependencies_follow_mentions() {
        let a = source_info("hit C where\n  | point b : C\n  | path l : b = b\n");
        let b = source_info("def x : C := b");
        let c = source_info("def y : Nat := zero");
        let d = source_info("def z := C-ind");
        assert!(a.declares.contains("C-l-beta"));
        assert_eq!(dependencies(&[a, b, c, d]), vec![vec![], vec![0], vec![], vec![0]]);
    }
}
