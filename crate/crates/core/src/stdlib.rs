//! The shipped library: the prelude, the checked corpus, its manifest and
//! the audit of which axioms each proved declaration rests on.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::diag::Diagnostic;
use crate::kernel::{DeclKind, Globals};
use crate::session::Session;
use crate::syntax::{constants, Name};

pub const PRELUDE_PATH: &str = "prelude/prelude.hott";
pub const PRELUDE: &str = include_str!("../prelude/prelude.hott");

pub const MANIFEST: &str = include_str!("../corpus/MANIFEST.tsv");
pub const SANCTIONED: &str = include_str!("../corpus/SANCTIONED.txt");

macro_rules! corpus {
    ($($f:literal),* $(,)?) => {
        &[$(($f, include_str!(concat!("../corpus/", $f)))),*]
    };
}

/// Corpus files in manifest order, with their contents.
pub const CORPUS: &[(&str, &str)] = corpus![
    "nat.hott",
    "paths.hott",
    "transport-lemmas.hott",
    "equiv.hott",
    "contractible.hott",
    "ntypes.hott",
    "int.hott",
    "circle.hott",
    "circle-code.hott",
    "pushout.hott",
    "suspension.hott",
    "spheres.hott",
    "join.hott",
    "wedge.hott",
    "truncation.hott",
    "connected.hott",
    "fibseq.hott",
    "hopf.hott",
    "blakers.hott",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Proved,
    Postulated,
    Definition,
}

impl Status {
    pub fn parse(s: &str) -> Option<Status> {
        match s {
            "proved" => Some(Status::Proved),
            "postulated" => Some(Status::Postulated),
            "definition" => Some(Status::Definition),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Proved => "proved",
            Status::Postulated => "postulated",
            Status::Definition => "definition",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub file: String,
    pub name: String,
    pub status: Status,
    pub reference: String,
}

#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

impl Manifest {
    /// Parses the tab-separated manifest. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse(text: &str) -> Result<Manifest, String> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [file, name, status, reference] = cols[..] else {
                return Err(format!("line {}: expected 4 tab-separated fields, found {}", i + 1, cols.len()));
            };
            let status =
                Status::parse(status).ok_or_else(|| format!("line {}: unknown status `{status}`", i + 1))?;
            if reference.trim().is_empty() {
                return Err(format!("line {}: `{name}` has no reference", i + 1));
            }
            if !seen.insert(name.to_string()) {
                return Err(format!("line {}: `{name}` is listed twice", i + 1));
            }
            entries.push(Entry { file: file.into(), name: name.into(), status, reference: reference.into() });
        }
        Ok(Manifest { entries })
    }

    /// Files in order of first appearance.
    pub fn files(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.file.as_str()) {
                out.push(&e.file);
            }
        }
        out
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn with_status(&self, s: Status) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(move |e| e.status == s)
    }
}

pub fn shipped_manifest() -> Manifest {
    Manifest::parse(MANIFEST).expect("shipped manifest parses")
}

/// Corpus file names paired with the declarations each produced.
pub type Declared = Vec<(String, Vec<Name>)>;

/// Checks the prelude and then the whole corpus in manifest order.
/// Returns the session and the names each corpus file declared.
pub fn load_corpus() -> Result<(Session, Declared), Diagnostic> {
    let mut s = Session::with_prelude();
    let mut declared = Vec::new();
    for (file, text) in CORPUS {
        let names = s.add_source(format!("corpus/{file}"), text)?;
        declared.push((file.to_string(), names));
    }
    Ok((s, declared))
}

/// Names listed in a sanctioned-postulate file: one per line, `#`
/// comments allowed.
pub fn parse_sanctioned(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Every declaration reachable from `name` through the constants in its
/// type and body, including `name` itself.
pub fn dependency_cone(g: &Globals, name: &str) -> BTreeSet<Name> {
    let mut seen: BTreeSet<Name> = BTreeSet::new();
    let mut stack: Vec<Name> = Vec::new();
    if let Some(d) = g.decl(name) {
        stack.push(d.name.clone());
    }
    while let Some(n) = stack.pop() {
        if !seen.insert(n.clone()) {
            continue;
        }
        let Some(d) = g.decl(&n) else { continue };
        let mut refs = BTreeSet::new();
        constants(&d.raw_ty, &mut refs);
        if let Some(b) = &d.raw_body {
            constants(b, &mut refs);
        }
        if let Some(h) = d.kind.hit() {
            refs.insert(h.clone());
        }
        for r in refs {
            if !seen.contains(&r) {
                stack.push(r);
            }
        }
    }
    seen
}

/// The axioms (including generated computation rules) in the cone.
pub fn axioms_in_cone(g: &Globals, name: &str) -> BTreeSet<Name> {
    dependency_cone(g, name)
        .into_iter()
        .filter(|n| g.decl(n).is_some_and(|d| d.kind.is_axiom()))
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct Audit {
    /// Manifest entries with no matching declaration, or whose status
    /// disagrees with the declaration.
    pub mismatched: Vec<String>,
    /// Declarations of the given files missing from the manifest.
    pub unlisted: Vec<String>,
    /// Axioms present in the environment but not sanctioned.
    pub unsanctioned: Vec<String>,
    /// Proved entries whose cone reaches an unsanctioned axiom.
    pub dishonest: Vec<(String, Vec<String>)>,
}

impl Audit {
    pub fn ok(&self) -> bool {
        self.mismatched.is_empty() && self.unlisted.is_empty() && self.unsanctioned.is_empty() && self.dishonest.is_empty()
    }
}

/// Checks the manifest against a checked environment. `declared` maps
/// each corpus file to the names it declared, as returned by checking it.
pub fn audit(
    g: &Globals,
    manifest: &Manifest,
    sanctioned: &BTreeSet<String>,
    declared: &[(String, Vec<Name>)],
) -> Audit {
    let mut a = Audit::default();
    let mut origin: HashMap<&str, &str> = HashMap::new();
    for (file, names) in declared {
        for n in names {
            origin.insert(n, file);
            let Some(d) = g.decl(n) else { continue };
            if matches!(d.kind, DeclKind::HitInd(_) | DeclKind::HitBeta(_)) {
                continue;
            }
            if manifest.get(n).is_none() {
                a.unlisted.push(format!("{file}: {n}"));
            }
        }
    }
    for e in &manifest.entries {
        let Some(d) = g.decl(&e.name) else {
            a.mismatched.push(format!("{}: `{}` is not declared", e.file, e.name));
            continue;
        };
        if let Some(f) = origin.get(e.name.as_str()) {
            if *f != e.file {
                a.mismatched.push(format!("`{}` is declared in {f}, listed under {}", e.name, e.file));
            }
        }
        let ok = match e.status {
            Status::Postulated => d.kind == DeclKind::Axiom,
            Status::Proved => d.kind == DeclKind::Def,
            Status::Definition => !d.kind.is_axiom(),
        };
        if !ok {
            a.mismatched.push(format!("`{}` is listed as {} but declared as {:?}", e.name, e.status, d.kind));
        }
    }
    for d in g.decls() {
        if d.kind.is_axiom() && !sanctioned.contains(&*d.name) {
            a.unsanctioned.push(d.name.to_string());
        }
    }
    for e in manifest.with_status(Status::Proved) {
        let bad: Vec<String> = axioms_in_cone(g, &e.name)
            .into_iter()
            .filter(|n| !sanctioned.contains(&**n))
            .map(|n| n.to_string())
            .collect();
        if !bad.is_empty() {
            a.dishonest.push((e.name.clone(), bad));
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_rejects_bad_lines() {
        assert!(Manifest::parse("a.hott\tx\tproved\tsome topic\n").is_ok());
        assert!(Manifest::parse("a.hott\tx\tproved\n").is_err());
        assert!(Manifest::parse("a.hott\tx\tguessed\ttopic\n").is_err());
        assert!(Manifest::parse("a.hott\tx\tproved\t \n").is_err());
        assert!(Manifest::parse("a\tx\tproved\tt\nb\tx\tproved\tt\n").is_err());
    }

    #[test]
    fn sanctioned_file_syntax() {
        let s = parse_sanctioned("# prelude\nua\n\nfunext  # extensionality\n");
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec!["funext".to_string(), "ua".to_string()]);
    }

    #[test]
    fn shipped_corpus_passes_the_audit() {
        let (s, declared) = load_corpus().unwrap_or_else(|d| panic!("{}", d.human()));
        let a = audit(&s.globals, &shipped_manifest(), &parse_sanctioned(SANCTIONED), &declared);
        assert!(a.ok(), "{a:#?}");
    }

    #[test]
    fn shipped_manifest_lists_every_corpus_file() {
        let m = shipped_manifest();
        let files: Vec<&str> = CORPUS.iter().map(|(f, _)| *f).collect();
        assert_eq!(m.files(), files);
    }
}
