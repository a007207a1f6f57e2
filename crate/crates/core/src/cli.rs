//! Batch front end.
//!
//! Exit status: 0 success, 1 diagnostics emitted, 2 usage error, 3 internal
//! error (a panic, caught by `main`).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::diag::{Code, Diagnostic, Error, Span};
use crate::kernel::env::instance;
use crate::kernel::nbe::Ev;
use crate::kernel::{DeclKind, Globals};
use crate::loopcalc;
use crate::parser::print;
use crate::session::{check_source, dependencies, source_info, Session};
use crate::stdlib::Manifest;
use crate::syntax::Term;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiagFormat {
    Human,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "hottcheck", version, about = "Check type theory sources with univalence and higher inductive types")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// `machine` prints one tab-separated record per diagnostic on stdout.
    #[arg(long, global = true, value_enum, default_value = "human")]
    pub diag_format: DiagFormat,

    /// Start from an empty environment instead of the prelude.
    #[arg(long, global = true)]
    pub no_prelude: bool,

    /// Number of files checked in parallel when they do not depend on each other.
    #[arg(long, short = 'j', global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,

    /// Corpus manifest giving file order; defaults to a MANIFEST.tsv next to the files.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check files in order.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the normal form of a declaration's body.
    Norm {
        file: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Print the winding number of a loop on the circle.
    Winding {
        file: PathBuf,
        #[arg(long)]
        term: String,
    },
}

struct Usage(String);

struct Source {
    path: PathBuf,
    text: String,
    requested: bool,
}

/// Runs the command line, writing to the given streams, and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Usage> {
    let requested: Vec<PathBuf> = match &cli.command {
        Command::Check { files } => files.clone(),
        Command::Norm { file, .. } | Command::Winding { file, .. } => vec![file.clone()],
    };
    let sources = plan(cli, &requested)?;
    let mut session = if cli.no_prelude { Session::new() } else { Session::with_prelude() };
    let (diags, target) = check_all(&mut session, &sources, cli.jobs as usize);
    let mut emit = |d: &Diagnostic| {
        let _ = match cli.diag_format {
            DiagFormat::Human => err.write_all(d.human().as_bytes()),
            DiagFormat::Machine => out.write_all(d.machine().as_bytes()),
        };
    };
    for d in &diags {
        emit(d);
    }
    if !diags.is_empty() {
        return Ok(EXIT_DIAGNOSTICS);
    }
    let result = match &cli.command {
        Command::Check { .. } => {
            if cli.diag_format == DiagFormat::Human {
                let n = sources.iter().filter(|s| s.requested).count();
                let _ = writeln!(err, "ok: {n} file(s), {} declaration(s)", session.globals.len());
            }
            return Ok(EXIT_OK);
        }
        Command::Norm { term, .. } => normal_form(&session.globals, term, target),
        Command::Winding { term, .. } => {
            loopcalc::winding_of(&session.globals, term, target).map(|n| n.to_string())
        }
    };
    match result {
        Ok(s) => {
            let _ = writeln!(out, "{s}");
            Ok(EXIT_OK)
        }
        Err(e) => {
            emit(&session.diagnostic(&e));
            Ok(EXIT_DIAGNOSTICS)
        }
    }
}

/// The normal form of a declaration's body, with universe levels set to 0.
/// Axioms and constructors print as themselves.
pub fn normal_form(g: &Globals, name: &str, span: Span) -> crate::diag::Result<String> {
    let d = g.decl(name).ok_or_else(|| Error::new(Code::Scope, span, format!("unknown declaration `{name}`")))?;
    let levels = vec![0; d.nlevels()];
    let inst = instance(g, &d, &levels)?;
    let t = match (&inst.body_val, &d.kind) {
        (Some(v), DeclKind::Def | DeclKind::HitInd(_)) => Ev::new(g).quote(0, v),
        _ => Term::Const(d.name.clone(), Vec::new()),
    };
    Ok(print(&t))
}

/// Reads the requested files, plus the corpus files they depend on when a
/// manifest is available, in dependency order.
fn plan(cli: &Cli, requested: &[PathBuf]) -> Result<Vec<Source>, Usage> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Usage(format!("cannot read `{}`: {e}", p.display())));
    let manifest_path = match &cli.manifest {
        Some(p) => Some(p.clone()),
        None => requested
            .first()
            .map(|f| f.parent().unwrap_or(Path::new("")).join("MANIFEST.tsv"))
            .filter(|p| p.is_file()),
    };
    let mut requested_sources = Vec::new();
    for p in requested {
        requested_sources.push(Source { path: p.clone(), text: read(p)?, requested: true });
    }
    let Some(mp) = manifest_path else {
        return Ok(requested_sources);
    };
    let manifest = Manifest::parse(&read(&mp)?).map_err(|e| Usage(format!("`{}`: {e}", mp.display())))?;
    let dir = mp.parent().unwrap_or(Path::new("")).to_path_buf();
    let key = |p: &Path| std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let listed: Vec<PathBuf> = manifest.files().iter().map(|f| dir.join(f)).collect();
    let listed_keys: Vec<PathBuf> = listed.iter().map(|p| key(p)).collect();

    // Manifest files up to the last requested one, then unlisted requests.
    let positions: Vec<Option<usize>> =
        requested_sources.iter().map(|s| listed_keys.iter().position(|k| *k == key(&s.path))).collect();
    let last = positions.iter().flatten().max().copied();
    let mut ordered: Vec<Source> = Vec::new();
    if let Some(last) = last {
        for (i, p) in listed.iter().enumerate().take(last + 1) {
            match positions.iter().position(|q| *q == Some(i)) {
                Some(r) => ordered.push(Source {
                    path: requested_sources[r].path.clone(),
                    text: requested_sources[r].text.clone(),
                    requested: true,
                }),
                None => ordered.push(Source { path: p.clone(), text: read(p)?, requested: false }),
            }
        }
    }
    for (s, pos) in requested_sources.into_iter().zip(&positions) {
        if pos.is_none() {
            ordered.push(s);
        }
    }

    // Keep only what the requested files need.
    let infos: Vec<_> = ordered.iter().map(|s| source_info(&s.text)).collect();
    let deps = dependencies(&infos);
    let mut needed: Vec<bool> = ordered.iter().map(|s| s.requested).collect();
    for i in (0..ordered.len()).rev() {
        if needed[i] {
            for &j in &deps[i] {
                needed[j] = true;
            }
        }
    }
    Ok(ordered.into_iter().zip(needed).filter(|(_, n)| *n).map(|(s, _)| s).collect())
}

/// Checks the sources, in parallel waves of files whose dependencies are
/// done. Diagnostics come back in file order. Also returns a span at the
/// start of the last requested file, for errors not tied to a source.
fn check_all(session: &mut Session, sources: &[Source], jobs: usize) -> (Vec<Diagnostic>, Span) {
    let ids: Vec<u32> = sources.iter().map(|s| session.sources.add(&s.path, s.text.as_str())).collect();
    let target = sources
        .iter()
        .zip(&ids)
        .filter(|(s, _)| s.requested)
        .map(|(_, id)| Span::new(*id, 0, 0))
        .next_back()
        .unwrap_or(Span::new(0, 0, 0));
    let mut errors: Vec<Option<Error>> = vec![None; sources.len()];
    if jobs <= 1 {
        for (i, s) in sources.iter().enumerate() {
            if let Err(e) = check_source(&mut session.globals, ids[i], &s.text) {
                errors[i] = Some(e);
            }
        }
    } else {
        let infos: Vec<_> = sources.iter().map(|s| source_info(&s.text)).collect();
        let deps = dependencies(&infos);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
        let mut done = vec![false; sources.len()];
        while done.iter().any(|d| !d) {
            let wave: Vec<usize> =
                (0..sources.len()).filter(|&i| !done[i] && deps[i].iter().all(|&j| done[j])).collect();
            let base = session.globals.clone();
            let results: Vec<(usize, Globals, Option<Error>)> = pool.install(|| {
                wave.par_iter()
                    .map(|&i| {
                        let mut g = base.clone();
                        let e = check_source(&mut g, ids[i], &sources[i].text).err();
                        (i, g, e)
                    })
                    .collect()
            });
            for (i, g, e) in results {
                session.globals.absorb(&g);
                errors[i] = e;
                done[i] = true;
            }
        }
    }
    let diags = errors.iter().flatten().map(|e| session.diagnostic(e)).collect();
    (diags, target)
}
