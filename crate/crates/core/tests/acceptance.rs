//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use hottcheck::diag::Span;
use hottcheck::kernel::env::instance;
use hottcheck::kernel::{Ctx, DeclKind, Elab, Ev, Globals};
use hottcheck::loopcalc::{circle_shape, oracle_exponent_sum, power, recognize, winding, word_term, LoopWord};
use hottcheck::parser::resolve::Resolver;
use hottcheck::parser::{parse_term, print};
use hottcheck::stdlib::{self, audit, axioms_in_cone, parse_sanctioned, shipped_manifest, Status};
use hottcheck::syntax::{alpha_equal, name, strip_locs, Term};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sp() -> Span {
    Span::new(0, 0, 0)
}

fn resolve(g: &Globals, src: &str) -> Result<Term, String> {
    let st = parse_term(0, src).map_err(|e| format!("`{src}`: {e:?}"))?;
    Resolver::new(g, vec![]).term(&st).map_err(|e| format!("`{src}`: {e:?}"))
}

/// Elaborates a closed term and returns its normal form.
fn closed_nf(g: &Globals, src: &str) -> Result<Term, String> {
    let t = resolve(g, src)?;
    let (t, _) = Elab::new(g).infer(&Ctx::new(), &t, sp()).map_err(|e| format!("`{src}`: {e:?}"))?;
    Ok(Ev::new(g).normalize(0, &t))
}

// 1. The shipped corpus checks and proves the required lemmas.
fn corpus_check() -> Outcome {
    let start = Instant::now();
    let mut files: Vec<String> = std::fs::read_dir(root().join("corpus"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "hott"))
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    files.sort();
    let out = Command::new(env!("CARGO_BIN_EXE_hottcheck"))
        .arg("check")
        .args(&files)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.code() == Some(0), || format!("check exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))?;

    let (s, _) = stdlib::load_corpus().map_err(|d| d.human())?;
    let g = &s.globals;
    let m = shipped_manifest();
    let corpus_decls = m.entries.len();
    ensure(corpus_decls >= 60, || format!("only {corpus_decls} manifest entries"))?;

    let required = [
        // inverse, concatenation, associativity
        "inv-inv", "concat-inv-left", "concat-inv-right", "concat-refl-left", "concat-refl-right", "concat-assoc",
        // ap and apd
        "ap-concat", "ap-inv", "ap-comp", "ap-id", "apd-refl", "apd-tr-const",
        // transport
        "transport-refl", "tr-const", "transport-concat", "transport-concat-fun", "transport-ap",
        "transport-path-right", "transport-path-left", "transport-path-loop", "transport-fun", "pair-eq",
        // contractibility and based path induction
        "unit-contr", "based-path-contr", "path-ind-strong", "path-ind-strong-refl", "based-path-transport",
        "J-as-transport",
        "loop-nontrivial",
    ];
    let mut missing = Vec::new();
    for n in required {
        match m.get(n) {
            Some(e) if e.status == Status::Proved => {}
            _ => missing.push(n),
        }
    }
    ensure(missing.is_empty(), || format!("not proved in the manifest: {missing:?}"))?;
    ensure(m.get("is-contr").is_some_and(|e| e.status == Status::Definition), || "is-contr missing".into())?;

    // Lives in the prelude because the equivalence machinery needs it.
    let sanctioned = parse_sanctioned(stdlib::SANCTIONED);
    let ti = g.decl("transport-isequiv").ok_or("transport-isequiv missing")?;
    ensure(ti.kind == DeclKind::Def, || "transport-isequiv is not a definition".into())?;
    let ax = axioms_in_cone(g, "transport-isequiv");
    ensure(ax.iter().all(|a| sanctioned.contains(&**a)), || format!("transport-isequiv rests on {ax:?}"))?;

    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{} files, {} declarations with the prelude, {:.1?}", files.len(), g.len(), elapsed))
}

// 2. Computation rules that must hold by conversion alone.
fn judgemental() -> Outcome {
    let (mut s, _) = stdlib::load_corpus().map_err(|d| d.human())?;
    let generic = r#"
def jc-concat {A : Type 0} (x : A) : concat.{0} (refl x) (refl x) = refl x := refl (refl x)
def jc-transport {A : Type 0} (P : A -> Type 0) (x : A) (u : P x) : transport.{0 0} P (refl x) u = u := refl u
def jc-j {A : Type 0} (x : A) (C : (y : A) -> x = y -> Type 0) (d : C x (refl x))
  : J [y p. C y p] d x (refl x) = d := refl d
def jc-circle {B : Type 0} (b : B) (l : b = b) : Circle-rec.{0} B b l base = b := refl b
def jc-circle-ind (P : Circle -> Type 0) (b : P base) (l : transport.{0 0} P loop b = b)
  : Circle-ind.{0} P b l base = b := refl b
"#;
    s.add_source("judgemental.hott", generic).map_err(|d| d.human())?;
    let g = &s.globals;

    let cases = [
        ("concat.{0} (refl zero) (refl zero)", "refl zero"),
        ("transport.{0 0} (\\(n : Nat). Nat) (refl zero) (succ zero)", "succ zero"),
        ("J [y p. Nat] (succ (succ zero)) zero (refl zero)", "succ (succ zero)"),
        ("Circle-rec.{0} Nat (succ zero) (refl (succ zero)) base", "succ zero"),
    ];
    for (lhs, rhs) in cases {
        let a = closed_nf(g, lhs)?;
        let b = closed_nf(g, rhs)?;
        ensure(alpha_equal(&a, &b), || format!("`{lhs}` normalizes to `{}`, not `{rhs}`", print(&a)))?;
    }

    // Conversion must not identify the loop with reflexivity.
    let mut s2 = s.clone();
    let bad = s2.add_source("k.hott", "def no : loop = refl base := refl base");
    ensure(bad.is_err(), || "loop converted to refl".into())?;
    Ok("concat, transport, J and circle elimination compute on refl and base".into())
}

fn random_words(n: usize) -> Vec<LoopWord> {
    let leaf = proptest::prop_oneof![proptest::strategy::Just(LoopWord::Refl), proptest::strategy::Just(LoopWord::Loop)];
    let strat = leaf.prop_recursive(12, 256, 2, |inner| {
        proptest::prop_oneof![
            inner.clone().prop_map(LoopWord::inv),
            (inner.clone(), inner).prop_map(|(a, b)| LoopWord::concat(a, b)),
        ]
    });
    let mut runner = TestRunner::deterministic();
    let mut out = Vec::new();
    while out.len() < n {
        let w = strat.new_tree(&mut runner).unwrap().current();
        if w.depth() <= 12 {
            out.push(w);
        }
    }
    out
}

// 3. Winding numbers of powers of the loop and of random loop words.
fn windings() -> Outcome {
    let (s, _) = stdlib::load_corpus().map_err(|d| d.human())?;
    let g = &s.globals;
    let c = circle_shape(g, "Circle").ok_or("no circle")?;
    let (concat, inv) = (name("concat"), name("inv"));
    let ev = Ev::new(g);
    let want_ty = ev.eval(&Vec::new(), &resolve(g, "Id Circle base base")?);
    let words = random_words(500);
    let start = Instant::now();
    for k in -50i64..=50 {
        let t = word_term(&power(k), &c, &concat, &inv);
        let (_, ty) = Elab::new(g).infer(&Ctx::new(), &t, sp()).map_err(|e| format!("power {k}: {e:?}"))?;
        ensure(ev.conv(0, &ty, &want_ty), || format!("power {k} is not a loop at base"))?;
        let w = recognize(g, &t, sp()).map_err(|e| format!("power {k}: {e:?}"))?;
        ensure(winding(&w) == k, || format!("power {k} winds {}", winding(&w)))?;
    }
    for w in &words {
        let t = word_term(w, &c, &concat, &inv);
        let got = recognize(g, &t, sp()).map_err(|e| format!("{w}: {e:?}"))?;
        let (a, b) = (winding(&got), oracle_exponent_sum(w));
        ensure(a == b, || format!("{w}: kernel says {a}, oracle {b}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("101 powers and {} random words agree, {:.1?}", words.len(), elapsed))
}

// 4. Ill-typed files fail with exactly the documented code.
fn negative_suite() -> Outcome {
    let dir = root().join("tests/bad");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    files.sort();
    ensure(files.len() >= 10, || format!("only {} files", files.len()))?;
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| e.to_string())?;
        let want = text.lines().next().and_then(|l| l.strip_prefix("-- expect:")).map(str::trim).ok_or("no expectation")?;
        let out = Command::new(env!("CARGO_BIN_EXE_hottcheck"))
            .args(["--diag-format", "machine", "check"])
            .arg(f)
            .output()
            .map_err(|e| e.to_string())?;
        let got = String::from_utf8_lossy(&out.stdout);
        let code = got.split('\t').next().unwrap_or("");
        ensure(out.status.code() == Some(1) && code == want, || {
            format!("{}: want {want}, got exit {:?} `{}`", f.display(), out.status.code(), got.trim())
        })?;
    }
    Ok(format!("{} files rejected with the expected code", files.len()))
}

// 5. Normalization is idempotent and type preserving; printing round trips.
fn nbe_and_printing() -> Outcome {
    let (s, _) = stdlib::load_corpus().map_err(|d| d.human())?;
    let g = &s.globals;
    let ev = Ev::new(g);
    let (mut bodies, mut terms) = (0, 0);
    for d in g.decls() {
        let inst = instance(g, &d, &vec![0; d.nlevels()]).map_err(|e| format!("{}: {e:?}", d.name))?;
        let mut all = vec![strip_locs(&inst.ty)];
        all.extend(inst.body.iter().map(strip_locs));
        for t in &all {
            let src = print(t);
            let back = resolve(g, &src)?;
            ensure(alpha_equal(&back, t), || format!("{}: `{src}` does not round trip", d.name))?;
            terms += 1;
        }
        if d.kind.is_generated() {
            continue;
        }
        let Some(body) = &inst.body else { continue };
        let nf = ev.normalize(0, body);
        ensure(ev.normalize(0, &nf) == nf, || format!("{}: normal form is not stable", d.name))?;
        Elab::new(g)
            .check(&Ctx::new(), &nf, &inst.ty_val, d.span)
            .map_err(|e| format!("{}: normal form does not check: {e:?}", d.name))?;
        bodies += 1;
    }
    Ok(format!("{bodies} bodies normalized and re-checked, {terms} terms round tripped"))
}

// 6. The postulated statements of the later chapters are well typed.
fn statements() -> Outcome {
    let (s, declared) = stdlib::load_corpus().map_err(|d| d.human())?;
    let g = &s.globals;
    let wanted: &[(&str, &[&str])] = &[
        ("fibseq.hott", &["les-lemma", "les-pi1", "les-pi2", "les-connect-1", "les-connect-0"]),
        ("hopf.hott", &["hopf-construction", "hopf-fibration"]),
        ("blakers.hott", &["blakers-massey-0-0", "blakers-massey-m1-0", "freudenthal-0", "stability-2-1", "stability-2-2"]),
    ];
    let mut n = 0;
    for (file, names) in wanted {
        let got = &declared.iter().find(|(f, _)| f == file).ok_or(format!("{file} not loaded"))?.1;
        for want in *names {
            ensure(got.iter().any(|x| &**x == *want), || format!("{file} does not declare {want}"))?;
            let d = g.decl(want).ok_or(format!("{want} missing"))?;
            ensure(d.kind == DeclKind::Axiom, || format!("{want} is not a postulate"))?;
            instance(g, &d, &[]).map_err(|e| format!("{want}: {e:?}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} statements across the exact sequence, Hopf and Blakers-Massey files"))
}

// 7. The dependency audit.
fn honesty() -> Outcome {
    let (s, declared) = stdlib::load_corpus().map_err(|d| d.human())?;
    let g = &s.globals;
    let a = audit(g, &shipped_manifest(), &parse_sanctioned(stdlib::SANCTIONED), &declared);
    ensure(a.ok(), || format!("{a:?}"))?;
    let ax = axioms_in_cone(g, "loop-nontrivial");
    ensure(ax.iter().any(|n| &**n == "ua"), || format!("loop-nontrivial rests on {ax:?}"))?;
    let proved = shipped_manifest().with_status(Status::Proved).count();
    Ok(format!("{proved} proved entries clean; loop-nontrivial uses ua"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 7] = [
        ("corpus check", corpus_check),
        ("judgemental computation", judgemental),
        ("winding numbers", windings),
        ("negative suite", negative_suite),
        ("normalization and round trip", nbe_and_printing),
        ("statement coverage", statements),
        ("dependency honesty", honesty),
    ];
    let mut failed = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match r {
            Ok(detail) => println!("criterion {}: PASS {label}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {label}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
