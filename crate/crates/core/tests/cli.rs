use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn hottcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hottcheck")).current_dir(root()).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn corpus_files() -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(root().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "hott"))
        .map(|p| format!("corpus/{}", p.file_name().unwrap().to_str().unwrap()))
        .collect();
    v.sort();
    v
}

fn bad_files() -> Vec<(PathBuf, String)> {
    let mut v: Vec<(PathBuf, String)> = std::fs::read_dir(root().join("tests/bad"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let code = text.lines().next().unwrap().trim_start_matches("-- expect:").trim().to_string();
            (p, code)
        })
        .collect();
    v.sort();
    v
}

#[test]
fn whole_corpus_checks() {
    let files = corpus_files();
    let mut args = vec!["check"];
    args.extend(files.iter().map(String::as_str));
    let o = hottcheck(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = String::from_utf8(o.stderr).unwrap();
    assert!(summary.starts_with(&format!("ok: {} file(s)", files.len())), "{summary}");
}

#[test]
fn parallel_check_agrees_with_sequential() {
    let files = corpus_files();
    let mut args = vec!["--jobs", "4", "check"];
    args.extend(files.iter().map(String::as_str));
    let par = hottcheck(&args);
    let seq = hottcheck(&args[2..]);
    assert_eq!(par.status.code(), Some(0));
    assert_eq!(par.stderr, seq.stderr);
}

#[test]
fn missing_file_is_a_usage_error() {
    assert_eq!(hottcheck(&["check", "no-such-file.hott"]).status.code(), Some(2));
    assert_eq!(hottcheck(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn negative_suite_reports_exact_codes() {
    let bad = bad_files();
    assert!(bad.len() >= 10);
    for (p, code) in bad {
        let o = hottcheck(&["--diag-format", "machine", "check", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{}", p.display());
        let out = stdout(&o);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 1, "{}: {out}", p.display());
        let fields: Vec<&str> = lines[0].split('\t').collect();
        assert_eq!(fields.len(), 5, "{}: {out}", p.display());
        assert_eq!(fields[0], code, "{}", p.display());
        assert!(Path::new(fields[1]).ends_with(p.file_name().unwrap()));
        let line: usize = fields[2].parse().unwrap();
        let col: usize = fields[3].parse().unwrap();
        assert!(line >= 1 && col >= 1);
        assert!(!fields[4].is_empty());
    }
}

#[test]
fn human_diagnostics_go_to_stderr() {
    let o = hottcheck(&["check", "tests/bad/axiom-k.hott"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("E-TYPE"));
}

#[test]
fn norm_prints_normal_forms() {
    let o = hottcheck(&["norm", "corpus/nat.hott", "--term", "four"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "succ (succ (succ (succ zero)))");

    let o = hottcheck(&["norm", "corpus/paths.hott", "--term", "concat-refl-refl"]);
    assert!(stdout(&o).trim().starts_with("refl "), "{}", stdout(&o));

    let o = hottcheck(&["norm", "corpus/circle-code.hott", "--term", "encode-loop"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ua"), "{}", stdout(&o));

    let o = hottcheck(&["norm", "corpus/nat.hott", "--term", "no-such-name"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn winding_subcommand() {
    let cases = [("loop-five", "5"), ("loop-minus-three", "-3"), ("loop-zero", "0"), ("loop-round-trip", "0")];
    for (name, want) in cases {
        let o = hottcheck(&["winding", "corpus/circle-code.hott", "--term", name]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        assert_eq!(stdout(&o).trim(), want, "{name}");
    }
}

#[test]
fn winding_rejects_terms_outside_the_loop_language() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.hott");
    std::fs::write(
        &f,
        "hit S where\n  | point b : S\n  | path l : b = b\n\
         def via-funext : b = b :=\n  \
           ap.{0 0} (\\(h : Nat -> S). h zero) (funext.{0} {Nat} {\\_. S} {\\_. b} {\\_. b} (\\_. l))\n\
         def two : Nat := succ (succ zero)\n",
    )
    .unwrap();
    let f = f.to_str().unwrap();
    let o = hottcheck(&["--diag-format", "machine", "winding", f, "--term", "via-funext"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("E-LOOPFORM\t"), "{}", stdout(&o));
    let o = hottcheck(&["--diag-format", "machine", "winding", f, "--term", "two"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("E-TYPE\t"), "{}", stdout(&o));
}

#[test]
fn no_prelude_hides_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("k.hott");
    std::fs::write(&f, "def x : Nat := zero\ndef y : x = x := refl x\n").unwrap();
    let f = f.to_str().unwrap();
    assert_eq!(hottcheck(&["--no-prelude", "check", f]).status.code(), Some(0));
    std::fs::write(dir.path().join("k.hott"), "def p : zero = zero := concat.{0} (refl zero) (refl zero)\n").unwrap();
    assert_eq!(hottcheck(&["check", f]).status.code(), Some(0));
    let o = hottcheck(&["--no-prelude", "--diag-format", "machine", "check", f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("E-SCOPE\t"), "{}", stdout(&o));
}
