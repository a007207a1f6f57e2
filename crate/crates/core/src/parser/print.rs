//! Pretty printer. Output reparses to an alpha-equal term.

use std::collections::BTreeSet;

use super::lexer::is_ident_text;
use super::resolve::is_builtin;
use crate::syntax::{constants, Level, Motive, Name, Term};

// Precedence levels, loosest first.
const TERM: u8 = 0;
const SIGMA: u8 = 1;
const EQ: u8 = 2;
const SUM: u8 = 3;
const APP: u8 = 4;
const ATOM: u8 = 5;

pub struct Printer {
    names: Vec<String>,
    avoid: BTreeSet<String>,
}

/// Prints `t` in a context whose variables are named by `ctx` (outermost first).
pub fn print_in(ctx: &[Name], t: &Term) -> String {
    let mut avoid = BTreeSet::new();
    let mut cs = BTreeSet::new();
    constants(t, &mut cs);
    for c in cs {
        avoid.insert(c.to_string());
    }
    let mut p = Printer { names: ctx.iter().map(|n| n.to_string()).collect(), avoid };
    let mut out = String::new();
    p.go(t, TERM, &mut out);
    out
}

pub fn print(t: &Term) -> String {
    print_in(&[], t)
}

fn occurs(t: &Term, idx: usize) -> bool {
    let mut hit = false;
    let _ = crate::syntax::map_vars(t, 0, &mut |d, i| {
        if i == idx + d {
            hit = true;
        }
        Ok::<Term, ()>(Term::Var(i))
    });
    hit
}

impl Printer {
    fn fresh(&self, hint: &str) -> String {
        let base = if is_ident_text(hint) && !is_builtin(hint) { hint.to_string() } else { "x".to_string() };
        let taken = |s: &str| self.names.iter().any(|n| n == s) || self.avoid.contains(s) || is_builtin(s);
        if !taken(&base) {
            return base;
        }
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
        let stem = if stem.is_empty() || stem.ends_with('-') { format!("{base}x") } else { stem };
        (1..)
            .map(|k| format!("{stem}{k}"))
            .find(|s| !taken(s))
            .expect("infinite supply")
    }

    fn with<R>(&mut self, hint: &str, f: impl FnOnce(&mut Printer, &str) -> R) -> R {
        let n = self.fresh(hint);
        self.names.push(n.clone());
        let r = f(self, &n);
        self.names.pop();
        r
    }

    fn var(&self, i: usize) -> String {
        if i < self.names.len() {
            self.names[self.names.len() - 1 - i].clone()
        } else {
            format!("#{i}")
        }
    }

    fn levels(ls: &[Level]) -> String {
        if ls.is_empty() {
            String::new()
        } else {
            let inner: Vec<String> = ls
                .iter()
                .map(|l| match l {
                    Level::Lit(n) => n.to_string(),
                    Level::Var(i) => format!("u{i}"),
                })
                .collect();
            format!(".{{{}}}", inner.join(" "))
        }
    }

    fn motive(&mut self, m: &Motive, out: &mut String) {
        let mut chosen = Vec::new();
        for n in &m.names {
            let f = self.fresh(n);
            self.names.push(f.clone());
            chosen.push(f);
        }
        out.push('[');
        out.push_str(&chosen.join(" "));
        out.push_str(". ");
        self.go(&m.body, TERM, out);
        out.push(']');
        for _ in &m.names {
            self.names.pop();
        }
    }

    fn head_args(&mut self, head: &str, args: &[&Term], out: &mut String) {
        out.push_str(head);
        for a in args {
            out.push(' ');
            self.go(a, ATOM, out);
        }
    }

    fn go(&mut self, t: &Term, prec: u8, out: &mut String) {
        let need = |p: u8| prec > p;
        match t {
            Term::Loc(_, a) => self.go(a, prec, out),
            Term::Var(i) => out.push_str(&self.var(*i)),
            Term::Universe(l) => {
                let s = match l {
                    Level::Lit(n) => format!("Type {n}"),
                    Level::Var(i) => format!("Type u{i}"),
                };
                if need(APP) {
                    out.push_str(&format!("({s})"));
                } else {
                    out.push_str(&s);
                }
            }
            Term::Pi(b, a, body) => {
                if need(TERM) {
                    out.push('(');
                }
                if !b.implicit && !occurs(body, 0) {
                    self.go(a, SIGMA, out);
                    out.push_str(" -> ");
                    self.with("_", |p, _| p.go(body, TERM, out));
                } else {
                    let mut dom = String::new();
                    self.go(a, TERM, &mut dom);
                    self.with(&b.name, |p, n| {
                        if b.implicit {
                            out.push_str(&format!("{{{n} : {dom}}} -> "));
                        } else {
                            out.push_str(&format!("({n} : {dom}) -> "));
                        }
                        p.go(body, TERM, out);
                    });
                }
                if need(TERM) {
                    out.push(')');
                }
            }
            Term::Sigma(b, a, body) => {
                if need(SIGMA) {
                    out.push('(');
                }
                if !occurs(body, 0) {
                    self.go(a, EQ, out);
                    out.push_str(" * ");
                    self.with("_", |p, _| p.go(body, SIGMA, out));
                } else {
                    let mut dom = String::new();
                    self.go(a, TERM, &mut dom);
                    self.with(&b.name, |p, n| {
                        out.push_str(&format!("({n} : {dom}) * "));
                        p.go(body, SIGMA, out);
                    });
                }
                if need(SIGMA) {
                    out.push(')');
                }
            }
            Term::Lam(b, ann, body) => {
                if need(TERM) {
                    out.push('(');
                }
                let mut dom = None;
                if let Some(a) = ann {
                    let mut s = String::new();
                    self.go(a, TERM, &mut s);
                    dom = Some(s);
                }
                self.with(&b.name, |p, n| {
                    out.push('\\');
                    match (&dom, b.implicit) {
                        (None, false) => out.push_str(n),
                        (None, true) => out.push_str(&format!("{{{n}}}")),
                        (Some(d), false) => out.push_str(&format!("({n} : {d})")),
                        (Some(d), true) => out.push_str(&format!("{{{n} : {d}}}")),
                    }
                    out.push_str(". ");
                    p.go(body, TERM, out);
                });
                if need(TERM) {
                    out.push(')');
                }
            }
            Term::App(f, a, imp) => {
                if need(APP) {
                    out.push('(');
                }
                self.go(f, APP, out);
                if *imp {
                    out.push_str(" {");
                    self.go(a, TERM, out);
                    out.push('}');
                } else {
                    out.push(' ');
                    self.go(a, ATOM, out);
                }
                if need(APP) {
                    out.push(')');
                }
            }
            Term::Pair(a, b) => {
                out.push('(');
                self.go(a, TERM, out);
                out.push_str(", ");
                self.go(b, TERM, out);
                out.push(')');
            }
            Term::Ann(a, b) => {
                out.push('(');
                self.go(a, TERM, out);
                out.push_str(" : ");
                self.go(b, TERM, out);
                out.push(')');
            }
            Term::Sum(a, b) => {
                if need(SUM) {
                    out.push('(');
                }
                self.go(a, APP, out);
                out.push_str(" + ");
                self.go(b, SUM, out);
                if need(SUM) {
                    out.push(')');
                }
            }
            Term::Const(n, ls) => out.push_str(&format!("{n}{}", Self::levels(ls))),
            Term::Hole => out.push('_'),
            Term::Meta(k) => out.push_str(&format!("?{k}")),
            Term::Empty => out.push_str("Empty"),
            Term::Unit => out.push_str("Unit"),
            Term::Star => out.push_str("tt"),
            Term::Nat => out.push_str("Nat"),
            Term::Zero => out.push_str("zero"),
            _ => {
                if need(APP) {
                    out.push('(');
                }
                self.compound(t, out);
                if need(APP) {
                    out.push(')');
                }
            }
        }
    }

    /// Keyword-headed forms printed as applications.
    fn compound(&mut self, t: &Term, out: &mut String) {
        match t {
            Term::Fst(p) => self.head_args("fst", &[p], out),
            Term::Snd(p) => self.head_args("snd", &[p], out),
            Term::Succ(n) => self.head_args("succ", &[n], out),
            Term::Inl(a) => self.head_args("inl", &[a], out),
            Term::Inr(a) => self.head_args("inr", &[a], out),
            Term::Id(a, x, y) => self.head_args("Id", &[a, x, y], out),
            Term::Refl(a, x) => {
                out.push_str("refl");
                if !matches!(a.strip_loc(), Term::Hole) {
                    out.push_str(" {");
                    self.go(a, TERM, out);
                    out.push('}');
                }
                out.push(' ');
                self.go(x, ATOM, out);
            }
            Term::J { motive, base, endpoint, path } => {
                out.push_str("J ");
                self.motive(motive, out);
                for a in [base, endpoint, path] {
                    out.push(' ');
                    self.go(a, ATOM, out);
                }
            }
            Term::HitType(n, ls, args) => {
                let head = format!("%{n}{}", Self::levels(ls));
                let args: Vec<&Term> = args.iter().collect();
                self.head_args(&head, &args, out);
            }
            Term::HitCtor(_, c, ls, args) => {
                let head = format!("%{c}{}", Self::levels(ls));
                let args: Vec<&Term> = args.iter().collect();
                self.head_args(&head, &args, out);
            }
            Term::HitElim { hit, motive, methods, scrutinee } => {
                out.push_str(&format!("elim {hit} "));
                self.motive(motive, out);
                for a in methods.iter().chain(std::iter::once(&**scrutinee)) {
                    out.push(' ');
                    self.go(a, ATOM, out);
                }
            }
            Term::EmptyElim { motive, scrutinee } => {
                out.push_str("ind-empty ");
                self.motive(motive, out);
                out.push(' ');
                self.go(scrutinee, ATOM, out);
            }
            Term::UnitElim { motive, base, scrutinee } => {
                out.push_str("ind-unit ");
                self.motive(motive, out);
                for a in [base, scrutinee] {
                    out.push(' ');
                    self.go(a, ATOM, out);
                }
            }
            Term::SumElim { motive, left, right, scrutinee } => {
                out.push_str("ind-sum ");
                self.motive(motive, out);
                for a in [left, right, scrutinee] {
                    out.push(' ');
                    self.go(a, ATOM, out);
                }
            }
            Term::NatElim { motive, zero, succ, scrutinee } => {
                out.push_str("ind-nat ");
                self.motive(motive, out);
                for a in [zero, succ, scrutinee] {
                    out.push(' ');
                    self.go(a, ATOM, out);
                }
            }
            other => unreachable!("not a compound form: {other:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{name, Binder};
    use std::sync::Arc;

    #[test]
    fn identity_lambda() {
        assert_eq!(print(&Term::lam(Binder::explicit("x"), Term::Var(0))), "\\x. x");
    }

    #[test]
    fn dependent_pi() {
        let t = Term::pi(Binder::explicit("A"), Term::Universe(Level::Lit(0)), Term::Var(0));
        assert_eq!(print(&t), "(A : Type 0) -> A");
    }

    #[test]
    fn shadowing_is_avoided() {
        let t = Term::lam(Binder::explicit("x"), Term::lam(Binder::explicit("x"), Term::Var(1)));
        assert_eq!(print(&t), "\\x. \\x1. x");
        let t = Term::lam(Binder::explicit("f"), Term::app(Term::Const(name("f"), vec![]), Term::Var(0)));
        assert_eq!(print(&t), "\\f1. f f1");
    }

    #[test]
    fn refl_and_levels() {
        let t = Term::Refl(Arc::new(Term::Nat), Arc::new(Term::Zero));
        assert_eq!(print(&t), "refl {Nat} zero");
        let t = Term::Const(name("ua"), vec![Level::Lit(1)]);
        assert_eq!(print(&t), "ua.{1}");
    }

    #[test]
    fn numerals() {
        let mut t = Term::Zero;
        for _ in 0..2 {
            t = Term::Succ(Arc::new(t));
        }
        assert_eq!(print(&t), "succ (succ zero)");
    }
}
