//! Evaluation, read-back and conversion.

use std::collections::HashSet;
use std::sync::Arc;

use super::env::{ArgKind, Globals};
use super::value::*;
use crate::syntax::{Binder, Level, Motive, Name, Term, Tm};

pub fn lits(ls: &[Level]) -> Vec<u32> {
    ls.iter()
        .map(|l| l.lit().unwrap_or_else(|| panic!("internal error: uninstantiated universe variable")))
        .collect()
}

fn lvls(ls: &[u32]) -> Vec<Level> {
    ls.iter().map(|l| Level::Lit(*l)).collect()
}

/// An evaluator bound to a global environment. `fold` names definitions
/// that stay folded as opaque heads. A `lenient` evaluator turns ill-typed
/// eliminations into an unsolvable metavariable instead of panicking; the
/// elaborator uses it while arguments are not yet checked.
#[derive(Clone, Copy)]
pub struct Ev<'g> {
    pub g: &'g Globals,
    pub fold: Option<&'g HashSet<Name>>,
    pub lenient: bool,
}

pub const JUNK_META: usize = usize::MAX;

impl<'g> Ev<'g> {
    pub fn new(g: &'g Globals) -> Ev<'g> {
        Ev { g, fold: None, lenient: false }
    }

    pub fn folding(g: &'g Globals, fold: &'g HashSet<Name>) -> Ev<'g> {
        Ev { g, fold: Some(fold), lenient: false }
    }

    pub fn eval(&self, env: &Env, t: &Term) -> V {
        match t {
            Term::Var(i) => env[env.len() - 1 - i].clone(),
            Term::Universe(l) => Arc::new(Val::Univ(lits(std::slice::from_ref(l))[0])),
            Term::Pi(b, a, body) => Arc::new(Val::Pi(b.clone(), self.eval(env, a), Clo::new(env, body))),
            Term::Lam(b, _, body) => Arc::new(Val::Lam(b.clone(), Clo::new(env, body))),
            Term::App(f, a, imp) => {
                let f = self.eval(env, f);
                self.apply(&f, self.eval(env, a), *imp)
            }
            Term::Sigma(b, a, body) => {
                Arc::new(Val::Sigma(b.clone(), self.eval(env, a), Clo::new(env, body)))
            }
            Term::Pair(a, b) => Arc::new(Val::Pair(self.eval(env, a), self.eval(env, b))),
            Term::Fst(p) => self.fst(&self.eval(env, p)),
            Term::Snd(p) => self.snd(&self.eval(env, p)),
            Term::Id(a, x, y) => Arc::new(Val::Id(self.eval(env, a), self.eval(env, x), self.eval(env, y))),
            Term::Refl(a, x) => Arc::new(Val::Refl(self.eval(env, a), self.eval(env, x))),
            Term::J { motive, base, endpoint, path } => {
                let p = self.eval(env, path);
                self.j(
                    motive.names.clone(),
                    Clo::new(env, &motive.body),
                    self.eval(env, base),
                    self.eval(env, endpoint),
                    p,
                )
            }
            Term::Const(n, ls) => self.constant(n, &lits(ls)),
            Term::HitType(n, ls, args) => Arc::new(Val::HitType(
                n.clone(),
                lits(ls),
                args.iter().map(|a| self.eval(env, a)).collect(),
            )),
            Term::HitCtor(h, c, ls, args) => {
                let sig = self.g.hit_sig(h).expect("known HIT");
                let args: Vec<V> = args.iter().map(|a| self.eval(env, a)).collect();
                match sig.point_index(c) {
                    Some(index) => {
                        let (params, own) = args.split_at(sig.nparams);
                        Arc::new(Val::HitCtor {
                            hit: h.clone(),
                            ctor: c.clone(),
                            index,
                            levels: lits(ls),
                            params: params.to_vec(),
                            args: own.to_vec(),
                        })
                    }
                    None => Arc::new(Val::Neu(
                        Head::PathCtor { hit: h.clone(), ctor: c.clone(), levels: lits(ls), args },
                        Vec::new(),
                    )),
                }
            }
            Term::HitElim { hit, motive, methods, scrutinee } => {
                let s = self.eval(env, scrutinee);
                let methods = Arc::new(methods.iter().map(|m| self.eval(env, m)).collect());
                self.hit_elim(hit, &motive.names[0], &Clo::new(env, &motive.body), &methods, s)
            }
            Term::Empty => Arc::new(Val::Empty),
            Term::EmptyElim { motive, scrutinee } => {
                let s = self.eval(env, scrutinee);
                self.stuck(
                    s,
                    Elim::EmptyElim { name: motive.names[0].clone(), motive: Clo::new(env, &motive.body) },
                )
            }
            Term::Unit => Arc::new(Val::Unit),
            Term::Star => Arc::new(Val::Star),
            Term::UnitElim { motive, base, scrutinee } => {
                let s = self.eval(env, scrutinee);
                let base = self.eval(env, base);
                match &*s {
                    Val::Star => base,
                    _ => self.stuck(
                        s,
                        Elim::UnitElim { name: motive.names[0].clone(), motive: Clo::new(env, &motive.body), base },
                    ),
                }
            }
            Term::Sum(a, b) => Arc::new(Val::Sum(self.eval(env, a), self.eval(env, b))),
            Term::Inl(a) => Arc::new(Val::Inl(self.eval(env, a))),
            Term::Inr(a) => Arc::new(Val::Inr(self.eval(env, a))),
            Term::SumElim { motive, left, right, scrutinee } => {
                let s = self.eval(env, scrutinee);
                let (l, r) = (self.eval(env, left), self.eval(env, right));
                self.sum_elim(&motive.names[0], &Clo::new(env, &motive.body), l, r, s)
            }
            Term::Nat => Arc::new(Val::Nat),
            Term::Zero => Arc::new(Val::Zero),
            Term::Succ(n) => Arc::new(Val::Succ(self.eval(env, n))),
            Term::NatElim { motive, zero, succ, scrutinee } => {
                let s = self.eval(env, scrutinee);
                let (z, sc) = (self.eval(env, zero), self.eval(env, succ));
                self.nat_elim(&motive.names[0], &Clo::new(env, &motive.body), &z, &sc, s)
            }
            Term::Ann(a, _) => self.eval(env, a),
            Term::Loc(_, a) => self.eval(env, a),
            Term::Meta(k) => Val::meta(*k),
            Term::Hole => panic!("internal error: evaluating an unelaborated hole"),
        }
    }

    pub fn constant(&self, n: &Name, ls: &[u32]) -> V {
        let decl = self.g.decl(n).unwrap_or_else(|| panic!("internal error: unknown constant {n}"));
        if !decl.kind.unfolds() || self.fold.is_some_and(|f| f.contains(n)) {
            return Arc::new(Val::Neu(Head::Const(n.clone(), ls.to_vec()), Vec::new()));
        }
        let inst = super::env::instance_or_panic(self.g, &decl, ls);
        if self.fold.is_some() {
            // Cached values were computed with everything unfolded.
            let body = inst.body.as_ref().expect("definition has a body");
            return self.eval(&Vec::new(), body);
        }
        inst.body_val.clone().expect("definition has a body")
    }

    fn stuck(&self, s: V, e: Elim) -> V {
        match &*s {
            Val::Neu(h, sp) => {
                let mut sp = sp.clone();
                sp.push(e);
                Arc::new(Val::Neu(h.clone(), sp))
            }
            _ if self.lenient => Val::meta(JUNK_META),
            other => panic!("internal error: ill-typed elimination of {other:?}"),
        }
    }

    pub fn inst(&self, c: &Clo, a: V) -> V {
        match c {
            Clo::Env { env, body } => {
                let mut e = (**env).clone();
                e.push(a);
                self.eval(&e, body)
            }
            Clo::HitIh { hit, name, motive, methods, fun } => {
                let x = self.apply(fun, a, false);
                self.hit_elim(hit, name, motive, methods, x)
            }
        }
    }

    pub fn inst2(&self, c: &Clo, a: V, b: V) -> V {
        match c {
            Clo::Env { env, body } => {
                let mut e = (**env).clone();
                e.push(a);
                e.push(b);
                self.eval(&e, body)
            }
            Clo::HitIh { .. } => unreachable!("binary HIT closure"),
        }
    }

    pub fn apply(&self, f: &V, a: V, imp: bool) -> V {
        match &**f {
            Val::Lam(_, c) => self.inst(c, a),
            Val::Neu(..) => self.stuck(f.clone(), Elim::App(a, imp)),
            _ if self.lenient => Val::meta(JUNK_META),
            other => panic!("internal error: applying a non-function {other:?}"),
        }
    }

    pub fn fst(&self, p: &V) -> V {
        match &**p {
            Val::Pair(a, _) => a.clone(),
            _ => self.stuck(p.clone(), Elim::Fst),
        }
    }

    pub fn snd(&self, p: &V) -> V {
        match &**p {
            Val::Pair(_, b) => b.clone(),
            _ => self.stuck(p.clone(), Elim::Snd),
        }
    }

    pub fn j(&self, names: Vec<Name>, motive: Clo, base: V, endpoint: V, path: V) -> V {
        match &*path {
            Val::Refl(..) => base,
            _ => self.stuck(path, Elim::J { names, motive, base, endpoint }),
        }
    }

    pub fn sum_elim(&self, name: &Name, motive: &Clo, l: V, r: V, s: V) -> V {
        match &*s {
            Val::Inl(a) => self.apply(&l, a.clone(), false),
            Val::Inr(b) => self.apply(&r, b.clone(), false),
            _ => self.stuck(s, Elim::SumElim { name: name.clone(), motive: motive.clone(), left: l, right: r }),
        }
    }

    pub fn nat_elim(&self, name: &Name, motive: &Clo, z: &V, s: &V, n: V) -> V {
        // Iterate over the numeral instead of recursing so long numerals
        // cannot exhaust the stack.
        let mut cur = n;
        let mut preds = Vec::new();
        while let Val::Succ(p) = &*cur {
            let p = p.clone();
            preds.push(p.clone());
            cur = p;
        }
        let mut acc = match &*cur {
            Val::Zero => z.clone(),
            _ => self.stuck(
                cur.clone(),
                Elim::NatElim { name: name.clone(), motive: motive.clone(), zero: z.clone(), succ: s.clone() },
            ),
        };
        for p in preds.into_iter().rev() {
            let f = self.apply(s, p, false);
            acc = self.apply(&f, acc, false);
        }
        acc
    }

    pub fn hit_elim(&self, hit: &Name, name: &Name, motive: &Clo, methods: &Arc<Vec<V>>, s: V) -> V {
        match &*s {
            Val::HitCtor { hit: h, index, args, .. } if h == hit => {
                let sig = self.g.hit_sig(hit).expect("known HIT");
                let mut f = methods[*index].clone();
                for (a, kind) in args.iter().zip(&sig.points[*index].kinds) {
                    f = self.apply(&f, a.clone(), false);
                    match kind {
                        ArgKind::Plain => {}
                        ArgKind::Rec => {
                            let ih = self.hit_elim(hit, name, motive, methods, a.clone());
                            f = self.apply(&f, ih, false);
                        }
                        ArgKind::RecFun => {
                            let ih = Arc::new(Val::Lam(
                                Binder::explicit("b"),
                                Clo::HitIh {
                                    hit: hit.clone(),
                                    name: name.clone(),
                                    motive: Box::new(motive.clone()),
                                    methods: methods.clone(),
                                    fun: a.clone(),
                                },
                            ));
                            f = self.apply(&f, ih, false);
                        }
                    }
                }
                f
            }
            _ => self.stuck(
                s,
                Elim::HitElim {
                    hit: hit.clone(),
                    name: name.clone(),
                    motive: motive.clone(),
                    methods: methods.clone(),
                },
            ),
        }
    }

    // ---- read-back ----

    pub fn quote(&self, d: usize, v: &V) -> Term {
        let q = |v: &V| Arc::new(self.quote(d, v));
        match &**v {
            Val::Univ(l) => Term::Universe(Level::Lit(*l)),
            Val::Pi(b, a, c) => Term::Pi(b.clone(), q(a), Arc::new(self.quote_under(d, c))),
            Val::Lam(b, c) => Term::Lam(b.clone(), None, Arc::new(self.quote_under(d, c))),
            Val::Sigma(b, a, c) => Term::Sigma(b.clone(), q(a), Arc::new(self.quote_under(d, c))),
            Val::Pair(a, b) => Term::Pair(q(a), q(b)),
            Val::Id(a, x, y) => Term::Id(q(a), q(x), q(y)),
            Val::Refl(a, x) => Term::Refl(q(a), q(x)),
            Val::Empty => Term::Empty,
            Val::Unit => Term::Unit,
            Val::Star => Term::Star,
            Val::Sum(a, b) => Term::Sum(q(a), q(b)),
            Val::Inl(a) => Term::Inl(q(a)),
            Val::Inr(a) => Term::Inr(q(a)),
            Val::Nat => Term::Nat,
            Val::Zero => Term::Zero,
            Val::Succ(n) => Term::Succ(q(n)),
            Val::HitType(n, ls, args) => {
                Term::HitType(n.clone(), lvls(ls), args.iter().map(|a| self.quote(d, a)).collect())
            }
            Val::HitCtor { hit, ctor, levels, params, args, .. } => Term::HitCtor(
                hit.clone(),
                ctor.clone(),
                lvls(levels),
                params.iter().chain(args).map(|a| self.quote(d, a)).collect(),
            ),
            Val::Neu(h, sp) => {
                let mut t = match h {
                    Head::Var(l) => Term::Var(d - 1 - l),
                    Head::Const(n, ls) => Term::Const(n.clone(), lvls(ls)),
                    Head::PathCtor { hit, ctor, levels, args } => Term::HitCtor(
                        hit.clone(),
                        ctor.clone(),
                        lvls(levels),
                        args.iter().map(|a| self.quote(d, a)).collect(),
                    ),
                    Head::Meta(k) => Term::Meta(*k),
                };
                for e in sp {
                    t = self.quote_elim(d, t, e);
                }
                t
            }
        }
    }

    fn quote_under(&self, d: usize, c: &Clo) -> Term {
        self.quote(d + 1, &self.inst(c, Val::var(d)))
    }

    fn quote_motive1(&self, d: usize, name: &Name, c: &Clo) -> Motive {
        Motive { names: vec![name.clone()], body: Arc::new(self.quote_under(d, c)) }
    }

    fn quote_elim(&self, d: usize, t: Term, e: &Elim) -> Term {
        let t: Tm = Arc::new(t);
        let q = |v: &V| Arc::new(self.quote(d, v));
        match e {
            Elim::App(a, imp) => Term::App(t, q(a), *imp),
            Elim::Fst => Term::Fst(t),
            Elim::Snd => Term::Snd(t),
            Elim::J { names, motive, base, endpoint } => Term::J {
                motive: Motive {
                    names: names.clone(),
                    body: Arc::new(self.quote(d + 2, &self.inst2(motive, Val::var(d), Val::var(d + 1)))),
                },
                base: q(base),
                endpoint: q(endpoint),
                path: t,
            },
            Elim::EmptyElim { name, motive } => {
                Term::EmptyElim { motive: self.quote_motive1(d, name, motive), scrutinee: t }
            }
            Elim::UnitElim { name, motive, base } => Term::UnitElim {
                motive: self.quote_motive1(d, name, motive),
                base: q(base),
                scrutinee: t,
            },
            Elim::SumElim { name, motive, left, right } => Term::SumElim {
                motive: self.quote_motive1(d, name, motive),
                left: q(left),
                right: q(right),
                scrutinee: t,
            },
            Elim::NatElim { name, motive, zero, succ } => Term::NatElim {
                motive: self.quote_motive1(d, name, motive),
                zero: q(zero),
                succ: q(succ),
                scrutinee: t,
            },
            Elim::HitElim { hit, name, motive, methods } => Term::HitElim {
                hit: hit.clone(),
                motive: self.quote_motive1(d, name, motive),
                methods: methods.iter().map(|m| self.quote(d, m)).collect(),
                scrutinee: t,
            },
        }
    }

    // ---- conversion ----

    /// Untyped conversion with eta for functions and pairs.
    pub fn conv(&self, d: usize, a: &V, b: &V) -> bool {
        if Arc::ptr_eq(a, b) {
            return true;
        }
        match (&**a, &**b) {
            (Val::Lam(_, c1), Val::Lam(_, c2)) => {
                let x = Val::var(d);
                self.conv(d + 1, &self.inst(c1, x.clone()), &self.inst(c2, x))
            }
            (Val::Lam(_, c), _) => {
                let x = Val::var(d);
                self.conv(d + 1, &self.inst(c, x.clone()), &self.apply(b, x, false))
            }
            (_, Val::Lam(_, c)) => {
                let x = Val::var(d);
                self.conv(d + 1, &self.apply(a, x.clone(), false), &self.inst(c, x))
            }
            (Val::Pair(a1, b1), Val::Pair(a2, b2)) => self.conv(d, a1, a2) && self.conv(d, b1, b2),
            (Val::Pair(a1, b1), Val::Neu(..)) => {
                self.conv(d, a1, &self.fst(b)) && self.conv(d, b1, &self.snd(b))
            }
            (Val::Neu(..), Val::Pair(a2, b2)) => {
                self.conv(d, &self.fst(a), a2) && self.conv(d, &self.snd(a), b2)
            }
            (Val::Univ(i), Val::Univ(j)) => i == j,
            (Val::Pi(b1, a1, c1), Val::Pi(b2, a2, c2)) | (Val::Sigma(b1, a1, c1), Val::Sigma(b2, a2, c2)) => {
                b1.implicit == b2.implicit && self.conv(d, a1, a2) && self.conv_under(d, c1, c2)
            }
            (Val::Id(a1, x1, y1), Val::Id(a2, x2, y2)) => {
                self.conv(d, a1, a2) && self.conv(d, x1, x2) && self.conv(d, y1, y2)
            }
            (Val::Refl(_, x1), Val::Refl(_, x2)) => self.conv(d, x1, x2),
            (Val::Empty, Val::Empty)
            | (Val::Unit, Val::Unit)
            | (Val::Star, Val::Star)
            | (Val::Nat, Val::Nat)
            | (Val::Zero, Val::Zero) => true,
            (Val::Sum(a1, b1), Val::Sum(a2, b2)) => self.conv(d, a1, a2) && self.conv(d, b1, b2),
            (Val::Inl(x), Val::Inl(y)) | (Val::Inr(x), Val::Inr(y)) | (Val::Succ(x), Val::Succ(y)) => {
                self.conv(d, x, y)
            }
            (Val::HitType(n1, l1, a1), Val::HitType(n2, l2, a2)) => {
                n1 == n2 && l1 == l2 && self.conv_all(d, a1, a2)
            }
            (
                Val::HitCtor { hit: h1, ctor: c1, levels: l1, params: p1, args: a1, .. },
                Val::HitCtor { hit: h2, ctor: c2, levels: l2, params: p2, args: a2, .. },
            ) => h1 == h2 && c1 == c2 && l1 == l2 && self.conv_all(d, p1, p2) && self.conv_all(d, a1, a2),
            (Val::Neu(h1, s1), Val::Neu(h2, s2)) => {
                self.conv_head(d, h1, h2)
                    && s1.len() == s2.len()
                    && s1.iter().zip(s2).all(|(e1, e2)| self.conv_elim(d, e1, e2))
            }
            _ => false,
        }
    }

    fn conv_all(&self, d: usize, a: &[V], b: &[V]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.conv(d, x, y))
    }

    fn conv_under(&self, d: usize, c1: &Clo, c2: &Clo) -> bool {
        let x = Val::var(d);
        self.conv(d + 1, &self.inst(c1, x.clone()), &self.inst(c2, x))
    }

    fn conv_head(&self, d: usize, h1: &Head, h2: &Head) -> bool {
        match (h1, h2) {
            (Head::Var(i), Head::Var(j)) => i == j,
            (Head::Const(n1, l1), Head::Const(n2, l2)) => n1 == n2 && l1 == l2,
            (
                Head::PathCtor { hit: h1, ctor: c1, levels: l1, args: a1 },
                Head::PathCtor { hit: h2, ctor: c2, levels: l2, args: a2 },
            ) => h1 == h2 && c1 == c2 && l1 == l2 && self.conv_all(d, a1, a2),
            (Head::Meta(i), Head::Meta(j)) => i == j,
            _ => false,
        }
    }

    fn conv_elim(&self, d: usize, e1: &Elim, e2: &Elim) -> bool {
        match (e1, e2) {
            (Elim::App(a, _), Elim::App(b, _)) => self.conv(d, a, b),
            (Elim::Fst, Elim::Fst) | (Elim::Snd, Elim::Snd) => true,
            (
                Elim::J { motive: m1, base: b1, endpoint: e1, .. },
                Elim::J { motive: m2, base: b2, endpoint: e2, .. },
            ) => {
                let (x, y) = (Val::var(d), Val::var(d + 1));
                self.conv(d + 2, &self.inst2(m1, x.clone(), y.clone()), &self.inst2(m2, x, y))
                    && self.conv(d, b1, b2)
                    && self.conv(d, e1, e2)
            }
            (Elim::EmptyElim { motive: m1, .. }, Elim::EmptyElim { motive: m2, .. }) => {
                self.conv_under(d, m1, m2)
            }
            (Elim::UnitElim { motive: m1, base: b1, .. }, Elim::UnitElim { motive: m2, base: b2, .. }) => {
                self.conv_under(d, m1, m2) && self.conv(d, b1, b2)
            }
            (
                Elim::SumElim { motive: m1, left: l1, right: r1, .. },
                Elim::SumElim { motive: m2, left: l2, right: r2, .. },
            ) => self.conv_under(d, m1, m2) && self.conv(d, l1, l2) && self.conv(d, r1, r2),
            (
                Elim::NatElim { motive: m1, zero: z1, succ: s1, .. },
                Elim::NatElim { motive: m2, zero: z2, succ: s2, .. },
            ) => self.conv_under(d, m1, m2) && self.conv(d, z1, z2) && self.conv(d, s1, s2),
            (
                Elim::HitElim { hit: h1, motive: m1, methods: ms1, .. },
                Elim::HitElim { hit: h2, motive: m2, methods: ms2, .. },
            ) => h1 == h2 && self.conv_under(d, m1, m2) && self.conv_all(d, ms1, ms2),
            _ => false,
        }
    }

    /// Normal form of a closed or open term in an environment of variables.
    pub fn normalize(&self, depth: usize, t: &Term) -> Term {
        let env: Env = (0..depth).map(Val::var).collect();
        self.quote(depth, &self.eval(&env, t))
    }
}
