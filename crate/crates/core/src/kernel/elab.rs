//! Bidirectional elaboration. `infer` and `check` return the elaborated
//! core term; implicit arguments are solved by first-order matching.

use std::collections::HashMap;
use std::sync::Arc;

use super::env::{instance, Globals, Instance};
use super::nbe::{lits, Ev};
use super::value::*;
use crate::diag::{Code, Error, Result, Span};
use crate::parser::print::print_in;
use crate::syntax::{contains_meta, map_vars, subst_metas, try_shift, Binder, Level, Motive, Name, Term, Tm};

#[derive(Clone, Default)]
pub struct Ctx {
    pub names: Vec<Name>,
    pub types: Vec<V>,
    pub env: Env,
}

impl Ctx {
    pub fn new() -> Ctx {
        Ctx::default()
    }

    pub fn depth(&self) -> usize {
        self.names.len()
    }

    pub fn bind(&self, name: &Name, ty: V) -> Ctx {
        let mut c = self.clone();
        c.env.push(Val::var(c.depth()));
        c.names.push(name.clone());
        c.types.push(ty);
        c
    }
}

/// Replaces variable 0 of `t` by `arg`, keeping the binder.
pub fn replace_top(t: &Term, arg: &Term) -> Term {
    map_vars(t, 0, &mut |d, i| -> Result<Term, ()> {
        Ok(if i == d { crate::syntax::shift(arg, 0, d as isize) } else { Term::Var(i) })
    })
    .expect("total")
}

enum Item<'t> {
    Meta { k: usize, implicit: bool },
    Pre { term: Term, ty: V, implicit: bool, span: Span },
    Deferred { raw: &'t Term, implicit: bool, span: Span },
}

fn span_of(t: &Term, fallback: Span) -> Span {
    match t {
        Term::Loc(s, _) => *s,
        _ => fallback,
    }
}

fn inferable(t: &Term) -> bool {
    match t.strip_loc() {
        Term::Lam(..) | Term::Pair(..) | Term::Inl(_) | Term::Inr(_) | Term::Hole => false,
        Term::Refl(a, x) if matches!(a.strip_loc(), Term::Hole) => inferable(x),
        Term::Id(a, x, _) if matches!(a.strip_loc(), Term::Hole) => inferable(x),
        Term::App(f, _, _) => inferable(f),
        _ => true,
    }
}

// Reserved for ill-typed intermediate values; never solved.
use super::nbe::JUNK_META as JUNK;

pub struct Elab<'g> {
    pub g: &'g Globals,
    ev: Ev<'g>,
    next_meta: usize,
}

impl<'g> Elab<'g> {
    pub fn new(g: &'g Globals) -> Elab<'g> {
        Elab { g, ev: Ev::new(g), next_meta: 0 }
    }

    pub fn ev(&self) -> Ev<'g> {
        self.ev
    }

    fn eval(&self, ctx: &Ctx, t: &Term) -> V {
        self.ev.eval(&ctx.env, t)
    }

    fn quote(&self, ctx: &Ctx, v: &V) -> Term {
        self.ev.quote(ctx.depth(), v)
    }

    pub fn show(&self, ctx: &Ctx, v: &V) -> String {
        print_in(&ctx.names, &self.quote(ctx, v))
    }

    fn err(&self, sp: Span, msg: impl Into<String>) -> Error {
        Error::new(Code::Type, sp, msg)
    }

    pub fn conv_or_err(&self, ctx: &Ctx, expected: &V, actual: &V, sp: Span) -> Result<()> {
        if self.ev.conv(ctx.depth(), expected, actual) {
            return Ok(());
        }
        if let (Val::Univ(i), Val::Univ(j)) = (&**expected, &**actual) {
            return Err(Error::new(
                Code::Univ,
                sp,
                format!("universe mismatch: expected `Type {i}`, found `Type {j}`"),
            ));
        }
        Err(self.err(
            sp,
            format!(
                "type mismatch: expected `{}`, found `{}`",
                self.show(ctx, expected),
                self.show(ctx, actual)
            ),
        ))
    }

    fn instance(&self, decl: &crate::kernel::env::Decl, levels: &[u32], sp: Span) -> Result<Arc<Instance>> {
        if let Some(i) = decl.cached(levels) {
            return Ok(i);
        }
        instance(self.g, decl, levels).map_err(|e| {
            Error::new(
                Code::Univ,
                sp,
                format!("`{}` is ill-typed at universe levels {levels:?}: {}", decl.name, e.message),
            )
        })
    }

    pub fn check_type(&mut self, ctx: &Ctx, t: &Term, sp: Span) -> Result<(Term, u32)> {
        let sp = span_of(t, sp);
        let (t, ty) = self.infer(ctx, t, sp)?;
        match &*ty {
            Val::Univ(l) => Ok((t, *l)),
            _ => Err(self.err(sp, format!("expected a type, found a term of type `{}`", self.show(ctx, &ty)))),
        }
    }

    fn level_of(&mut self, ctx: &Ctx, ty: &V, sp: Span) -> Result<u32> {
        let t = self.quote(ctx, ty);
        Ok(self.check_type(ctx, &t, sp)?.1)
    }

    // ---- inference ----

    pub fn infer(&mut self, ctx: &Ctx, t: &Term, sp: Span) -> Result<(Term, V)> {
        match t {
            Term::Loc(s, a) => self.infer(ctx, a, *s),
            Term::Var(i) => {
                if *i >= ctx.depth() {
                    return Err(self.err(sp, "internal scoping error"));
                }
                Ok((Term::Var(*i), ctx.types[ctx.depth() - 1 - i].clone()))
            }
            Term::Universe(l) => {
                let n = l.lit().ok_or_else(|| Error::new(Code::Univ, sp, "unexpected universe variable"))?;
                Ok((Term::Universe(Level::Lit(n)), Arc::new(Val::Univ(n + 1))))
            }
            Term::Pi(b, a, body) | Term::Sigma(b, a, body) => {
                let (a2, la) = self.check_type(ctx, a, sp)?;
                let av = self.eval(ctx, &a2);
                let (body2, lb) = self.check_type(&ctx.bind(&b.name, av), body, sp)?;
                let (a2, body2) = (Arc::new(a2), Arc::new(body2));
                let out = match t {
                    Term::Pi(..) => Term::Pi(b.clone(), a2, body2),
                    _ => {
                        if b.implicit {
                            return Err(self.err(sp, "a pair type cannot have an implicit component"));
                        }
                        Term::Sigma(b.clone(), a2, body2)
                    }
                };
                Ok((out, Arc::new(Val::Univ(la.max(lb)))))
            }
            Term::Lam(b, Some(a), body) if !b.implicit => {
                let (a2, _) = self.check_type(ctx, a, sp)?;
                let av = self.eval(ctx, &a2);
                let c2 = ctx.bind(&b.name, av);
                let (body2, bty) = self.infer(&c2, body, sp)?;
                let cod = self.quote(&c2, &bty);
                let a2 = Arc::new(a2);
                let pi = Term::Pi(b.clone(), a2.clone(), Arc::new(cod));
                Ok((Term::Lam(b.clone(), Some(a2), Arc::new(body2)), self.eval(ctx, &pi)))
            }
            Term::Lam(..) => Err(self.err(sp, "cannot infer the type of a lambda; add a type annotation")),
            Term::Pair(..) => Err(self.err(sp, "cannot infer the type of a pair; add a type annotation")),
            Term::Inl(_) | Term::Inr(_) => {
                Err(self.err(sp, "cannot infer the type of an injection; add a type annotation"))
            }
            Term::Hole => Err(self.err(sp, "cannot infer a hole in this position")),
            Term::Meta(_) => Err(self.err(sp, "internal error: stray metavariable")),
            Term::App(..) | Term::Const(..) => self.spine(ctx, t, sp, None),
            Term::Fst(p) | Term::Snd(p) => {
                let (p2, pty) = self.infer(ctx, p, sp)?;
                let Val::Sigma(_, a, c) = &*pty else {
                    return Err(self.err(sp, format!("projection from a non-pair of type `{}`", self.show(ctx, &pty))));
                };
                let p2 = Arc::new(p2);
                if let Term::Fst(_) = t {
                    Ok((Term::Fst(p2), a.clone()))
                } else {
                    let first = self.ev.fst(&self.eval(ctx, &p2));
                    Ok((Term::Snd(p2), self.ev.inst(c, first)))
                }
            }
            Term::Id(a, x, y) => {
                let (a2, av, l, x2) = if matches!(a.strip_loc(), Term::Hole) {
                    let (x2, av) = self.infer(ctx, x, sp)?;
                    let l = self.level_of(ctx, &av, sp)?;
                    (self.quote(ctx, &av), av, l, x2)
                } else {
                    let (a2, l) = self.check_type(ctx, a, sp)?;
                    let av = self.eval(ctx, &a2);
                    let x2 = self.check(ctx, x, &av, sp)?;
                    (a2, av, l, x2)
                };
                let y2 = self.check(ctx, y, &av, sp)?;
                Ok((Term::Id(Arc::new(a2), Arc::new(x2), Arc::new(y2)), Arc::new(Val::Univ(l))))
            }
            Term::Refl(a, x) => {
                let (a2, av, x2) = if matches!(a.strip_loc(), Term::Hole) {
                    let (x2, av) = self.infer(ctx, x, sp)?;
                    (self.quote(ctx, &av), av, x2)
                } else {
                    let (a2, _) = self.check_type(ctx, a, sp)?;
                    let av = self.eval(ctx, &a2);
                    let x2 = self.check(ctx, x, &av, sp)?;
                    (a2, av, x2)
                };
                let xv = self.eval(ctx, &x2);
                Ok((Term::Refl(Arc::new(a2), Arc::new(x2)), Arc::new(Val::Id(av, xv.clone(), xv))))
            }
            Term::J { motive, base, endpoint, path } => self.infer_j(ctx, motive, base, endpoint, path, sp),
            Term::HitType(n, ls, args) | Term::HitCtor(_, n, ls, args) => {
                let decl = self.g.decl(n).ok_or_else(|| Error::new(Code::Scope, sp, format!("unknown `{n}`")))?;
                let inst = self.instance(&decl, &lits(ls), sp)?;
                let mut cur = inst.ty_val.clone();
                let mut out = Vec::new();
                for a in args {
                    let Val::Pi(_, dom, cod) = &*cur.clone() else {
                        return Err(self.err(sp, format!("too many arguments to `%{n}`")));
                    };
                    let a2 = self.check(ctx, a, dom, sp)?;
                    cur = self.ev.inst(cod, self.eval(ctx, &a2));
                    out.push(a2);
                }
                let t2 = match t {
                    Term::HitType(..) => Term::HitType(n.clone(), ls.clone(), out),
                    Term::HitCtor(h, ..) => Term::HitCtor(h.clone(), n.clone(), ls.clone(), out),
                    _ => unreachable!(),
                };
                Ok((t2, cur))
            }
            Term::HitElim { hit, motive, methods, scrutinee } => {
                self.infer_hit_elim(ctx, hit, motive, methods, scrutinee, sp)
            }
            Term::Empty | Term::Unit | Term::Nat => Ok((t.clone(), Arc::new(Val::Univ(0)))),
            Term::Star => Ok((Term::Star, Arc::new(Val::Unit))),
            Term::Zero => Ok((Term::Zero, Arc::new(Val::Nat))),
            Term::Succ(n) => {
                let n2 = self.check(ctx, n, &Arc::new(Val::Nat), sp)?;
                Ok((Term::Succ(Arc::new(n2)), Arc::new(Val::Nat)))
            }
            Term::Sum(a, b) => {
                let (a2, la) = self.check_type(ctx, a, sp)?;
                let (b2, lb) = self.check_type(ctx, b, sp)?;
                Ok((Term::Sum(Arc::new(a2), Arc::new(b2)), Arc::new(Val::Univ(la.max(lb)))))
            }
            Term::EmptyElim { motive, scrutinee } => {
                let empty = Arc::new(Val::Empty);
                let s2 = self.check(ctx, scrutinee, &empty, sp)?;
                let (p2, clo) = self.motive1(ctx, motive, empty, sp)?;
                let ty = self.ev.inst(&clo, self.eval(ctx, &s2));
                Ok((Term::EmptyElim { motive: p2, scrutinee: Arc::new(s2) }, ty))
            }
            Term::UnitElim { motive, base, scrutinee } => {
                let unit = Arc::new(Val::Unit);
                let s2 = self.check(ctx, scrutinee, &unit, sp)?;
                let (p2, clo) = self.motive1(ctx, motive, unit, sp)?;
                let b2 = self.check(ctx, base, &self.ev.inst(&clo, Arc::new(Val::Star)), sp)?;
                let ty = self.ev.inst(&clo, self.eval(ctx, &s2));
                Ok((Term::UnitElim { motive: p2, base: Arc::new(b2), scrutinee: Arc::new(s2) }, ty))
            }
            Term::SumElim { motive, left, right, scrutinee } => {
                let (s2, sty) = self.infer(ctx, scrutinee, sp)?;
                let Val::Sum(a, b) = &*sty else {
                    return Err(self.err(sp, format!("`ind-sum` expects a sum, found `{}`", self.show(ctx, &sty))));
                };
                let (p2, clo) = self.motive1(ctx, motive, sty.clone(), sp)?;
                let method = |side: &V, inj: fn(Tm) -> Term| -> Term {
                    Term::Pi(
                        Binder::explicit("a"),
                        Arc::new(self.quote(ctx, side)),
                        Arc::new(replace_top(&p2.body, &inj(Arc::new(Term::Var(0))))),
                    )
                };
                let lty = self.eval(ctx, &method(a, Term::Inl));
                let rty = self.eval(ctx, &method(b, Term::Inr));
                let l2 = self.check(ctx, left, &lty, sp)?;
                let r2 = self.check(ctx, right, &rty, sp)?;
                let ty = self.ev.inst(&clo, self.eval(ctx, &s2));
                Ok((
                    Term::SumElim { motive: p2, left: Arc::new(l2), right: Arc::new(r2), scrutinee: Arc::new(s2) },
                    ty,
                ))
            }
            Term::NatElim { motive, zero, succ, scrutinee } => {
                let nat = Arc::new(Val::Nat);
                let s2 = self.check(ctx, scrutinee, &nat, sp)?;
                let (p2, clo) = self.motive1(ctx, motive, nat, sp)?;
                let z2 = self.check(ctx, zero, &self.ev.inst(&clo, Arc::new(Val::Zero)), sp)?;
                let step = Term::Pi(
                    Binder::explicit("k"),
                    Arc::new(Term::Nat),
                    Arc::new(Term::Pi(
                        Binder::explicit("ih"),
                        p2.body.clone(),
                        Arc::new(crate::syntax::shift(
                            &replace_top(&p2.body, &Term::Succ(Arc::new(Term::Var(0)))),
                            0,
                            1,
                        )),
                    )),
                );
                let sc2 = self.check(ctx, succ, &self.eval(ctx, &step), sp)?;
                let ty = self.ev.inst(&clo, self.eval(ctx, &s2));
                Ok((
                    Term::NatElim { motive: p2, zero: Arc::new(z2), succ: Arc::new(sc2), scrutinee: Arc::new(s2) },
                    ty,
                ))
            }
            Term::Ann(a, ty) => {
                let (ty2, _) = self.check_type(ctx, ty, sp)?;
                let tv = self.eval(ctx, &ty2);
                let a2 = self.check(ctx, a, &tv, sp)?;
                Ok((a2, tv))
            }
        }
    }

    fn motive1(&mut self, ctx: &Ctx, m: &Motive, dom: V, sp: Span) -> Result<(Motive, Clo)> {
        let (body, _) = self.check_type(&ctx.bind(&m.names[0], dom), &m.body, sp)?;
        let body = Arc::new(body);
        let clo = Clo::new(&ctx.env, &body);
        Ok((Motive { names: m.names.clone(), body }, clo))
    }

    fn infer_j(&mut self, ctx: &Ctx, m: &Motive, base: &Tm, endpoint: &Tm, path: &Tm, sp: Span) -> Result<(Term, V)> {
        let (path2, pty) = self.infer(ctx, path, sp)?;
        let Val::Id(a, x, y) = &*pty else {
            return Err(self.err(
                span_of(path, sp),
                format!("`J` expects a path, found a term of type `{}`", self.show(ctx, &pty)),
            ));
        };
        let (e2, ev) = if matches!(endpoint.strip_loc(), Term::Hole) {
            (self.quote(ctx, y), y.clone())
        } else {
            let e2 = self.check(ctx, endpoint, a, sp)?;
            let ev = self.eval(ctx, &e2);
            if !self.ev.conv(ctx.depth(), &ev, y) {
                return Err(self.err(
                    span_of(endpoint, sp),
                    format!(
                        "`J` endpoint `{}` does not match the path's endpoint `{}`",
                        self.show(ctx, &ev),
                        self.show(ctx, y)
                    ),
                ));
            }
            (e2, ev)
        };
        let c2 = ctx.bind(&m.names[0], a.clone());
        let pid = Arc::new(Val::Id(a.clone(), x.clone(), Val::var(ctx.depth())));
        let c3 = c2.bind(&m.names[1], pid);
        let (p2, _) = self.check_type(&c3, &m.body, sp)?;
        let p2 = Arc::new(p2);
        let clo = Clo::new(&ctx.env, &p2);
        let refl = Arc::new(Val::Refl(a.clone(), x.clone()));
        let bty = self.ev.inst2(&clo, x.clone(), refl);
        let b2 = self.check(ctx, base, &bty, sp)?;
        let ty = self.ev.inst2(&clo, ev, self.eval(ctx, &path2));
        Ok((
            Term::J {
                motive: Motive { names: m.names.clone(), body: p2 },
                base: Arc::new(b2),
                endpoint: Arc::new(e2),
                path: Arc::new(path2),
            },
            ty,
        ))
    }

    fn infer_hit_elim(
        &mut self,
        ctx: &Ctx,
        hit: &Name,
        m: &Motive,
        methods: &[Term],
        scrutinee: &Tm,
        sp: Span,
    ) -> Result<(Term, V)> {
        let (s2, sty) = self.infer(ctx, scrutinee, sp)?;
        let (levels, params) = match &*sty {
            Val::HitType(h, ls, ps) if h == hit => (ls.clone(), ps.clone()),
            _ => {
                return Err(self.err(
                    span_of(scrutinee, sp),
                    format!("`elim {hit}` expects an element of `{hit}`, found `{}`", self.show(ctx, &sty)),
                ))
            }
        };
        let sig = self.g.hit_sig(hit).expect("registered HIT");
        if methods.len() != sig.nmethods() {
            return Err(self.err(sp, format!("`elim {hit}` expects {} method(s)", sig.nmethods())));
        }
        let (p2, v) = self.check_type(&ctx.bind(&m.names[0], sty.clone()), &m.body, sp)?;
        let p2 = Arc::new(p2);
        let ind = self.g.decl(&sig.ind).expect("generated induction principle");
        let mut ls = levels;
        ls.push(v);
        let inst = self.instance(&ind, &ls, sp)?;
        let mut cur = inst.ty_val.clone();
        let step = |cur: &mut V, arg: V| {
            let Val::Pi(_, _, cod) = &*cur.clone() else { unreachable!("eliminator type is a telescope") };
            *cur = self.ev.inst(cod, arg);
        };
        for p in params {
            step(&mut cur, p);
        }
        let motive_val = Arc::new(Val::Lam(Binder::explicit(&m.names[0]), Clo::new(&ctx.env, &p2)));
        step(&mut cur, motive_val);
        let mut ms = Vec::new();
        for meth in methods {
            let Val::Pi(_, dom, cod) = &*cur.clone() else { unreachable!() };
            let m2 = self.check(ctx, meth, dom, sp)?;
            cur = self.ev.inst(cod, self.eval(ctx, &m2));
            ms.push(m2);
        }
        let Val::Pi(_, _, cod) = &*cur.clone() else { unreachable!() };
        let ty = self.ev.inst(cod, self.eval(ctx, &s2));
        Ok((
            Term::HitElim {
                hit: hit.clone(),
                motive: Motive { names: m.names.clone(), body: p2 },
                methods: ms,
                scrutinee: Arc::new(s2),
            },
            ty,
        ))
    }

    // ---- checking ----

    pub fn check(&mut self, ctx: &Ctx, t: &Term, ty: &V, sp: Span) -> Result<Term> {
        if let Term::Loc(s, a) = t {
            return self.check(ctx, a, ty, *s);
        }
        if let Val::Pi(b, dom, cod) = &**ty {
            let is_implicit_lam = matches!(t, Term::Lam(lb, _, _) if lb.implicit);
            if b.implicit && !is_implicit_lam && !matches!(t, Term::Hole) {
                let c2 = ctx.bind(&b.name, dom.clone());
                let body = self.check(
                    &c2,
                    &crate::syntax::shift(t, 0, 1),
                    &self.ev.inst(cod, Val::var(ctx.depth())),
                    sp,
                )?;
                return Ok(Term::Lam(b.clone(), None, Arc::new(body)));
            }
        }
        match t {
            Term::Lam(b, ann, body) => {
                let Val::Pi(pb, dom, cod) = &**ty else {
                    return Err(self.err(sp, format!("a lambda cannot have type `{}`", self.show(ctx, ty))));
                };
                if pb.implicit != b.implicit {
                    return Err(self.err(
                        sp,
                        format!("lambda implicitness does not match the expected type `{}`", self.show(ctx, ty)),
                    ));
                }
                let ann2 = match ann {
                    Some(a) => {
                        let (a2, _) = self.check_type(ctx, a, sp)?;
                        let av = self.eval(ctx, &a2);
                        self.conv_or_err(ctx, dom, &av, span_of(a, sp))?;
                        Some(Arc::new(a2))
                    }
                    None => None,
                };
                let c2 = ctx.bind(&b.name, dom.clone());
                let body2 = self.check(&c2, body, &self.ev.inst(cod, Val::var(ctx.depth())), sp)?;
                Ok(Term::Lam(b.clone(), ann2, Arc::new(body2)))
            }
            Term::Pair(a, b) => {
                let Val::Sigma(_, dom, cod) = &**ty else {
                    return Err(self.err(sp, format!("a pair cannot have type `{}`", self.show(ctx, ty))));
                };
                let a2 = self.check(ctx, a, dom, sp)?;
                let b2 = self.check(ctx, b, &self.ev.inst(cod, self.eval(ctx, &a2)), sp)?;
                Ok(Term::Pair(Arc::new(a2), Arc::new(b2)))
            }
            Term::Inl(a) | Term::Inr(a) => {
                let Val::Sum(l, r) = &**ty else {
                    return Err(self.err(sp, format!("an injection cannot have type `{}`", self.show(ctx, ty))));
                };
                if let Term::Inl(_) = t {
                    Ok(Term::Inl(Arc::new(self.check(ctx, a, l, sp)?)))
                } else {
                    Ok(Term::Inr(Arc::new(self.check(ctx, a, r, sp)?)))
                }
            }
            Term::Refl(a, x) if matches!(a.strip_loc(), Term::Hole) => {
                let Val::Id(aty, l, r) = &**ty else {
                    return Err(self.err(sp, format!("`refl` cannot have type `{}`", self.show(ctx, ty))));
                };
                let x2 = self.check(ctx, x, aty, sp)?;
                let xv = self.eval(ctx, &x2);
                let d = ctx.depth();
                if !self.ev.conv(d, &xv, l) || !self.ev.conv(d, &xv, r) {
                    let actual = Arc::new(Val::Id(aty.clone(), xv.clone(), xv));
                    return Err(self.err(
                        sp,
                        format!(
                            "type mismatch: expected `{}`, found `{}`",
                            self.show(ctx, ty),
                            self.show(ctx, &actual)
                        ),
                    ));
                }
                Ok(Term::Refl(Arc::new(self.quote(ctx, aty)), Arc::new(x2)))
            }
            Term::Hole => Err(self.err(sp, format!("cannot solve hole of type `{}`", self.show(ctx, ty)))),
            Term::App(..) | Term::Const(..) => {
                let (t2, ity) = self.spine(ctx, t, sp, Some(ty))?;
                self.conv_or_err(ctx, ty, &ity, sp)?;
                Ok(t2)
            }
            _ => {
                let (t2, ity) = self.infer(ctx, t, sp)?;
                self.conv_or_err(ctx, ty, &ity, sp)?;
                Ok(t2)
            }
        }
    }

    // ---- application spines ----

    fn head_type(&mut self, ctx: &Ctx, h: &Term, sp: Span) -> Result<(Term, V)> {
        match h {
            Term::Const(n, ls) => {
                let decl = self
                    .g
                    .decl(n)
                    .ok_or_else(|| Error::new(Code::Scope, sp, format!("unknown identifier `{n}`")))?;
                if ls.iter().any(|l| l.lit().is_none()) {
                    return Err(Error::new(Code::Univ, sp, "unexpected universe variable"));
                }
                let inst = self.instance(&decl, &lits(ls), sp)?;
                Ok((Term::Const(n.clone(), ls.clone()), inst.ty_val.clone()))
            }
            _ => self.infer(ctx, h, sp),
        }
    }

    fn fresh_meta(&mut self) -> usize {
        self.next_meta += 1;
        self.next_meta - 1
    }

    fn spine(&mut self, ctx: &Ctx, t: &Term, sp: Span, expected: Option<&V>) -> Result<(Term, V)> {
        let mut args: Vec<(&Term, bool, Span)> = Vec::new();
        let mut h = t;
        let mut hsp = sp;
        loop {
            match h {
                Term::Loc(s, a) => {
                    hsp = *s;
                    h = a;
                }
                Term::App(f, a, imp) => {
                    args.push((a, *imp, span_of(a, hsp)));
                    h = f;
                }
                _ => break,
            }
        }
        args.reverse();
        let (head, head_ty) = self.head_type(ctx, h, hsp)?;
        let head_name = match h {
            Term::Const(n, _) => format!("`{n}`"),
            _ => "the function".to_string(),
        };

        // Phase 1: walk the telescope, collecting metavariables and solving
        // them by matching argument types and the expected type.
        let lenient = Ev { lenient: true, ..self.ev };
        let mut sols: HashMap<usize, Term> = HashMap::new();
        let mut items: Vec<Item> = Vec::new();
        let mut deferred_doms: Vec<(&Term, Span, Term)> = Vec::new();
        let mut cur = head_ty.clone();
        let mut i = 0;
        loop {
            let Val::Pi(b, dom, cod) = &*cur.clone() else {
                if i < args.len() {
                    return Err(self.err(
                        args[i].2,
                        format!("{head_name} is applied to too many arguments; its type is `{}`", self.show(ctx, &cur)),
                    ));
                }
                break;
            };
            let next = args.get(i).copied();
            let v = if b.implicit && !matches!(next, Some((_, true, _))) {
                let k = self.fresh_meta();
                items.push(Item::Meta { k, implicit: true });
                Val::meta(k)
            } else {
                let Some((a, imp, asp)) = next else { break };
                if imp && !b.implicit {
                    return Err(self.err(asp, format!("unexpected implicit argument to {head_name}")));
                }
                i += 1;
                if matches!(a.strip_loc(), Term::Hole) {
                    let k = self.fresh_meta();
                    items.push(Item::Meta { k, implicit: imp });
                    Val::meta(k)
                } else if inferable(a) {
                    match self.infer(ctx, a, asp) {
                        Ok((a2, aty)) => {
                            let pat = lenient.quote(ctx.depth(), dom);
                            let tgt = self.quote(ctx, &aty);
                            match_terms(0, &pat, &tgt, &mut sols);
                            let v = lenient.eval(&ctx.env, &a2);
                            items.push(Item::Pre { term: a2, ty: aty, implicit: imp, span: asp });
                            v
                        }
                        Err(_) => {
                            items.push(Item::Deferred { raw: a, implicit: imp, span: asp });
                            deferred_doms.push((a, asp, lenient.quote(ctx.depth(), dom)));
                            Val::meta(JUNK)
                        }
                    }
                } else {
                    items.push(Item::Deferred { raw: a, implicit: imp, span: asp });
                    deferred_doms.push((a, asp, lenient.quote(ctx.depth(), dom)));
                    Val::meta(JUNK)
                }
            };
            cur = lenient.inst(cod, v);
        }
        if let Some(exp) = expected {
            let pat = lenient.quote(ctx.depth(), &cur);
            let tgt = self.quote(ctx, exp);
            match_terms(0, &pat, &tgt, &mut sols);
        }
        // An unannotated lambda whose domain is now known can have its type
        // inferred, which may solve metavariables in the codomain.
        for (raw, asp, dom) in deferred_doms {
            let Term::Lam(b, None, body) = raw.strip_loc() else { continue };
            let Term::Pi(_, a, _) = subst_metas(&dom, &sols) else { continue };
            if b.implicit || contains_meta(&a) {
                continue;
            }
            let annotated = Term::Lam(b.clone(), Some(a), body.clone());
            if let Ok((_, ty)) = self.infer(ctx, &annotated, asp) {
                let tgt = self.quote(ctx, &ty);
                match_terms(0, &dom, &tgt, &mut sols);
            }
        }

        // Phase 2: replay with solved arguments, checking every argument
        // against its actual domain.
        let mut cur = head_ty;
        let mut term = head;
        for item in items {
            let Val::Pi(b, dom, cod) = &*cur.clone() else {
                return Err(self.err(sp, "internal error: telescope changed shape"));
            };
            let (arg, implicit) = match item {
                Item::Meta { k, implicit } => {
                    let sol = match sols.get(&k) {
                        Some(s) if !contains_meta(s) => s.clone(),
                        _ => {
                            return Err(self.err(
                                sp,
                                format!(
                                    "cannot infer implicit argument `{}` of {head_name}; supply it with braces",
                                    b.name
                                ),
                            ))
                        }
                    };
                    (self.check(ctx, &sol, dom, sp)?, implicit)
                }
                Item::Pre { term, ty, implicit, span } => {
                    self.conv_or_err(ctx, dom, &ty, span)?;
                    (term, implicit)
                }
                Item::Deferred { raw, implicit, span } => (self.check(ctx, raw, dom, span)?, implicit),
            };
            cur = self.ev.inst(cod, self.eval(ctx, &arg));
            term = Term::App(Arc::new(term), Arc::new(arg), implicit);
        }
        Ok((term, cur))
    }
}

/// First-order matching of `p` (containing metavariables) against `t`,
/// under `k` binders introduced during the match. Failure is silent.
pub fn match_terms(k: usize, p: &Term, t: &Term, sols: &mut HashMap<usize, Term>) {
    if let Term::Meta(m) = p {
        if *m != JUNK && !sols.contains_key(m) {
            if let Ok(s) = try_shift(t, 0, -(k as isize)) {
                sols.insert(*m, s);
            }
        }
        return;
    }
    if let Some((m, vars)) = pattern_spine(p) {
        if let std::collections::hash_map::Entry::Vacant(e) = sols.entry(m) {
            if let Some(s) = miller_solution(k, &vars, t) {
                e.insert(s);
            }
        }
        return;
    }
    let go = |a: &Term, b: &Term, extra: usize, sols: &mut HashMap<usize, Term>| match_terms(k + extra, a, b, sols);
    match (p, t) {
        (Term::Pi(_, a1, b1), Term::Pi(_, a2, b2))
        | (Term::Sigma(_, a1, b1), Term::Sigma(_, a2, b2)) => {
            go(a1, a2, 0, sols);
            go(b1, b2, 1, sols);
        }
        (Term::Lam(_, _, b1), Term::Lam(_, _, b2)) => go(b1, b2, 1, sols),
        (Term::App(f1, a1, _), Term::App(f2, a2, _)) => {
            go(f1, f2, 0, sols);
            go(a1, a2, 0, sols);
        }
        (Term::Pair(a1, b1), Term::Pair(a2, b2)) | (Term::Sum(a1, b1), Term::Sum(a2, b2)) => {
            go(a1, a2, 0, sols);
            go(b1, b2, 0, sols);
        }
        (Term::Fst(a), Term::Fst(b))
        | (Term::Snd(a), Term::Snd(b))
        | (Term::Inl(a), Term::Inl(b))
        | (Term::Inr(a), Term::Inr(b))
        | (Term::Succ(a), Term::Succ(b)) => go(a, b, 0, sols),
        (Term::Id(a1, x1, y1), Term::Id(a2, x2, y2)) => {
            go(a1, a2, 0, sols);
            go(x1, x2, 0, sols);
            go(y1, y2, 0, sols);
        }
        (Term::Refl(a1, x1), Term::Refl(a2, x2)) => {
            go(a1, a2, 0, sols);
            go(x1, x2, 0, sols);
        }
        (
            Term::J { motive: m1, base: b1, endpoint: e1, path: p1 },
            Term::J { motive: m2, base: b2, endpoint: e2, path: p2 },
        ) => {
            go(&m1.body, &m2.body, 2, sols);
            go(b1, b2, 0, sols);
            go(e1, e2, 0, sols);
            go(p1, p2, 0, sols);
        }
        (Term::HitType(n1, _, a1), Term::HitType(n2, _, a2)) if n1 == n2 => {
            for (x, y) in a1.iter().zip(a2) {
                go(x, y, 0, sols);
            }
        }
        (Term::HitCtor(_, c1, _, a1), Term::HitCtor(_, c2, _, a2)) if c1 == c2 => {
            for (x, y) in a1.iter().zip(a2) {
                go(x, y, 0, sols);
            }
        }
        (
            Term::HitElim { motive: m1, methods: ms1, scrutinee: s1, .. },
            Term::HitElim { motive: m2, methods: ms2, scrutinee: s2, .. },
        ) => {
            go(&m1.body, &m2.body, 1, sols);
            for (x, y) in ms1.iter().zip(ms2) {
                go(x, y, 0, sols);
            }
            go(s1, s2, 0, sols);
        }
        (
            Term::NatElim { motive: m1, zero: z1, succ: c1, scrutinee: s1 },
            Term::NatElim { motive: m2, zero: z2, succ: c2, scrutinee: s2 },
        ) => {
            go(&m1.body, &m2.body, 1, sols);
            go(z1, z2, 0, sols);
            go(c1, c2, 0, sols);
            go(s1, s2, 0, sols);
        }
        (
            Term::SumElim { motive: m1, left: l1, right: r1, scrutinee: s1 },
            Term::SumElim { motive: m2, left: l2, right: r2, scrutinee: s2 },
        ) => {
            go(&m1.body, &m2.body, 1, sols);
            go(l1, l2, 0, sols);
            go(r1, r2, 0, sols);
            go(s1, s2, 0, sols);
        }
        (
            Term::UnitElim { motive: m1, base: b1, scrutinee: s1 },
            Term::UnitElim { motive: m2, base: b2, scrutinee: s2 },
        ) => {
            go(&m1.body, &m2.body, 1, sols);
            go(b1, b2, 0, sols);
            go(s1, s2, 0, sols);
        }
        _ => {}
    }
}

/// `?m x1 .. xn` with distinct bound variables.
fn pattern_spine(p: &Term) -> Option<(usize, Vec<usize>)> {
    let mut vars = Vec::new();
    let mut t = p;
    while let Term::App(f, a, _) = t {
        match &**a {
            Term::Var(i) if !vars.contains(i) => vars.push(*i),
            _ => return None,
        }
        t = f;
    }
    match t {
        Term::Meta(m) if *m != JUNK && !vars.is_empty() => {
            vars.reverse();
            Some((*m, vars))
        }
        _ => None,
    }
}

fn miller_solution(k: usize, vars: &[usize], t: &Term) -> Option<Term> {
    let n = vars.len();
    let body = map_vars(t, 0, &mut |d, j| {
        if j < d {
            return Ok(Term::Var(j));
        }
        let jj = j - d;
        if let Some(pos) = vars.iter().position(|v| *v == jj) {
            Ok(Term::Var(d + (n - 1 - pos)))
        } else if jj < k {
            Err(())
        } else {
            Ok(Term::Var(d + n + (jj - k)))
        }
    })
    .ok()?;
    let mut acc = body;
    for _ in 0..n {
        acc = Term::lam(Binder::explicit("x"), acc);
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Term {
        Term::Var(i)
    }

    #[test]
    fn first_order_matching() {
        let mut sols = HashMap::new();
        let p = Term::Id(Arc::new(Term::Meta(0)), Arc::new(Term::Meta(1)), Arc::new(v(0)));
        let t = Term::Id(Arc::new(Term::Nat), Arc::new(Term::Zero), Arc::new(v(0)));
        match_terms(0, &p, &t, &mut sols);
        assert_eq!(sols[&0], Term::Nat);
        assert_eq!(sols[&1], Term::Zero);
    }

    #[test]
    fn matching_under_binders_lowers_indices() {
        let mut sols = HashMap::new();
        let p = Term::pi(Binder::explicit("x"), Term::Nat, Term::Meta(0));
        let t = Term::pi(Binder::explicit("x"), Term::Nat, v(3));
        match_terms(0, &p, &t, &mut sols);
        assert_eq!(sols[&0], v(2));
        // A solution mentioning the bound variable is rejected.
        let mut sols = HashMap::new();
        let t = Term::pi(Binder::explicit("x"), Term::Nat, v(0));
        match_terms(0, &p, &t, &mut sols);
        assert!(sols.is_empty());
    }

    #[test]
    fn pattern_unification() {
        // (x : A) -> ?B x  against  (x : A) -> Id Nat x x
        let mut sols = HashMap::new();
        let p = Term::pi(Binder::explicit("x"), Term::Nat, Term::app(Term::Meta(0), v(0)));
        let body = Term::Id(Arc::new(Term::Nat), Arc::new(v(0)), Arc::new(v(1)));
        let t = Term::pi(Binder::explicit("x"), Term::Nat, body);
        match_terms(0, &p, &t, &mut sols);
        let expected = Term::lam(
            Binder::explicit("x"),
            Term::Id(Arc::new(Term::Nat), Arc::new(v(0)), Arc::new(v(1))),
        );
        assert_eq!(sols[&0], expected);
    }

    #[test]
    fn replace_top_keeps_binder() {
        let t = Term::app(v(0), v(1));
        assert_eq!(replace_top(&t, &Term::Succ(Arc::new(v(0)))), Term::app(Term::Succ(Arc::new(v(0))), v(1)));
    }
}
