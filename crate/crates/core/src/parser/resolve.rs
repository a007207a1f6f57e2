//! Name resolution: surface syntax to core terms.

use std::collections::HashMap;
use std::sync::Arc;

use super::surface::*;
use crate::diag::{Code, Error, Result, Span};
use crate::syntax::{name, shift, Binder, Level, Motive, Name, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlobalKind {
    Def,
    Axiom,
    HitType,
    PointCtor,
    PathCtor,
}

#[derive(Clone, Debug)]
pub struct GlobalInfo {
    pub nlevels: usize,
    pub kind: GlobalKind,
    /// Owning HIT for type formers and constructors.
    pub hit: Option<Name>,
}

#[derive(Clone, Debug)]
pub struct HitInfo {
    pub nparams: usize,
    /// Constructor name, number of own arguments, and whether it is a path.
    pub ctors: Vec<(Name, usize, bool)>,
}

impl HitInfo {
    pub fn nmethods(&self) -> usize {
        self.ctors.len()
    }
}

/// What the resolver needs to know about already checked declarations.
pub trait Scope {
    fn global(&self, n: &str) -> Option<GlobalInfo>;
    fn hit(&self, n: &str) -> Option<HitInfo>;
}

/// Names with built-in meaning. They cannot be declared at top level.
pub const BUILTINS: &[&str] = &[
    "refl", "fst", "snd", "succ", "inl", "inr", "zero", "tt", "Empty", "Unit", "Nat", "Id", "J",
    "ind-empty", "ind-unit", "ind-sum", "ind-nat", "elim",
];

pub fn is_builtin(s: &str) -> bool {
    BUILTINS.contains(&s)
}

/// Number of motive binders and explicit arguments of each builtin head.
fn builtin_shape(s: &str) -> (Option<usize>, usize) {
    match s {
        "refl" | "fst" | "snd" | "succ" | "inl" | "inr" => (None, 1),
        "zero" | "tt" | "Empty" | "Unit" | "Nat" => (None, 0),
        "Id" => (None, 3),
        "J" => (Some(2), 3),
        "ind-empty" => (Some(1), 1),
        "ind-unit" => (Some(1), 2),
        "ind-sum" => (Some(1), 3),
        "ind-nat" => (Some(1), 3),
        _ => unreachable!("not a builtin: {s}"),
    }
}

#[derive(Clone, Debug)]
pub struct ResolvedDecl {
    pub name: Name,
    pub name_span: Span,
    pub span: Span,
    pub univars: Vec<Name>,
    pub ty: Term,
    pub body: Option<Term>,
}

pub struct Resolver<'a> {
    scope: &'a dyn Scope,
    univars: Vec<String>,
    locals: Vec<String>,
    /// Names standing for a fixed term, recorded with the depth at which the
    /// term is well scoped.
    aliases: HashMap<String, (Term, usize)>,
}

fn loc(span: Span, t: Term) -> Term {
    Term::Loc(span, Arc::new(t))
}

impl<'a> Resolver<'a> {
    pub fn new(scope: &'a dyn Scope, univars: Vec<String>) -> Resolver<'a> {
        Resolver { scope, univars, locals: Vec::new(), aliases: HashMap::new() }
    }

    pub fn depth(&self) -> usize {
        self.locals.len()
    }

    pub fn push(&mut self, n: &str) {
        self.locals.push(n.to_string());
    }

    pub fn pop(&mut self) {
        self.locals.pop();
    }

    pub fn add_alias(&mut self, n: &str, t: Term) {
        self.aliases.insert(n.to_string(), (t, self.depth()));
    }

    pub fn level(&self, l: &SLevel, span: Span) -> Result<Level> {
        match l {
            SLevel::Num(n) => Ok(Level::Lit(*n)),
            SLevel::Name(s) => match self.univars.iter().position(|u| u == s) {
                Some(i) => Ok(Level::Var(i as u32)),
                None => Err(Error::new(Code::Scope, span, format!("unknown universe variable `{s}`"))),
            },
        }
    }

    fn levels_for(&self, n: &str, info: &GlobalInfo, given: &Option<Vec<SLevel>>, span: Span) -> Result<Vec<Level>> {
        match given {
            None if info.nlevels == 0 => Ok(Vec::new()),
            None => Err(Error::new(
                Code::Univ,
                span,
                format!("`{n}` takes {} universe argument(s), none given", info.nlevels),
            )),
            Some(ls) => {
                if ls.len() != info.nlevels {
                    return Err(Error::new(
                        Code::Univ,
                        span,
                        format!(
                            "`{n}` takes {} universe argument(s), {} given",
                            info.nlevels,
                            ls.len()
                        ),
                    ));
                }
                ls.iter().map(|l| self.level(l, span)).collect()
            }
        }
    }

    pub fn term(&mut self, t: &STerm) -> Result<Term> {
        let span = t.span;
        let out = match &t.kind {
            SKind::Ident { .. } | SKind::App(..) | SKind::At(_) => return self.spine(t),
            SKind::Universe(l) => Term::Universe(self.level(l, span)?),
            SKind::Hole => Term::Hole,
            SKind::Pi(groups, body) => return self.telescope(groups, body, false),
            SKind::Sigma(groups, body) => return self.telescope(groups, body, true),
            SKind::Arrow(a, b) | SKind::Prod(a, b) => {
                let a = self.term(a)?;
                self.push("_");
                let b = self.term(b);
                self.pop();
                let binder = Binder::explicit("_");
                if let SKind::Arrow(..) = t.kind {
                    Term::Pi(binder, Arc::new(a), Arc::new(b?))
                } else {
                    Term::Sigma(binder, Arc::new(a), Arc::new(b?))
                }
            }
            SKind::Sum(a, b) => Term::Sum(Arc::new(self.term(a)?), Arc::new(self.term(b)?)),
            SKind::Eq(a, b) => {
                Term::Id(Arc::new(Term::Hole), Arc::new(self.term(a)?), Arc::new(self.term(b)?))
            }
            SKind::Lam(binders, body) => {
                let mut anns = Vec::new();
                for b in binders {
                    let ann = match &b.ty {
                        Some(ty) => Some(self.term(ty)?),
                        None => None,
                    };
                    anns.push(ann);
                    self.push(&b.name.text);
                }
                let body = self.term(body);
                for _ in binders {
                    self.pop();
                }
                let mut acc = body?;
                for (b, ann) in binders.iter().zip(anns).rev() {
                    acc = loc(
                        b.name.span,
                        Term::Lam(
                            Binder { name: name(&b.name.text), implicit: b.implicit },
                            ann.map(Arc::new),
                            Arc::new(acc),
                        ),
                    );
                }
                return Ok(loc(span, acc));
            }
            SKind::Pair(a, b) => Term::Pair(Arc::new(self.term(a)?), Arc::new(self.term(b)?)),
            SKind::Ann(a, b) => Term::Ann(Arc::new(self.term(a)?), Arc::new(self.term(b)?)),
            SKind::Motive(..) => {
                return Err(Error::new(Code::Parse, span, "motive `[x. P]` is only allowed as an eliminator argument"))
            }
        };
        Ok(loc(span, out))
    }

    /// Resolves `(x : A) (y : B) -> C`, resolving each group type once and
    /// shifting it for the later names of the same group.
    fn telescope(&mut self, groups: &[Group], body: &STerm, sigma: bool) -> Result<Term> {
        let mut entries: Vec<(Binder, Term, Span)> = Vec::new();
        let mut pushed = 0;
        let mut result = Ok(());
        for g in groups {
            let ty = match self.term(&g.ty) {
                Ok(t) => t,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            };
            for (k, n) in g.names.iter().enumerate() {
                entries.push((
                    Binder { name: name(&n.text), implicit: g.implicit },
                    shift(&ty, 0, k as isize),
                    n.span,
                ));
                self.push(&n.text);
                pushed += 1;
            }
        }
        let body = match result {
            Ok(()) => self.term(body),
            Err(e) => Err(e),
        };
        for _ in 0..pushed {
            self.pop();
        }
        let mut acc = body?;
        for (b, ty, sp) in entries.into_iter().rev() {
            acc = loc(
                sp,
                if sigma {
                    Term::Sigma(b, Arc::new(ty), Arc::new(acc))
                } else {
                    Term::Pi(b, Arc::new(ty), Arc::new(acc))
                },
            );
        }
        Ok(acc)
    }

    fn motive(&mut self, t: &STerm, arity: usize) -> Result<Motive> {
        match &t.kind {
            SKind::Motive(names, body) => {
                if names.len() != arity {
                    return Err(Error::new(
                        Code::Parse,
                        t.span,
                        format!("motive must bind {arity} variable(s), found {}", names.len()),
                    ));
                }
                for n in names {
                    self.push(&n.text);
                }
                let b = self.term(body);
                for _ in names {
                    self.pop();
                }
                Ok(Motive::new(names.iter().map(|n| name(&n.text)).collect(), b?))
            }
            _ => Err(Error::new(Code::Parse, t.span, "expected a motive `[x. P]`")),
        }
    }

    fn spine(&mut self, t: &STerm) -> Result<Term> {
        let (mut head, args) = t.spine();
        while let SKind::At(inner) = &head.kind {
            head = inner;
        }
        let (core, used) = match &head.kind {
            SKind::Ident { name: n, levels, raw } => {
                if *raw {
                    self.raw(n, levels, head.span, &args)?
                } else if let Some(i) = self.locals.iter().rposition(|l| l == n) {
                    if levels.is_some() {
                        return Err(Error::new(Code::Univ, head.span, format!("local `{n}` takes no universe arguments")));
                    }
                    (loc(head.span, Term::Var(self.depth() - 1 - i)), 0)
                } else if let Some((a, d)) = self.aliases.get(n) {
                    (loc(head.span, shift(a, 0, (self.depth() - d) as isize)), 0)
                } else if is_builtin(n) {
                    if levels.is_some() {
                        return Err(Error::new(Code::Univ, head.span, format!("`{n}` takes no universe arguments")));
                    }
                    self.builtin(n, t.span, head.span, &args)?
                } else if let Some(info) = self.scope.global(n) {
                    let ls = self.levels_for(n, &info, levels, head.span)?;
                    (loc(head.span, Term::Const(name(n), ls)), 0)
                } else {
                    return Err(Error::new(Code::Scope, head.span, format!("unknown identifier `{n}`")));
                }
            }
            _ => (self.term(head)?, 0),
        };
        let mut acc = core;
        for (a, imp) in &args[used..] {
            let span = acc_span(&acc).join(a.span);
            let a = self.term(a)?;
            acc = loc(span, Term::App(Arc::new(acc), Arc::new(a), *imp));
        }
        Ok(acc)
    }

    fn raw(
        &mut self,
        n: &str,
        levels: &Option<Vec<SLevel>>,
        span: Span,
        args: &[(&STerm, bool)],
    ) -> Result<(Term, usize)> {
        let info = self
            .scope
            .global(n)
            .ok_or_else(|| Error::new(Code::Scope, span, format!("unknown identifier `{n}`")))?;
        let hit_name = match (&info.kind, &info.hit) {
            (GlobalKind::HitType | GlobalKind::PointCtor | GlobalKind::PathCtor, Some(h)) => h.clone(),
            _ => return Err(Error::new(Code::Scope, span, format!("`%{n}` does not name a HIT or constructor"))),
        };
        let hit = self.scope.hit(&hit_name).expect("registered HIT");
        let want = match info.kind {
            GlobalKind::HitType => hit.nparams,
            _ => {
                let (_, k, _) = hit.ctors.iter().find(|c| &*c.0 == n).expect("constructor");
                hit.nparams + k
            }
        };
        if args.len() < want || args[..want].iter().any(|(_, imp)| *imp) {
            return Err(Error::new(
                Code::Type,
                span,
                format!("raw form `%{n}` needs exactly {want} explicit argument(s)"),
            ));
        }
        let ls = self.levels_for(n, &info, levels, span)?;
        let mut out = Vec::new();
        for (a, _) in &args[..want] {
            out.push(self.term(a)?);
        }
        let t = match info.kind {
            GlobalKind::HitType => Term::HitType(hit_name, ls, out),
            _ => Term::HitCtor(hit_name, name(n), ls, out),
        };
        Ok((loc(span, t), want))
    }

    fn builtin(&mut self, n: &str, whole: Span, span: Span, args: &[(&STerm, bool)]) -> Result<(Term, usize)> {
        let mut i = 0;
        let mut refl_ty = None;
        let mut hit: Option<(Name, HitInfo)> = None;
        let (motive_arity, nexplicit) = if n == "elim" {
            let (h, _) = args.first().ok_or_else(|| Error::new(Code::Parse, span, "`elim` expects a HIT name"))?;
            let hname = match &h.kind {
                SKind::Ident { name: hn, raw: false, levels: None } => hn.clone(),
                _ => return Err(Error::new(Code::Parse, h.span, "`elim` expects a HIT name")),
            };
            let info = self
                .scope
                .hit(&hname)
                .ok_or_else(|| Error::new(Code::Scope, h.span, format!("`{hname}` is not a HIT")))?;
            i = 1;
            let k = info.nmethods() + 1;
            hit = Some((name(&hname), info));
            (Some(1), k)
        } else {
            builtin_shape(n)
        };
        if n == "refl" {
            if let Some((a, true)) = args.first() {
                refl_ty = Some(self.term(a)?);
                i = 1;
            }
        }
        let motive = match motive_arity {
            Some(k) => {
                let m = args
                    .get(i)
                    .ok_or_else(|| Error::new(Code::Parse, whole, format!("`{n}` expects a motive")))?;
                i += 1;
                Some(self.motive(m.0, k)?)
            }
            None => None,
        };
        let mut given = Vec::new();
        while given.len() < nexplicit && i < args.len() {
            let (a, imp) = args[i];
            if imp {
                return Err(Error::new(Code::Type, a.span, format!("`{n}` takes no implicit argument here")));
            }
            given.push(self.term(a)?);
            i += 1;
        }
        // Partial applications are eta-expanded.
        let missing = nexplicit - given.len();
        let shift_by = missing as isize;
        let mut xs: Vec<Term> = given.iter().map(|t| shift(t, 0, shift_by)).collect();
        for k in 0..missing {
            xs.push(Term::Var(missing - 1 - k));
        }
        let motive = motive.map(|m| Motive {
            body: Arc::new(shift(&m.body, m.names.len(), shift_by)),
            names: m.names,
        });
        let refl_ty = refl_ty.map(|t| shift(&t, 0, shift_by));
        let a = |k: usize| Arc::new(xs[k].clone());
        let core = match n {
            "refl" => Term::Refl(Arc::new(refl_ty.unwrap_or(Term::Hole)), a(0)),
            "fst" => Term::Fst(a(0)),
            "snd" => Term::Snd(a(0)),
            "succ" => Term::Succ(a(0)),
            "inl" => Term::Inl(a(0)),
            "inr" => Term::Inr(a(0)),
            "zero" => Term::Zero,
            "tt" => Term::Star,
            "Empty" => Term::Empty,
            "Unit" => Term::Unit,
            "Nat" => Term::Nat,
            "Id" => Term::Id(a(0), a(1), a(2)),
            "J" => Term::J { motive: motive.unwrap(), base: a(0), endpoint: a(1), path: a(2) },
            "ind-empty" => Term::EmptyElim { motive: motive.unwrap(), scrutinee: a(0) },
            "ind-unit" => Term::UnitElim { motive: motive.unwrap(), base: a(0), scrutinee: a(1) },
            "ind-sum" => {
                Term::SumElim { motive: motive.unwrap(), left: a(0), right: a(1), scrutinee: a(2) }
            }
            "ind-nat" => {
                Term::NatElim { motive: motive.unwrap(), zero: a(0), succ: a(1), scrutinee: a(2) }
            }
            "elim" => {
                let (h, _) = hit.unwrap();
                let k = xs.len();
                Term::HitElim {
                    hit: h,
                    motive: motive.unwrap(),
                    methods: xs[..k - 1].to_vec(),
                    scrutinee: a(k - 1),
                }
            }
            _ => unreachable!(),
        };
        let mut t = loc(whole, core);
        for k in 0..missing {
            t = Term::lam(Binder::explicit(&format!("x{}", missing - 1 - k)), t);
        }
        Ok((loc(whole, t), i))
    }

    /// Resolves a `def` or `axiom`. Declaration parameters become Pi binders
    /// in the type and lambdas in the body.
    pub fn decl(&mut self, d: &SDecl) -> Result<ResolvedDecl> {
        let (ty, body) = match &d.kind {
            SDeclKind::Def { ty, body } => (ty, Some(body)),
            SDeclKind::Axiom { ty } => (ty, None),
            SDeclKind::Hit { .. } => unreachable!("HIT declarations are resolved by the hit module"),
        };
        let ty = self.telescope(&d.params, ty, false)?;
        let body = match body {
            Some(b) => {
                let mut pushed = 0;
                let mut binders = Vec::new();
                for g in &d.params {
                    for n in &g.names {
                        self.push(&n.text);
                        pushed += 1;
                        binders.push((Binder { name: name(&n.text), implicit: g.implicit }, n.span));
                    }
                }
                let r = self.term(b);
                for _ in 0..pushed {
                    self.pop();
                }
                let mut acc = r?;
                for (b, sp) in binders.into_iter().rev() {
                    acc = loc(sp, Term::Lam(b, None, Arc::new(acc)));
                }
                Some(acc)
            }
            None => None,
        };
        Ok(ResolvedDecl {
            name: name(&d.name.text),
            name_span: d.name.span,
            span: d.span,
            univars: self.univars.iter().map(|u| name(u)).collect(),
            ty,
            body,
        })
    }
}

fn acc_span(t: &Term) -> Span {
    match t {
        Term::Loc(s, _) => *s,
        _ => Span::default(),
    }
}

/// Checks that a new top-level name is free; also used for HIT constructors.
pub fn check_fresh(scope: &dyn Scope, n: &SName) -> Result<()> {
    if is_builtin(&n.text) {
        return Err(Error::new(Code::Scope, n.span, format!("`{}` is a reserved name", n.text)));
    }
    if scope.global(&n.text).is_some() {
        return Err(Error::new(Code::Scope, n.span, format!("duplicate declaration of `{}`", n.text)));
    }
    Ok(())
}

pub fn check_univars(d: &SDecl) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for u in &d.univars {
        if out.contains(&u.text) {
            return Err(Error::new(Code::Scope, u.span, format!("duplicate universe variable `{}`", u.text)));
        }
        out.push(u.text.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse::parse_term;
    use crate::syntax::{alpha_equal, strip_locs};

    struct Fake;
    impl Scope for Fake {
        fn global(&self, n: &str) -> Option<GlobalInfo> {
            match n {
                "concat" => Some(GlobalInfo { nlevels: 1, kind: GlobalKind::Def, hit: None }),
                "Circle" => Some(GlobalInfo { nlevels: 0, kind: GlobalKind::HitType, hit: Some(name("Circle")) }),
                "loop" => Some(GlobalInfo { nlevels: 0, kind: GlobalKind::PathCtor, hit: Some(name("Circle")) }),
                _ => None,
            }
        }
        fn hit(&self, n: &str) -> Option<HitInfo> {
            (n == "Circle").then(|| HitInfo {
                nparams: 0,
                ctors: vec![(name("base"), 0, false), (name("loop"), 0, true)],
            })
        }
    }

    fn res(src: &str) -> Result<Term> {
        let s = parse_term(0, src).unwrap();
        Resolver::new(&Fake, vec![]).term(&s).map(|t| strip_locs(&t))
    }

    #[test]
    fn lambda_identity() {
        assert!(alpha_equal(&res("\\x. x").unwrap(), &Term::lam(Binder::explicit("x"), Term::Var(0))));
    }

    #[test]
    fn unknown_identifier() {
        let e = res("foo").unwrap_err();
        assert_eq!(e.code, Code::Scope);
        assert_eq!((e.span.start, e.span.end), (0, 3));
    }

    #[test]
    fn golden_concat_loop_loop() {
        let c = |n: &str, ls: Vec<Level>| Term::Const(name(n), ls);
        let expected = Term::app(Term::app(c("concat", vec![Level::Lit(0)]), c("loop", vec![])), c("loop", vec![]));
        assert_eq!(res("concat.{0} loop loop").unwrap(), expected);
    }

    #[test]
    fn omitted_levels_are_a_universe_error() {
        assert_eq!(res("concat loop loop").unwrap_err().code, Code::Univ);
        assert!(res("loop").is_ok());
    }

    #[test]
    fn level_arity_is_a_universe_error() {
        assert_eq!(res("concat.{0 1}").unwrap_err().code, Code::Univ);
    }

    #[test]
    fn partial_builtins_are_eta_expanded() {
        let t = res("succ").unwrap();
        assert_eq!(t, Term::lam(Binder::explicit("x0"), Term::Succ(Arc::new(Term::Var(0)))));
        let t = res("\\y. Id Nat y").unwrap();
        match t {
            Term::Lam(_, _, b) => match &*b {
                Term::Lam(_, _, b) => assert_eq!(
                    **b,
                    Term::Id(Arc::new(Term::Nat), Arc::new(Term::Var(1)), Arc::new(Term::Var(0)))
                ),
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eliminators_and_raw_forms() {
        let t = res("\\p. J [y q. Id Nat zero y] (refl zero) _ p").unwrap();
        assert!(matches!(t, Term::Lam(_, _, ref b) if matches!(**b, Term::J { .. })));
        let t = res("elim Circle [x. Nat] zero (refl zero) %base").unwrap_err();
        assert_eq!(t.code, Code::Scope);
        let t = res("%loop").unwrap();
        assert_eq!(t, Term::HitCtor(name("Circle"), name("loop"), vec![], vec![]));
    }

    #[test]
    fn arrows_bind_an_unnamed_variable() {
        let t = res("Nat -> Nat").unwrap();
        assert_eq!(t, Term::pi(Binder::explicit("_"), Term::Nat, Term::Nat));
    }

    #[test]
    fn multi_name_groups_shift_their_type() {
        let t = res("\\A. (x y : A) -> Id A x y").unwrap();
        let Term::Lam(_, _, pi) = t else { panic!() };
        let Term::Pi(_, a1, rest) = &*pi else { panic!() };
        let Term::Pi(_, a2, _) = &**rest else { panic!() };
        assert_eq!(**a1, Term::Var(0));
        assert_eq!(**a2, Term::Var(1));
    }
}
