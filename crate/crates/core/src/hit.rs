//! Higher inductive type declarations: schema validation and synthesis of
//! the type former, constructors, induction principle and the
//! propositional computation rules of path constructors.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::diag::{Code, Error, Result, Span};
use crate::kernel::elab::{Ctx, Elab};
use crate::kernel::env::{instance, ArgKind, Decl, DeclKind, Globals, HitSig, PathSig, PointSig};
use crate::parser::resolve::{check_fresh, check_univars, Resolver};
use crate::parser::surface::{CtorKind, SDecl, SDeclKind, SName};
use crate::syntax::{alpha_equal, constants, map_vars, name, shift, strip_locs, Binder, Level, Motive, Name, Term};

type Id = usize;

fn schema(span: Span, msg: impl Into<String>) -> Error {
    Error::new(Code::HitSchema, span, msg)
}

/// Moves `t` from context `old` to context `new` (both outermost first).
/// Fails with the first variable missing from `new`.
fn reindex(t: &Term, old: &[Id], new: &[Id]) -> std::result::Result<Term, Id> {
    map_vars(t, 0, &mut |d, i| {
        if i < d {
            return Ok(Term::Var(i));
        }
        let id = old[old.len() - 1 - (i - d)];
        let pos = new.iter().rposition(|x| *x == id).ok_or(id)?;
        Ok(Term::Var(d + new.len() - 1 - pos))
    })
}

fn apps(head: Term, args: impl IntoIterator<Item = (Term, bool)>) -> Term {
    args.into_iter().fold(head, |f, (a, imp)| Term::App(Arc::new(f), Arc::new(a), imp))
}

fn spine(t: &Term) -> (&Term, Vec<(&Term, bool)>) {
    let mut args = Vec::new();
    let mut h = t;
    while let Term::App(f, a, imp) = h {
        args.push((&**a, *imp));
        h = f;
    }
    args.reverse();
    (h, args)
}

/// A growing telescope of named binders, used to assemble generated types.
#[derive(Clone, Default)]
struct Tele {
    ids: Vec<Id>,
    binders: Vec<(Binder, Term)>,
}

impl Tele {
    fn var(&self, id: Id) -> Term {
        let pos = self.ids.iter().rposition(|x| *x == id).expect("bound id");
        Term::Var(self.ids.len() - 1 - pos)
    }

    fn bind(&mut self, id: Id, b: Binder, ty: Term) {
        self.ids.push(id);
        self.binders.push((b, ty));
    }

    fn mark(&self) -> usize {
        self.ids.len()
    }

    fn close(&mut self, from: usize, body: Term, pi: bool) -> Term {
        let mut acc = body;
        while self.ids.len() > from {
            self.ids.pop();
            let (b, ty) = self.binders.pop().expect("binder");
            acc = if pi { Term::Pi(b, Arc::new(ty), Arc::new(acc)) } else { Term::Lam(b, None, Arc::new(acc)) };
        }
        acc
    }
}

struct Ctor {
    name: Name,
    span: Span,
    /// Argument binders and types; each type lives in the context of the
    /// parameters and the preceding arguments.
    args: Vec<(Binder, Term)>,
    kinds: Vec<ArgKind>,
    /// Boundaries of a path constructor, in the context of parameters and
    /// all arguments.
    ends: Option<(Term, Term)>,
    /// Codomain in the context of parameters and arguments.
    cod: Term,
}

struct Gen<'a> {
    hit: Name,
    levels: Vec<Level>,
    level: Level,
    params: Vec<(Binder, Term)>,
    ctors: &'a [Ctor],
    next: Id,
}

impl Gen<'_> {
    fn fresh(&mut self) -> Id {
        self.next += 1;
        self.next
    }

    /// `H ps` in the telescope `t`, with the parameters bound at `ps`.
    fn hit_form(&self, t: &Tele, ps: &[Id]) -> Term {
        apps(Term::Const(self.hit.clone(), self.levels.clone()), ps.iter().map(|p| (t.var(*p), false)))
    }

    fn ctor_app(&self, t: &Tele, c: &Name, ps: &[Id], args: Vec<Term>) -> Term {
        let head = Term::Const(c.clone(), self.levels.clone());
        let ps = ps.iter().map(|p| (t.var(*p), true));
        apps(head, ps.chain(args.into_iter().map(|a| (a, false))))
    }

    fn bind_params(&mut self, t: &mut Tele, implicit: bool) -> Vec<Id> {
        let mut ids = Vec::new();
        for (b, ty) in self.params.clone() {
            let id = self.fresh();
            let ty = reindex(&ty, &ids, &t.ids).expect("parameter scope");
            t.bind(id, Binder { name: b.name.clone(), implicit }, ty);
            ids.push(id);
        }
        ids
    }
}

/// Kind of one constructor argument: `Plain` if the HIT does not occur,
/// `Rec` if it is the HIT itself, `RecFun` for a function into the HIT
/// from a type not mentioning it.
fn arg_kind(hit: &Name, ty: &Term, hit_form: &Term, c: &SName) -> Result<ArgKind> {
    let mentions = |t: &Term| {
        let mut cs = BTreeSet::new();
        constants(t, &mut cs);
        cs.contains(hit)
    };
    if !mentions(ty) {
        return Ok(ArgKind::Plain);
    }
    if alpha_equal(ty, hit_form) {
        return Ok(ArgKind::Rec);
    }
    if let Term::Pi(b, dom, cod) = ty {
        if !b.implicit && !mentions(dom) && alpha_equal(cod, &shift(hit_form, 0, 1)) {
            return Ok(ArgKind::RecFun);
        }
    }
    Err(schema(
        c.span,
        format!(
            "constructor `{}`: `{hit}` may only occur as an argument or as the codomain of a function argument whose domain does not mention it",
            c.text
        ),
    ))
}

/// Declares a HIT and everything synthesized from it.
pub fn declare(g: &mut Globals, d: &SDecl) -> Result<Vec<Name>> {
    let SDeclKind::Hit { level, ctors: sctors } = &d.kind else {
        unreachable!("not a HIT declaration")
    };
    let univars = check_univars(d)?;
    check_fresh(g, &d.name)?;
    let hit = name(&d.name.text);
    if g.roles.transport.is_none() || g.roles.apd.is_none() {
        return Err(schema(d.name.span, "HIT declarations require `transport` and `apd` to be defined first"));
    }
    let mut seen = BTreeSet::new();
    for c in sctors {
        check_fresh(g, &c.name)?;
        if c.name.text == d.name.text || !seen.insert(c.name.text.clone()) {
            return Err(Error::new(Code::Scope, c.name.span, format!("duplicate declaration of `{}`", c.name.text)));
        }
    }
    let ind = name(&format!("{}-ind", d.name.text));
    let betas: Vec<Name> = sctors
        .iter()
        .filter(|c| c.kind == CtorKind::Path)
        .map(|c| name(&format!("{}-{}-beta", d.name.text, c.name.text)))
        .collect();
    for n in std::iter::once(&ind).chain(&betas) {
        check_fresh(g, &SName { text: n.to_string(), span: d.name.span })?;
        if seen.contains(&**n) {
            return Err(Error::new(Code::Scope, d.name.span, format!("generated name `{n}` clashes with a constructor")));
        }
    }
    let levels: Vec<Level> = (0..univars.len() as u32).map(Level::Var).collect();
    let mut v_name = "v".to_string();
    while univars.contains(&v_name) {
        v_name.push('\'');
    }

    // Resolve parameters, the universe and constructor types.
    let mut r = Resolver::new(g, univars.clone());
    let hit_level = match level {
        Some(l) => r.level(l, d.name.span)?,
        None => Level::Lit(0),
    };
    let mut params: Vec<(Binder, Term)> = Vec::new();
    for grp in &d.params {
        if grp.implicit {
            return Err(schema(grp.names[0].span, "HIT parameters must be explicit"));
        }
        let ty = r.term(&grp.ty)?;
        for (k, n) in grp.names.iter().enumerate() {
            params.push((Binder::explicit(&n.text), shift(&ty, 0, k as isize)));
            r.push(&n.text);
        }
    }
    let np = params.len();
    let pvars = |implicit: bool| (0..np).map(move |i| (Term::Var(np - 1 - i), implicit));
    let hit_form = apps(Term::Const(hit.clone(), levels.clone()), pvars(false));
    r.add_alias(&d.name.text, hit_form.clone());
    for c in sctors {
        r.add_alias(&c.name.text, apps(Term::Const(name(&c.name.text), levels.clone()), pvars(true)));
    }
    let mut raw_types = Vec::new();
    for c in sctors {
        raw_types.push(strip_locs(&r.term(&c.ty)?));
    }
    drop(r);

    // Validate constructor shapes.
    let mut ctors = Vec::new();
    for (c, ty) in sctors.iter().zip(&raw_types) {
        let mut args = Vec::new();
        let mut kinds = Vec::new();
        let mut t = ty;
        while let Term::Pi(b, a, body) = t {
            if b.implicit {
                return Err(schema(c.name.span, format!("constructor `{}`: arguments must be explicit", c.name.text)));
            }
            kinds.push(arg_kind(&hit, a, &shift(&hit_form, 0, args.len() as isize), &c.name)?);
            args.push((b.clone(), (**a).clone()));
            t = body;
        }
        let here = shift(&hit_form, 0, args.len() as isize);
        let ends = match c.kind {
            CtorKind::Point => {
                if !alpha_equal(t, &here) {
                    return Err(schema(
                        c.name.span,
                        format!("point constructor `{}` must construct `{}`", c.name.text, d.name.text),
                    ));
                }
                None
            }
            CtorKind::Path => match t {
                Term::Id(a, l, rr) => {
                    let a = a.strip_loc();
                    if !matches!(a, Term::Hole) && !alpha_equal(a, &here) {
                        return Err(schema(
                            c.name.span,
                            format!(
                                "path constructor `{}` must be a path in `{}`; only 1-dimensional constructors are supported",
                                c.name.text, d.name.text
                            ),
                        ));
                    }
                    Some(((**l).clone(), (**rr).clone()))
                }
                _ => {
                    return Err(schema(
                        c.name.span,
                        format!("path constructor `{}` must have an identity type as codomain", c.name.text),
                    ))
                }
            },
        };
        ctors.push(Ctor { name: name(&c.name.text), span: c.name.span, args, kinds, ends, cod: t.clone() });
    }
    for (i, c) in ctors.iter().enumerate() {
        let earlier: Vec<&Ctor> = ctors[..i].iter().filter(|c| c.ends.is_none()).collect();
        if let Some((l, r)) = &c.ends {
            for e in [l, r] {
                check_boundary(&earlier, &hit, c, e, np)?;
            }
        }
    }
    let points: Vec<&Ctor> = ctors.iter().filter(|c| c.ends.is_none()).collect();

    let mut gen = Gen { hit: hit.clone(), levels: levels.clone(), level: hit_level.clone(), params, ctors: &ctors, next: 0 };
    let mut declared = Vec::new();
    let add = |g: &mut Globals, decl: Decl, declared: &mut Vec<Name>| -> Result<()> {
        let span = decl.span;
        instance(g, &decl, &vec![0; decl.nlevels()])
            .map_err(|e| schema(span, format!("synthesized declaration `{}` is ill-typed: {}", decl.name, e.message)))?;
        declared.push(decl.name.clone());
        g.insert(decl)?;
        Ok(())
    };

    // Type former.
    let mut t = Tele::default();
    let ps = gen.bind_params(&mut t, false);
    let body_core = Term::HitType(hit.clone(), levels.clone(), ps.iter().map(|p| t.var(*p)).collect());
    let former_ty = t.clone().close(0, Term::Universe(hit_level.clone()), true);
    let former_body = t.close(0, body_core, false);
    let former = Decl::new(hit.clone(), DeclKind::HitType(hit.clone()), names(&univars), former_ty, Some(former_body), d.span);
    add(g, former, &mut declared)?;

    // Constructors; the signature is registered first because evaluating a
    // constructor needs it.
    g.insert_hit(HitSig {
        name: hit.clone(),
        nlevels: univars.len(),
        nparams: np,
        points: points.iter().map(|c| PointSig { name: c.name.clone(), kinds: c.kinds.clone() }).collect(),
        paths: ctors
            .iter()
            .filter(|c| c.ends.is_some())
            .map(|c| PathSig { name: c.name.clone(), nargs: c.args.len() })
            .collect(),
        ind: ind.clone(),
        betas: betas.clone(),
    });
    for c in &ctors {
        let mut t = Tele::default();
        let ps = gen.bind_params(&mut t, true);
        let mut old = ps.clone();
        for (b, a) in &c.args {
            let id = gen.fresh();
            let a = reindex(a, &old, &t.ids).expect("argument scope");
            t.bind(id, b.clone(), a);
            old.push(id);
        }
        let cod = reindex(&c.cod, &old, &t.ids).expect("codomain scope");
        let ty = t.clone().close(0, cod, true);
        let all: Vec<Term> = old.iter().map(|a| t.var(*a)).collect();
        let body = Term::HitCtor(hit.clone(), c.name.clone(), levels.clone(), all);
        let body = t.close(0, body, false);
        let kind = if c.ends.is_some() { DeclKind::PathCtor(hit.clone()) } else { DeclKind::PointCtor(hit.clone()) };
        let decl = Decl::new(c.name.clone(), kind, names(&univars), ty, Some(body), c.span);
        add(g, decl, &mut declared)?;
    }

    // Induction principle.
    let mut ind_levels = levels.clone();
    ind_levels.push(Level::Var(univars.len() as u32));
    let mut ind_univars = names(&univars);
    ind_univars.push(name(&v_name));
    let v = Level::Var(univars.len() as u32);
    let mut t = Tele::default();
    let ps = gen.bind_params(&mut t, true);
    let p_id = gen.fresh();
    let motive_ty = Term::pi(Binder::explicit("x"), gen.hit_form(&t, &ps), Term::Universe(v.clone()));
    t.bind(p_id, Binder::explicit("P"), motive_ty);
    let mut m_ids = Vec::new();
    for c in &ctors {
        let mt = method_type(&mut gen, &t, &ps, p_id, &m_ids, c, &v)?;
        let id = gen.fresh();
        t.bind(id, Binder::explicit(&format!("m-{}", c.name)), mt);
        m_ids.push(id);
    }
    let x_id = gen.fresh();
    t.bind(x_id, Binder::explicit("x"), gen.hit_form(&t, &ps));
    let ind_ty = t.clone().close(0, Term::app(t.var(p_id), t.var(x_id)), true);
    let elim = Term::HitElim {
        hit: hit.clone(),
        motive: Motive::new(vec![name("y")], Term::app(shift(&t.var(p_id), 0, 1), Term::Var(0))),
        methods: m_ids.iter().map(|m| t.var(*m)).collect(),
        scrutinee: Arc::new(t.var(x_id)),
    };
    let mut lam_t = t.clone();
    for (i, (b, _)) in lam_t.binders.iter_mut().enumerate() {
        b.implicit = i < np;
    }
    let ind_body = lam_t.close(0, elim, false);
    let ind_decl = Decl::new(ind.clone(), DeclKind::HitInd(hit.clone()), ind_univars.clone(), ind_ty, Some(ind_body), d.span);
    add(g, ind_decl, &mut declared)?;

    // Propositional computation rules for path constructors.
    for (c, beta) in ctors.iter().filter(|c| c.ends.is_some()).zip(&betas) {
        let ty = beta_type(&mut gen, &ind, &ind_levels, c, &v)?;
        let decl = Decl::new(beta.clone(), DeclKind::HitBeta(hit.clone()), ind_univars.clone(), ty, None, c.span);
        add(g, decl, &mut declared)?;
    }

    // Re-check the generated bodies now that every declaration is present.
    for n in &declared {
        let decl = g.decl(n).expect("declared");
        let inst = decl.base_instance().expect("checked instance");
        if let Some(body) = &inst.body {
            let mut el = Elab::new(g);
            el.check(&Ctx::new(), body, &inst.ty_val, decl.span)
                .map_err(|e| schema(decl.span, format!("synthesized body of `{n}` is ill-typed: {}", e.message)))?;
        }
    }
    Ok(declared)
}

fn names(us: &[String]) -> Vec<Name> {
    us.iter().map(|u| name(u)).collect()
}

/// A boundary must be built from earlier point constructors, recursive
/// arguments and applications of function-typed recursive arguments.
fn check_boundary(points: &[&Ctor], hit: &Name, c: &Ctor, t: &Term, np: usize) -> Result<()> {
    if at_hit(points, c, t, np) {
        return Ok(());
    }
    Err(schema(
        c.span,
        format!(
            "path constructor `{}`: endpoints must be built from earlier point constructors of `{hit}` and recursive arguments",
            c.name
        ),
    ))
}

/// The constructor argument a free index refers to, if any.
fn arg_of(c: &Ctor, i: usize) -> Option<usize> {
    (i < c.args.len()).then(|| c.args.len() - 1 - i)
}

fn at_hit(points: &[&Ctor], c: &Ctor, t: &Term, np: usize) -> bool {
    let t = t.strip_loc();
    if let Term::Var(i) = t {
        return arg_of(c, *i).is_some_and(|a| c.kinds[a] == ArgKind::Rec);
    }
    let (h, args) = spine(t);
    match h.strip_loc() {
        Term::Var(i) if args.len() == 1 && !args[0].1 => {
            arg_of(c, *i).is_some_and(|a| c.kinds[a] == ArgKind::RecFun) && plain(c, args[0].0)
        }
        Term::Const(n, _) => {
            let Some(p) = points.iter().find(|p| &p.name == n) else { return false };
            if args.len() != np + p.args.len() || args[..np].iter().any(|(_, imp)| !imp) {
                return false;
            }
            args[np..].iter().zip(&p.kinds).all(|((a, imp), k)| {
                !imp && match k {
                    ArgKind::Plain => plain(c, a),
                    ArgKind::Rec => at_hit(points, c, a, np),
                    ArgKind::RecFun => match a.strip_loc() {
                        Term::Var(i) => arg_of(c, *i).is_some_and(|a| c.kinds[a] == ArgKind::RecFun),
                        _ => false,
                    },
                }
            })
        }
        _ => false,
    }
}

/// Whether `t` avoids every recursive argument of `c`.
fn plain(c: &Ctor, t: &Term) -> bool {
    let mut ok = true;
    let _ = map_vars(t, 0, &mut |d, i| {
        if i >= d {
            if let Some(a) = arg_of(c, i - d) {
                ok &= c.kinds[a] == ArgKind::Plain;
            }
        }
        Ok::<Term, ()>(Term::Var(i))
    });
    ok
}

/// Context ids of a constructor's parameters and arguments, in order.
fn ctor_ctx(ps: &[Id], args: &[Id]) -> Vec<Id> {
    ps.iter().chain(args).copied().collect()
}

/// How the induction hypotheses of recursive arguments are represented in
/// a translated boundary.
enum Ih<'a> {
    /// Bound variables of a method telescope.
    Vars(&'a [Option<Id>]),
    /// Applications of the induction principle.
    Ind { ind: &'a Name, levels: &'a [Level], p: Id, ms: &'a [Id] },
}

impl Gen<'_> {
    fn ind_app(&self, t: &Tele, ind: &Name, levels: &[Level], ps: &[Id], p: Id, ms: &[Id], x: Term) -> Term {
        let head = Term::Const(ind.clone(), levels.to_vec());
        let args = ps
            .iter()
            .map(|q| (t.var(*q), true))
            .chain(std::iter::once((t.var(p), false)))
            .chain(ms.iter().map(|m| (t.var(*m), false)))
            .chain(std::iter::once((x, false)));
        apps(head, args)
    }

    /// Induction hypothesis for argument `a` (index into the constructor's
    /// arguments), optionally applied to `b` for function arguments.
    fn ih(&self, t: &Tele, ih: &Ih, ps: &[Id], arg_ids: &[Id], a: usize, b: Option<Term>) -> Term {
        match ih {
            Ih::Vars(ids) => {
                let v = t.var(ids[a].expect("recursive argument"));
                match b {
                    Some(b) => Term::app(v, b),
                    None => v,
                }
            }
            Ih::Ind { ind, levels, p, ms } => {
                let x = match b {
                    Some(b) => Term::app(t.var(arg_ids[a]), b),
                    None => t.var(arg_ids[a]),
                };
                self.ind_app(t, ind, levels, ps, *p, ms, x)
            }
        }
    }

    /// Translates a boundary `e` of path constructor `c` (in the context of
    /// `old`) to the value the eliminator assigns it, in telescope `t`.
    #[allow(clippy::too_many_arguments)]
    fn translate(
        &mut self,
        t: &mut Tele,
        c: &Ctor,
        old: &[Id],
        ps: &[Id],
        arg_ids: &[Id],
        ms: &[Id],
        ih: &Ih,
        e: &Term,
    ) -> Term {
        let e = e.strip_loc();
        let arg_pos = |id: Id| arg_ids.iter().position(|x| *x == id);
        let lookup = |i: usize| old[old.len() - 1 - i];
        if let Term::Var(i) = e {
            let a = arg_pos(lookup(*i)).expect("validated boundary");
            return self.ih(t, ih, ps, arg_ids, a, None);
        }
        let (h, args) = spine(e);
        match h.strip_loc() {
            Term::Var(i) => {
                let a = arg_pos(lookup(*i)).expect("validated boundary");
                let b = reindex(args[0].0, old, &t.ids).expect("boundary scope");
                self.ih(t, ih, ps, arg_ids, a, Some(b))
            }
            Term::Const(n, _) => {
                let p = self.ctors.iter().find(|p| &p.name == n).expect("point constructor");
                let m_index = self.ctors.iter().position(|x| &x.name == n).expect("ctor");
                let mut out = Vec::new();
                for ((a, _), k) in args[ps.len()..].iter().zip(&p.kinds) {
                    let a2 = reindex(a, old, &t.ids).expect("boundary scope");
                    out.push(a2.clone());
                    match k {
                        ArgKind::Plain => {}
                        ArgKind::Rec => out.push(self.translate(t, c, old, ps, arg_ids, ms, ih, a)),
                        ArgKind::RecFun => {
                            let Term::Var(i) = a.strip_loc() else { unreachable!("validated boundary") };
                            let r = arg_pos(lookup(*i)).expect("validated boundary");
                            let b_id = self.fresh();
                            let Term::Pi(_, dom, _) = &c.args[r].1 else { unreachable!("function argument") };
                            let dom_ctx: Vec<Id> = ctor_ctx(ps, &arg_ids[..r]);
                            let dom = reindex(dom, &dom_ctx, &t.ids).expect("domain scope");
                            let m = t.mark();
                            t.bind(b_id, Binder::explicit("b"), dom);
                            let body = self.ih(t, ih, ps, arg_ids, r, Some(t.var(b_id)));
                            out.push(t.close(m, body, false));
                        }
                    }
                }
                apps(t.var(ms[m_index]), out.into_iter().map(|a| (a, false)))
            }
            _ => unreachable!("validated boundary"),
        }
    }
}

/// Binds the arguments of `c` in `t` (with induction hypotheses when
/// `with_ih`), returning argument ids and IH ids.
fn bind_args(gen: &mut Gen, t: &mut Tele, ps: &[Id], p: Id, c: &Ctor, with_ih: bool) -> (Vec<Id>, Vec<Option<Id>>) {
    let mut arg_ids = Vec::new();
    let mut ih_ids = Vec::new();
    for ((b, a), k) in c.args.iter().zip(&c.kinds) {
        let id = gen.fresh();
        let ctx = ctor_ctx(ps, &arg_ids);
        let a2 = reindex(a, &ctx, &t.ids).expect("argument scope");
        t.bind(id, b.clone(), a2.clone());
        arg_ids.push(id);
        if !with_ih || *k == ArgKind::Plain {
            ih_ids.push(None);
            continue;
        }
        let ih_id = gen.fresh();
        let ih_ty = match k {
            ArgKind::Rec => Term::app(t.var(p), t.var(id)),
            _ => {
                let Term::Pi(_, dom, _) = &a2 else { unreachable!("function argument") };
                let b_id = gen.fresh();
                let m = t.mark();
                t.bind(b_id, Binder::explicit("b"), shift(dom, 0, 1));
                let body = Term::app(t.var(p), Term::app(t.var(id), t.var(b_id)));
                t.close(m, body, true)
            }
        };
        t.bind(ih_id, Binder::explicit(&format!("{}'", b.name)), ih_ty);
        ih_ids.push(Some(ih_id));
    }
    (arg_ids, ih_ids)
}

fn method_type(gen: &mut Gen, base: &Tele, ps: &[Id], p: Id, ms: &[Id], c: &Ctor, v: &Level) -> Result<Term> {
    let mut t = base.clone();
    let m = t.mark();
    let (arg_ids, ih_ids) = bind_args(gen, &mut t, ps, p, c, true);
    let args: Vec<Term> = arg_ids.iter().map(|a| t.var(*a)).collect();
    let me = gen.ctor_app(&t, &c.name, ps, args);
    let body = match &c.ends {
        None => Term::app(t.var(p), me),
        Some((l, r)) => {
            // Boundaries only mention earlier point constructors, whose
            // methods are already bound.
            let old = ctor_ctx(ps, &arg_ids);
            let tl = gen.translate(&mut t, c, &old, ps, &arg_ids, ms, &Ih::Vars(&ih_ids), l);
            let tr = gen.translate(&mut t, c, &old, ps, &arg_ids, ms, &Ih::Vars(&ih_ids), r);
            let l2 = reindex(l, &old, &t.ids).expect("boundary scope");
            let r2 = reindex(r, &old, &t.ids).expect("boundary scope");
            let tr_ty = transport_app(gen, &t, ps, p, l2, r2.clone(), me, tl, v);
            Term::Id(Arc::new(Term::app(t.var(p), r2)), Arc::new(tr_ty), Arc::new(tr))
        }
    };
    Ok(t.close(m, body, true))
}

#[allow(clippy::too_many_arguments)]
fn transport_app(gen: &Gen, t: &Tele, ps: &[Id], p: Id, l: Term, r: Term, path: Term, u: Term, v: &Level) -> Term {
    let head = Term::Const(name("transport"), vec![gen.level.clone(), v.clone()]);
    apps(
        head,
        [(gen.hit_form(t, ps), true), (t.var(p), false), (l, true), (r, true), (path, false), (u, false)],
    )
}

fn beta_type(gen: &mut Gen, ind: &Name, ind_levels: &[Level], c: &Ctor, v: &Level) -> Result<Term> {
    let mut t = Tele::default();
    let ps = gen.bind_params(&mut t, true);
    let p_id = gen.fresh();
    let motive_ty = Term::pi(Binder::explicit("x"), gen.hit_form(&t, &ps), Term::Universe(v.clone()));
    t.bind(p_id, Binder::explicit("P"), motive_ty);
    let mut ms = Vec::new();
    let ctors = gen.ctors;
    for k in ctors {
        let mt = method_type(gen, &t, &ps, p_id, &ms, k, v)?;
        let id = gen.fresh();
        t.bind(id, Binder::explicit(&format!("m-{}", k.name)), mt);
        ms.push(id);
    }
    let (arg_ids, _) = bind_args(gen, &mut t, &ps, p_id, c, false);
    let old = ctor_ctx(&ps, &arg_ids);
    let (l, r) = c.ends.as_ref().expect("path constructor");
    let l2 = reindex(l, &old, &t.ids).expect("boundary scope");
    let r2 = reindex(r, &old, &t.ids).expect("boundary scope");
    let args: Vec<Term> = arg_ids.iter().map(|a| t.var(*a)).collect();
    let path = gen.ctor_app(&t, &c.name, &ps, args.clone());

    // apd (\x. H-ind ps P ms x) (c args)
    let x_id = gen.fresh();
    let mut f_t = t.clone();
    let m = f_t.mark();
    f_t.bind(x_id, Binder::explicit("x"), gen.hit_form(&t, &ps));
    let body = gen.ind_app(&f_t, ind, ind_levels, &ps, p_id, &ms, f_t.var(x_id));
    let f = f_t.close(m, body, false);
    let apd = apps(
        Term::Const(name("apd"), vec![gen.level.clone(), v.clone()]),
        [
            (gen.hit_form(&t, &ps), true),
            (t.var(p_id), true),
            (f, false),
            (l2, true),
            (r2, true),
            (path, false),
        ],
    );

    // m_c args IHs
    let m_index = ctors.iter().position(|x| x.name == c.name).expect("ctor");
    let ih = Ih::Ind { ind, levels: ind_levels, p: p_id, ms: &ms };
    let mut out = Vec::new();
    for (a, k) in c.kinds.iter().enumerate() {
        out.push(t.var(arg_ids[a]));
        match k {
            ArgKind::Plain => {}
            ArgKind::Rec => out.push(gen.ih(&t, &ih, &ps, &arg_ids, a, None)),
            ArgKind::RecFun => {
                let Term::Pi(_, dom, _) = &c.args[a].1 else { unreachable!("function argument") };
                let dom = reindex(dom, &ctor_ctx(&ps, &arg_ids[..a]), &t.ids).expect("domain scope");
                let b_id = gen.fresh();
                let mut bt = t.clone();
                let mk = bt.mark();
                bt.bind(b_id, Binder::explicit("b"), dom);
                let body = gen.ih(&bt, &ih, &ps, &arg_ids, a, Some(bt.var(b_id)));
                out.push(bt.close(mk, body, false));
            }
        }
    }
    let method = apps(t.var(ms[m_index]), out.into_iter().map(|a| (a, false)));
    let stmt = Term::Id(Arc::new(Term::Hole), Arc::new(apd), Arc::new(method));
    Ok(t.close(0, stmt, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reindex_moves_between_contexts() {
        // In [a, b], `b a` is App(Var 0, Var 1); in [b, z, a] it is App(Var 2, Var 0).
        let t = Term::app(Term::Var(0), Term::Var(1));
        let out = reindex(&t, &[1, 2], &[2, 9, 1]).unwrap();
        assert_eq!(out, Term::app(Term::Var(2), Term::Var(0)));
        assert_eq!(reindex(&t, &[1, 2], &[2]), Err(1));
    }

    #[test]
    fn telescope_closes_to_pi() {
        let mut t = Tele::default();
        t.bind(1, Binder::explicit("A"), Term::Universe(Level::Lit(0)));
        t.bind(2, Binder::explicit("a"), t.var(1));
        let body = t.var(1);
        let ty = t.close(0, body, true);
        let expected = Term::pi(
            Binder::explicit("A"),
            Term::Universe(Level::Lit(0)),
            Term::pi(Binder::explicit("a"), Term::Var(0), Term::Var(1)),
        );
        assert_eq!(ty, expected);
    }
}
