//! Global environment: checked declarations and their universe instances.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use super::elab::Elab;
use super::nbe::Ev;
use super::value::V;
use crate::diag::{Code, Error, Result, Span};
use crate::parser::resolve::{GlobalInfo, GlobalKind, HitInfo, Scope};
use crate::syntax::{instantiate_levels, strip_locs, Name, Term};

pub type DeclId = u64;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Def,
    Axiom,
    HitType(Name),
    PointCtor(Name),
    PathCtor(Name),
    HitInd(Name),
    /// Generated propositional computation rule of a path constructor.
    HitBeta(Name),
}

impl DeclKind {
    pub fn unfolds(&self) -> bool {
        !matches!(self, DeclKind::Axiom | DeclKind::HitBeta(_))
    }

    pub fn is_axiom(&self) -> bool {
        !self.unfolds()
    }

    /// Declarations synthesized from a HIT whose bodies refer to the
    /// declaration itself; they are evaluated unchecked at instantiation
    /// and re-checked once inserted.
    pub fn is_generated(&self) -> bool {
        matches!(self, DeclKind::HitType(_) | DeclKind::PointCtor(_) | DeclKind::PathCtor(_) | DeclKind::HitInd(_))
    }

    pub fn hit(&self) -> Option<&Name> {
        match self {
            DeclKind::HitType(h)
            | DeclKind::PointCtor(h)
            | DeclKind::PathCtor(h)
            | DeclKind::HitInd(h)
            | DeclKind::HitBeta(h) => Some(h),
            _ => None,
        }
    }
}

/// One elaborated universe instance of a declaration.
#[derive(Debug)]
pub struct Instance {
    pub ty: Term,
    pub ty_val: V,
    pub body: Option<Term>,
    pub body_val: Option<V>,
}

#[derive(Debug)]
pub struct Decl {
    pub id: DeclId,
    pub name: Name,
    pub kind: DeclKind,
    pub univars: Vec<Name>,
    /// Resolved but unelaborated type and body, with level variables.
    pub raw_ty: Term,
    pub raw_body: Option<Term>,
    pub span: Span,
    instances: RwLock<HashMap<Vec<u32>, Arc<Instance>>>,
}

impl Decl {
    pub fn new(
        name: Name,
        kind: DeclKind,
        univars: Vec<Name>,
        raw_ty: Term,
        raw_body: Option<Term>,
        span: Span,
    ) -> Decl {
        Decl {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            name,
            kind,
            univars,
            raw_ty,
            raw_body,
            span,
            instances: RwLock::new(HashMap::new()),
        }
    }

    pub fn nlevels(&self) -> usize {
        self.univars.len()
    }

    pub fn cached(&self, levels: &[u32]) -> Option<Arc<Instance>> {
        self.instances.read().expect("instance lock").get(levels).cloned()
    }

    pub fn base_instance(&self) -> Option<Arc<Instance>> {
        self.cached(&vec![0; self.nlevels()])
    }

    fn store(&self, levels: Vec<u32>, inst: Arc<Instance>) -> Arc<Instance> {
        let mut m = self.instances.write().expect("instance lock");
        m.entry(levels).or_insert(inst).clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgKind {
    Plain,
    /// An argument of the HIT itself.
    Rec,
    /// A function into the HIT from a type not mentioning it.
    RecFun,
}

#[derive(Clone, Debug)]
pub struct PointSig {
    pub name: Name,
    pub kinds: Vec<ArgKind>,
}

#[derive(Clone, Debug)]
pub struct PathSig {
    pub name: Name,
    pub nargs: usize,
}

#[derive(Clone, Debug)]
pub struct HitSig {
    pub name: Name,
    pub nlevels: usize,
    pub nparams: usize,
    pub points: Vec<PointSig>,
    pub paths: Vec<PathSig>,
    /// Name of the generated induction principle.
    pub ind: Name,
    pub betas: Vec<Name>,
}

impl HitSig {
    pub fn point_index(&self, c: &str) -> Option<usize> {
        self.points.iter().position(|p| &*p.name == c)
    }

    pub fn path_index(&self, c: &str) -> Option<usize> {
        self.paths.iter().position(|p| &*p.name == c)
    }

    pub fn nmethods(&self) -> usize {
        self.points.len() + self.paths.len()
    }
}

/// Declarations the kernel and the loop calculator identify by identity.
#[derive(Clone, Debug, Default)]
pub struct Roles {
    pub transport: Option<DeclId>,
    pub apd: Option<DeclId>,
    pub concat: Option<DeclId>,
    pub inv: Option<DeclId>,
}

pub const RESERVED: &[&str] = &["transport", "apd", "concat", "inv"];

#[derive(Clone, Default)]
pub struct Globals {
    decls: HashMap<Name, Arc<Decl>>,
    order: Vec<Name>,
    hits: HashMap<Name, Arc<HitSig>>,
    pub roles: Roles,
}

impl Globals {
    pub fn new() -> Globals {
        Globals::default()
    }

    pub fn decl(&self, n: &str) -> Option<Arc<Decl>> {
        self.decls.get(n).cloned()
    }

    pub fn hit_sig(&self, n: &str) -> Option<Arc<HitSig>> {
        self.hits.get(n).cloned()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn names(&self) -> &[Name] {
        &self.order
    }

    pub fn decls(&self) -> impl Iterator<Item = Arc<Decl>> + '_ {
        self.order.iter().map(|n| self.decls[n].clone())
    }

    pub fn by_id(&self, id: DeclId) -> Option<Arc<Decl>> {
        self.decls.values().find(|d| d.id == id).cloned()
    }

    pub fn role_name(&self, id: Option<DeclId>) -> Option<Name> {
        id.and_then(|i| self.by_id(i)).map(|d| d.name.clone())
    }

    /// Adds an already checked declaration.
    pub fn insert(&mut self, d: Decl) -> Result<Arc<Decl>> {
        if self.decls.contains_key(&d.name) {
            return Err(Error::new(Code::Scope, d.span, format!("duplicate declaration of `{}`", d.name)));
        }
        let d = Arc::new(d);
        if d.kind == DeclKind::Def {
            let slot = match &*d.name {
                "transport" => Some(&mut self.roles.transport),
                "apd" => Some(&mut self.roles.apd),
                "concat" => Some(&mut self.roles.concat),
                "inv" => Some(&mut self.roles.inv),
                _ => None,
            };
            if let Some(s) = slot {
                if s.is_none() {
                    *s = Some(d.id);
                }
            }
        }
        self.order.push(d.name.clone());
        self.decls.insert(d.name.clone(), d.clone());
        Ok(d)
    }

    pub fn insert_hit(&mut self, sig: HitSig) {
        self.hits.insert(sig.name.clone(), Arc::new(sig));
    }

    /// Merges declarations added to `other` after it was cloned from a
    /// common ancestor.
    pub fn absorb(&mut self, other: &Globals) {
        for n in &other.order {
            if !self.decls.contains_key(n) {
                self.order.push(n.clone());
                self.decls.insert(n.clone(), other.decls[n].clone());
            }
        }
        for (n, h) in &other.hits {
            self.hits.entry(n.clone()).or_insert_with(|| h.clone());
        }
        let r = &other.roles;
        self.roles.transport = self.roles.transport.or(r.transport);
        self.roles.apd = self.roles.apd.or(r.apd);
        self.roles.concat = self.roles.concat.or(r.concat);
        self.roles.inv = self.roles.inv.or(r.inv);
    }
}

impl Scope for Globals {
    fn global(&self, n: &str) -> Option<GlobalInfo> {
        let d = self.decls.get(n)?;
        let kind = match &d.kind {
            DeclKind::Def | DeclKind::HitInd(_) => GlobalKind::Def,
            DeclKind::Axiom | DeclKind::HitBeta(_) => GlobalKind::Axiom,
            DeclKind::HitType(_) => GlobalKind::HitType,
            DeclKind::PointCtor(_) => GlobalKind::PointCtor,
            DeclKind::PathCtor(_) => GlobalKind::PathCtor,
        };
        Some(GlobalInfo { nlevels: d.nlevels(), kind, hit: d.kind.hit().cloned() })
    }

    fn hit(&self, n: &str) -> Option<HitInfo> {
        let h = self.hits.get(n)?;
        let mut ctors: Vec<(Name, usize, bool)> =
            h.points.iter().map(|p| (p.name.clone(), p.kinds.len(), false)).collect();
        ctors.extend(h.paths.iter().map(|p| (p.name.clone(), p.nargs, true)));
        Some(HitInfo { nparams: h.nparams, ctors })
    }
}

/// Elaborates (or fetches) the instance of `d` at the given levels.
pub fn instance(g: &Globals, d: &Decl, levels: &[u32]) -> Result<Arc<Instance>> {
    if levels.len() != d.nlevels() {
        return Err(Error::new(
            Code::Univ,
            d.span,
            format!("`{}` takes {} universe argument(s), {} given", d.name, d.nlevels(), levels.len()),
        ));
    }
    if let Some(i) = d.cached(levels) {
        return Ok(i);
    }
    let raw_ty = instantiate_levels(&d.raw_ty, levels);
    let mut el = Elab::new(g);
    let ctx = super::elab::Ctx::new();
    let (ty, _) = el.check_type(&ctx, &raw_ty, d.span)?;
    let ev = Ev::new(g);
    let ty_val = ev.eval(&Vec::new(), &ty);
    let (body, body_val) = match &d.raw_body {
        Some(b) if d.kind.is_generated() => {
            let t = strip_locs(&instantiate_levels(b, levels));
            let v = ev.eval(&Vec::new(), &t);
            (Some(t), Some(v))
        }
        Some(b) => {
            let b = instantiate_levels(b, levels);
            let t = el.check(&ctx, &b, &ty_val, d.span)?;
            let v = ev.eval(&Vec::new(), &t);
            (Some(t), Some(v))
        }
        None => (None, None),
    };
    Ok(d.store(levels.to_vec(), Arc::new(Instance { ty, ty_val, body, body_val })))
}

pub fn instance_or_panic(g: &Globals, d: &Decl, levels: &[u32]) -> Arc<Instance> {
    if let Some(i) = d.cached(levels) {
        return i;
    }
    instance(g, d, levels)
        .unwrap_or_else(|e| panic!("internal error: instance {}.{levels:?} failed after checking: {e}", d.name))
}
