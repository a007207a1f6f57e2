//! Core term language. Variables are de Bruijn indices; binder names are
//! display hints only.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::diag::Span;

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A universe level. `Var` refers to a level parameter of the enclosing
/// declaration and only appears in declaration templates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Lit(u32),
    Var(u32),
}

impl Level {
    pub fn lit(&self) -> Option<u32> {
        match self {
            Level::Lit(n) => Some(*n),
            Level::Var(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Binder {
    pub name: Name,
    pub implicit: bool,
}

impl Binder {
    pub fn explicit(n: &str) -> Binder {
        Binder { name: name(n), implicit: false }
    }
    pub fn implicit(n: &str) -> Binder {
        Binder { name: name(n), implicit: true }
    }
}

// Names never participate in equality.
impl PartialEq for Binder {
    fn eq(&self, other: &Binder) -> bool {
        self.implicit == other.implicit
    }
}
impl Eq for Binder {}

pub type Tm = Arc<Term>;

/// A binder position inside an eliminator: one or two bound names and a body.
#[derive(Clone, Debug)]
pub struct Motive {
    pub names: Vec<Name>,
    pub body: Tm,
}

// Motive names are hints as well.
impl PartialEq for Motive {
    fn eq(&self, other: &Motive) -> bool {
        self.names.len() == other.names.len() && self.body == other.body
    }
}
impl Eq for Motive {}

impl Motive {
    pub fn new(names: Vec<Name>, body: Term) -> Motive {
        Motive { names, body: Arc::new(body) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    Universe(Level),
    Pi(Binder, Tm, Tm),
    Lam(Binder, Option<Tm>, Tm),
    App(Tm, Tm, bool),
    Sigma(Binder, Tm, Tm),
    Pair(Tm, Tm),
    Fst(Tm),
    Snd(Tm),
    Id(Tm, Tm, Tm),
    Refl(Tm, Tm),
    /// Based path induction. The motive binds the endpoint and the path.
    J { motive: Motive, base: Tm, endpoint: Tm, path: Tm },
    Const(Name, Vec<Level>),
    HitType(Name, Vec<Level>, Vec<Term>),
    /// Constructor applied to the HIT parameters followed by its own arguments.
    HitCtor(Name, Name, Vec<Level>, Vec<Term>),
    HitElim { hit: Name, motive: Motive, methods: Vec<Term>, scrutinee: Tm },
    Empty,
    EmptyElim { motive: Motive, scrutinee: Tm },
    Unit,
    Star,
    UnitElim { motive: Motive, base: Tm, scrutinee: Tm },
    Sum(Tm, Tm),
    Inl(Tm),
    Inr(Tm),
    SumElim { motive: Motive, left: Tm, right: Tm, scrutinee: Tm },
    Nat,
    Zero,
    Succ(Tm),
    NatElim { motive: Motive, zero: Tm, succ: Tm, scrutinee: Tm },
    /// Elaboration-only forms.
    Ann(Tm, Tm),
    Hole,
    Meta(usize),
    Loc(Span, Tm),
}

impl Term {
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a), false)
    }

    pub fn pi(b: Binder, a: Term, body: Term) -> Term {
        Term::Pi(b, Arc::new(a), Arc::new(body))
    }

    pub fn lam(b: Binder, body: Term) -> Term {
        Term::Lam(b, None, Arc::new(body))
    }

    pub fn strip_loc(&self) -> &Term {
        let mut t = self;
        while let Term::Loc(_, inner) = t {
            t = inner;
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("de Bruijn index underflow at variable {0}")]
pub struct ScopeError(pub usize);

/// Generic traversal: rebuilds `t`, calling `f(depth, index)` for every
/// variable, where `depth` counts binders crossed inside `t`.
pub fn map_vars<E>(
    t: &Term,
    depth: usize,
    f: &mut impl FnMut(usize, usize) -> Result<Term, E>,
) -> Result<Term, E> {
    walk(t, depth, &mut |d, leaf| match leaf {
        Term::Var(i) => f(d, *i),
        other => Ok(other.clone()),
    })
}

/// Replaces solved metavariables, whose solutions live at the root of `t`.
pub fn subst_metas(t: &Term, sols: &std::collections::HashMap<usize, Term>) -> Term {
    let r: Result<Term, std::convert::Infallible> = walk(t, 0, &mut |d, leaf| match leaf {
        Term::Meta(k) => Ok(sols.get(k).map_or_else(|| leaf.clone(), |s| shift(s, 0, d as isize))),
        other => Ok(other.clone()),
    });
    r.unwrap_or_else(|e| match e {})
}

// Called on variables and metavariables with the binder depth.
type VarFn<'a, E> = dyn FnMut(usize, &Term) -> Result<Term, E> + 'a;

fn walk<E>(t: &Term, depth: usize, f: &mut VarFn<'_, E>) -> Result<Term, E> {
    let go = |t: &Tm, d: usize, f: &mut VarFn<'_, E>| walk(t, d, f).map(Arc::new);
    let motive = |m: &Motive, d: usize, f: &mut VarFn<'_, E>| {
        Ok::<Motive, E>(Motive { names: m.names.clone(), body: walk(&m.body, d + m.names.len(), f).map(Arc::new)? })
    };
    let vec = |ts: &[Term], d: usize, f: &mut VarFn<'_, E>| {
        ts.iter().map(|t| walk(t, d, f)).collect::<Result<Vec<_>, E>>()
    };
    Ok(match t {
        Term::Var(_) | Term::Meta(_) => f(depth, t)?,
        Term::Universe(l) => Term::Universe(l.clone()),
        Term::Pi(b, a, body) => Term::Pi(b.clone(), go(a, depth, f)?, go(body, depth + 1, f)?),
        Term::Lam(b, ann, body) => Term::Lam(
            b.clone(),
            match ann {
                Some(a) => Some(go(a, depth, f)?),
                None => None,
            },
            go(body, depth + 1, f)?,
        ),
        Term::App(g, a, imp) => Term::App(go(g, depth, f)?, go(a, depth, f)?, *imp),
        Term::Sigma(b, a, body) => {
            Term::Sigma(b.clone(), go(a, depth, f)?, go(body, depth + 1, f)?)
        }
        Term::Pair(a, b) => Term::Pair(go(a, depth, f)?, go(b, depth, f)?),
        Term::Fst(p) => Term::Fst(go(p, depth, f)?),
        Term::Snd(p) => Term::Snd(go(p, depth, f)?),
        Term::Id(a, x, y) => Term::Id(go(a, depth, f)?, go(x, depth, f)?, go(y, depth, f)?),
        Term::Refl(a, x) => Term::Refl(go(a, depth, f)?, go(x, depth, f)?),
        Term::J { motive: m, base, endpoint, path } => Term::J {
            motive: motive(m, depth, f)?,
            base: go(base, depth, f)?,
            endpoint: go(endpoint, depth, f)?,
            path: go(path, depth, f)?,
        },
        Term::Const(n, ls) => Term::Const(n.clone(), ls.clone()),
        Term::HitType(n, ls, args) => Term::HitType(n.clone(), ls.clone(), vec(args, depth, f)?),
        Term::HitCtor(h, c, ls, args) => {
            Term::HitCtor(h.clone(), c.clone(), ls.clone(), vec(args, depth, f)?)
        }
        Term::HitElim { hit, motive: m, methods, scrutinee } => Term::HitElim {
            hit: hit.clone(),
            motive: motive(m, depth, f)?,
            methods: vec(methods, depth, f)?,
            scrutinee: go(scrutinee, depth, f)?,
        },
        Term::Empty => Term::Empty,
        Term::EmptyElim { motive: m, scrutinee } => Term::EmptyElim {
            motive: motive(m, depth, f)?,
            scrutinee: go(scrutinee, depth, f)?,
        },
        Term::Unit => Term::Unit,
        Term::Star => Term::Star,
        Term::UnitElim { motive: m, base, scrutinee } => Term::UnitElim {
            motive: motive(m, depth, f)?,
            base: go(base, depth, f)?,
            scrutinee: go(scrutinee, depth, f)?,
        },
        Term::Sum(a, b) => Term::Sum(go(a, depth, f)?, go(b, depth, f)?),
        Term::Inl(a) => Term::Inl(go(a, depth, f)?),
        Term::Inr(a) => Term::Inr(go(a, depth, f)?),
        Term::SumElim { motive: m, left, right, scrutinee } => Term::SumElim {
            motive: motive(m, depth, f)?,
            left: go(left, depth, f)?,
            right: go(right, depth, f)?,
            scrutinee: go(scrutinee, depth, f)?,
        },
        Term::Nat => Term::Nat,
        Term::Zero => Term::Zero,
        Term::Succ(n) => Term::Succ(go(n, depth, f)?),
        Term::NatElim { motive: m, zero, succ, scrutinee } => Term::NatElim {
            motive: motive(m, depth, f)?,
            zero: go(zero, depth, f)?,
            succ: go(succ, depth, f)?,
            scrutinee: go(scrutinee, depth, f)?,
        },
        Term::Ann(a, b) => Term::Ann(go(a, depth, f)?, go(b, depth, f)?),
        Term::Hole => Term::Hole,
        Term::Loc(s, a) => Term::Loc(*s, go(a, depth, f)?),
    })
}

/// Adds `amount` to every free index at or above `cutoff`.
pub fn try_shift(t: &Term, cutoff: usize, amount: isize) -> Result<Term, ScopeError> {
    if amount == 0 {
        return Ok(t.clone());
    }
    map_vars(t, 0, &mut |d, i| {
        if i >= cutoff + d {
            let j = i as isize + amount;
            if j < (cutoff + d) as isize {
                return Err(ScopeError(i));
            }
            Ok(Term::Var(j as usize))
        } else {
            Ok(Term::Var(i))
        }
    })
}

/// Panics on underflow: that always means a kernel bug.
pub fn shift(t: &Term, cutoff: usize, amount: isize) -> Term {
    try_shift(t, cutoff, amount).unwrap_or_else(|e| panic!("internal scoping error: {e}"))
}

/// Replaces free index `index` by `replacement` and removes that binder,
/// lowering the indices above it by one.
pub fn substitute(t: &Term, index: usize, replacement: &Term) -> Term {
    map_vars(t, 0, &mut |d, i| -> Result<Term, ScopeError> {
        let k = index + d;
        Ok(if i == k {
            shift(replacement, 0, d as isize)
        } else if i > k {
            Term::Var(i - 1)
        } else {
            Term::Var(i)
        })
    })
    .expect("substitution cannot fail")
}

pub fn strip_locs(t: &Term) -> Term {
    fn go(t: &Term) -> Term {
        match t {
            Term::Loc(_, a) => go(a),
            _ => map_children(t, &mut go),
        }
    }
    go(t)
}

/// Applies `f` to each direct child term, keeping binder structure.
pub fn map_children(t: &Term, f: &mut impl FnMut(&Term) -> Term) -> Term {
    let mut g = |x: &Term| Arc::new(f(x));
    match t {
        Term::Var(_)
        | Term::Universe(_)
        | Term::Const(..)
        | Term::Empty
        | Term::Unit
        | Term::Star
        | Term::Nat
        | Term::Zero
        | Term::Hole
        | Term::Meta(_) => t.clone(),
        Term::Pi(b, a, body) => Term::Pi(b.clone(), g(a), g(body)),
        Term::Lam(b, ann, body) => Term::Lam(b.clone(), ann.as_ref().map(|a| g(a)), g(body)),
        Term::App(h, a, imp) => Term::App(g(h), g(a), *imp),
        Term::Sigma(b, a, body) => Term::Sigma(b.clone(), g(a), g(body)),
        Term::Pair(a, b) => Term::Pair(g(a), g(b)),
        Term::Fst(p) => Term::Fst(g(p)),
        Term::Snd(p) => Term::Snd(g(p)),
        Term::Id(a, x, y) => Term::Id(g(a), g(x), g(y)),
        Term::Refl(a, x) => Term::Refl(g(a), g(x)),
        Term::J { motive, base, endpoint, path } => Term::J {
            motive: Motive { names: motive.names.clone(), body: g(&motive.body) },
            base: g(base),
            endpoint: g(endpoint),
            path: g(path),
        },
        Term::HitType(n, ls, args) => {
            Term::HitType(n.clone(), ls.clone(), args.iter().map(|a| Arc::unwrap_or_clone(g(a))).collect())
        }
        Term::HitCtor(h, c, ls, args) => {
            Term::HitCtor(h.clone(), c.clone(), ls.clone(), args.iter().map(|a| Arc::unwrap_or_clone(g(a))).collect())
        }
        Term::HitElim { hit, motive, methods, scrutinee } => Term::HitElim {
            hit: hit.clone(),
            motive: Motive { names: motive.names.clone(), body: g(&motive.body) },
            methods: methods.iter().map(|a| Arc::unwrap_or_clone(g(a))).collect(),
            scrutinee: g(scrutinee),
        },
        Term::EmptyElim { motive, scrutinee } => Term::EmptyElim {
            motive: Motive { names: motive.names.clone(), body: g(&motive.body) },
            scrutinee: g(scrutinee),
        },
        Term::UnitElim { motive, base, scrutinee } => Term::UnitElim {
            motive: Motive { names: motive.names.clone(), body: g(&motive.body) },
            base: g(base),
            scrutinee: g(scrutinee),
        },
        Term::Sum(a, b) => Term::Sum(g(a), g(b)),
        Term::Inl(a) => Term::Inl(g(a)),
        Term::Inr(a) => Term::Inr(g(a)),
        Term::SumElim { motive, left, right, scrutinee } => Term::SumElim {
            motive: Motive { names: motive.names.clone(), body: g(&motive.body) },
            left: g(left),
            right: g(right),
            scrutinee: g(scrutinee),
        },
        Term::Succ(n) => Term::Succ(g(n)),
        Term::NatElim { motive, zero, succ, scrutinee } => Term::NatElim {
            motive: Motive { names: motive.names.clone(), body: g(&motive.body) },
            zero: g(zero),
            succ: g(succ),
            scrutinee: g(scrutinee),
        },
        Term::Ann(a, b) => Term::Ann(g(a), g(b)),
        Term::Loc(s, a) => Term::Loc(*s, g(a)),
    }
}

/// Structural equality up to binder names and source locations.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    strip_locs(a) == strip_locs(b)
}

/// Every variable refers to a binder within `depth` enclosing binders.
pub fn well_scoped(t: &Term, depth: usize) -> bool {
    map_vars(t, 0, &mut |d, i| if i < depth + d { Ok(Term::Var(i)) } else { Err(()) }).is_ok()
}

/// Replaces level variables by the given literals.
pub fn instantiate_levels(t: &Term, levels: &[u32]) -> Term {
    let fix = |ls: &[Level]| -> Vec<Level> {
        ls.iter()
            .map(|l| match l {
                Level::Var(i) => Level::Lit(levels[*i as usize]),
                Level::Lit(n) => Level::Lit(*n),
            })
            .collect()
    };
    fn go(t: &Term, fix: &dyn Fn(&[Level]) -> Vec<Level>) -> Term {
        match t {
            Term::Universe(l) => Term::Universe(fix(std::slice::from_ref(l)).remove(0)),
            Term::Const(n, ls) => Term::Const(n.clone(), fix(ls)),
            Term::HitType(n, ls, args) => {
                Term::HitType(n.clone(), fix(ls), args.iter().map(|a| go(a, fix)).collect())
            }
            Term::HitCtor(h, c, ls, args) => Term::HitCtor(
                h.clone(),
                c.clone(),
                fix(ls),
                args.iter().map(|a| go(a, fix)).collect(),
            ),
            _ => map_children(t, &mut |c| go(c, fix)),
        }
    }
    go(t, &fix)
}

/// Names of all constants mentioned in `t`.
pub fn constants(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Const(n, _) => {
            out.insert(n.clone());
        }
        Term::HitType(n, _, args) => {
            out.insert(n.clone());
            args.iter().for_each(|a| constants(a, out));
        }
        Term::HitCtor(h, c, _, args) => {
            out.insert(h.clone());
            out.insert(c.clone());
            args.iter().for_each(|a| constants(a, out));
        }
        Term::HitElim { hit, motive, methods, scrutinee } => {
            out.insert(hit.clone());
            constants(&motive.body, out);
            methods.iter().for_each(|a| constants(a, out));
            constants(scrutinee, out);
        }
        _ => {
            map_children(t, &mut |c| {
                constants(c, out);
                Term::Hole
            });
        }
    }
}

pub fn contains_meta(t: &Term) -> bool {
    let mut found = false;
    fn go(t: &Term, found: &mut bool) {
        if *found {
            return;
        }
        if let Term::Meta(_) = t {
            *found = true;
            return;
        }
        map_children(t, &mut |c| {
            go(c, found);
            Term::Hole
        });
    }
    go(t, &mut found);
    found
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Lit(n) => write!(f, "{n}"),
            Level::Var(i) => write!(f, "#{i}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Term {
        Term::Var(i)
    }
    fn lam(b: Term) -> Term {
        Term::lam(Binder::explicit("x"), b)
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift(&v(0), 0, 1), v(1));
        assert_eq!(shift(&lam(v(0)), 0, 1), lam(v(0)));
        assert_eq!(shift(&lam(v(1)), 0, 2), lam(v(3)));
    }

    #[test]
    fn shift_underflow_is_an_error() {
        assert!(try_shift(&v(0), 0, -1).is_err());
        assert_eq!(try_shift(&v(2), 1, -1), Ok(v(1)));
    }

    #[test]
    fn substitute_examples() {
        assert_eq!(
            substitute(&v(0), 0, &Term::Universe(Level::Lit(0))),
            Term::Universe(Level::Lit(0))
        );
        let f = Term::Const(name("f"), vec![]);
        assert_eq!(
            substitute(&lam(Term::app(v(1), v(0))), 0, &f),
            lam(Term::app(f.clone(), v(0)))
        );
        let id = lam(v(0));
        assert_eq!(substitute(&Term::app(v(0), v(0)), 0, &id), Term::app(id.clone(), id));
    }

    #[test]
    fn substitute_shifts_replacement_under_binders() {
        // (\y. x) [x := z] with z free at index 3 becomes \y. z, where z is
        // now index 4 inside the binder.
        assert_eq!(substitute(&lam(v(1)), 0, &v(3)), lam(v(4)));
        // Indices above the substituted one drop by one.
        assert_eq!(substitute(&v(2), 0, &v(7)), v(1));
    }

    #[test]
    fn alpha_equality_ignores_names_and_locations() {
        let a = Term::lam(Binder::explicit("x"), v(0));
        let b = Term::lam(Binder::explicit("y"), v(0));
        assert!(alpha_equal(&a, &b));
        assert!(!alpha_equal(&a, &v(0)));
        let sp = Span::new(0, 1, 2);
        let c = Term::Loc(sp, Arc::new(Term::lam(Binder::explicit("z"), Term::Loc(sp, Arc::new(v(0))))));
        assert!(alpha_equal(&a, &c));
        assert!(!alpha_equal(&a, &Term::lam(Binder::implicit("x"), v(0))));
        let elim = |n: &str| Term::NatElim {
            motive: Motive::new(vec![name(n)], Term::Nat),
            zero: Arc::new(Term::Zero),
            succ: Arc::new(v(0)),
            scrutinee: Arc::new(Term::Zero),
        };
        assert!(alpha_equal(&elim("k"), &elim("_")));
    }

    #[test]
    fn scoping() {
        assert!(well_scoped(&lam(v(0)), 0));
        assert!(!well_scoped(&lam(v(1)), 0));
        assert!(well_scoped(&lam(v(1)), 1));
    }

    #[test]
    fn level_instantiation() {
        let t = Term::pi(
            Binder::explicit("A"),
            Term::Universe(Level::Var(0)),
            Term::Const(name("c"), vec![Level::Var(1), Level::Lit(3)]),
        );
        let expected = Term::pi(
            Binder::explicit("A"),
            Term::Universe(Level::Lit(2)),
            Term::Const(name("c"), vec![Level::Lit(5), Level::Lit(3)]),
        );
        assert_eq!(instantiate_levels(&t, &[2, 5]), expected);
    }
}
