//! Semantic domain. Variables are de Bruijn levels.

use std::sync::Arc;

use crate::syntax::{Binder, Name, Tm};

pub type V = Arc<Val>;
pub type Env = Vec<V>;

#[derive(Clone, Debug)]
pub enum Clo {
    /// A term body under its captured environment.
    Env { env: Arc<Env>, body: Tm },
    /// The induction hypothesis attached to a function-typed recursive
    /// constructor argument: `\b. elim (fun b)`.
    HitIh { hit: Name, name: Name, motive: Box<Clo>, methods: Arc<Vec<V>>, fun: V },
}

impl Clo {
    pub fn new(env: &Env, body: &Tm) -> Clo {
        Clo::Env { env: Arc::new(env.clone()), body: body.clone() }
    }
}

#[derive(Clone, Debug)]
pub enum Head {
    Var(usize),
    /// An axiom, or a definition that the current evaluation keeps folded.
    Const(Name, Vec<u32>),
    /// A path constructor applied to the HIT parameters and its arguments.
    PathCtor { hit: Name, ctor: Name, levels: Vec<u32>, args: Vec<V> },
    Meta(usize),
}

#[derive(Clone, Debug)]
pub enum Elim {
    App(V, bool),
    Fst,
    Snd,
    J { names: Vec<Name>, motive: Clo, base: V, endpoint: V },
    EmptyElim { name: Name, motive: Clo },
    UnitElim { name: Name, motive: Clo, base: V },
    SumElim { name: Name, motive: Clo, left: V, right: V },
    NatElim { name: Name, motive: Clo, zero: V, succ: V },
    HitElim { hit: Name, name: Name, motive: Clo, methods: Arc<Vec<V>> },
}

#[derive(Clone, Debug)]
pub enum Val {
    Univ(u32),
    Pi(Binder, V, Clo),
    Lam(Binder, Clo),
    Sigma(Binder, V, Clo),
    Pair(V, V),
    Id(V, V, V),
    Refl(V, V),
    Empty,
    Unit,
    Star,
    Sum(V, V),
    Inl(V),
    Inr(V),
    Nat,
    Zero,
    Succ(V),
    HitType(Name, Vec<u32>, Vec<V>),
    HitCtor { hit: Name, ctor: Name, index: usize, levels: Vec<u32>, params: Vec<V>, args: Vec<V> },
    Neu(Head, Vec<Elim>),
}

impl Val {
    pub fn var(level: usize) -> V {
        Arc::new(Val::Neu(Head::Var(level), Vec::new()))
    }

    pub fn meta(k: usize) -> V {
        Arc::new(Val::Neu(Head::Meta(k), Vec::new()))
    }
}
