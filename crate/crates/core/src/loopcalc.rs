//! Winding numbers of closed loops on the circle.
//!
//! The kernel cannot compute `encode` because `ua` is opaque, so the
//! winding number is read off the loop's syntax instead: the term is
//! evaluated with `concat` and `inv` kept folded, the result is recognized
//! as a word in `loop`, and the word's exponent sum is taken.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::diag::{Code, Error, Result, Span};
use crate::kernel::elab::{Ctx, Elab};
use crate::kernel::nbe::Ev;
use crate::kernel::value::{Elim, Head, Val, V};
use crate::kernel::Globals;
use crate::parser::print::print;
use crate::syntax::{Name, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoopWord {
    Refl,
    Loop,
    Inverse(Box<LoopWord>),
    Concat(Box<LoopWord>, Box<LoopWord>),
}

impl LoopWord {
    pub fn inv(w: LoopWord) -> LoopWord {
        LoopWord::Inverse(Box::new(w))
    }

    pub fn concat(a: LoopWord, b: LoopWord) -> LoopWord {
        LoopWord::Concat(Box::new(a), Box::new(b))
    }

    pub fn depth(&self) -> usize {
        match self {
            LoopWord::Refl | LoopWord::Loop => 0,
            LoopWord::Inverse(w) => 1 + w.depth(),
            LoopWord::Concat(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Surface syntax for the word, using the prelude's path operations.
    pub fn source(&self, base: &str, lp: &str) -> String {
        match self {
            LoopWord::Refl => format!("refl {base}"),
            LoopWord::Loop => lp.to_string(),
            LoopWord::Inverse(w) => format!("inv.{{0}} ({})", w.source(base, lp)),
            LoopWord::Concat(a, b) => format!("concat.{{0}} ({}) ({})", a.source(base, lp), b.source(base, lp)),
        }
    }
}

impl fmt::Display for LoopWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source("base", "loop"))
    }
}

/// The exponent-sum homomorphism.
pub fn winding(w: &LoopWord) -> i64 {
    match w {
        LoopWord::Refl => 0,
        LoopWord::Loop => 1,
        LoopWord::Inverse(a) => -winding(a),
        LoopWord::Concat(a, b) => winding(a) + winding(b),
    }
}

/// `loop^c`, as a right-nested concatenation of `loop` or `inv loop`.
pub fn power(c: i64) -> LoopWord {
    let unit = if c < 0 { LoopWord::inv(LoopWord::Loop) } else { LoopWord::Loop };
    let n = c.unsigned_abs();
    if n == 0 {
        return LoopWord::Refl;
    }
    let mut w = unit.clone();
    for _ in 1..n {
        w = LoopWord::concat(unit.clone(), w);
    }
    w
}

/// A HIT shaped like the circle: no parameters, one point constructor
/// without arguments, one path constructor from it to itself.
#[derive(Clone, Debug)]
pub struct CircleShape {
    pub hit: Name,
    pub base: Name,
    pub lp: Name,
}

pub fn circle_shape(g: &Globals, hit: &str) -> Option<CircleShape> {
    let sig = g.hit_sig(hit)?;
    if sig.nparams != 0 || sig.points.len() != 1 || sig.paths.len() != 1 {
        return None;
    }
    if !sig.points[0].kinds.is_empty() || sig.paths[0].nargs != 0 {
        return None;
    }
    Some(CircleShape { hit: sig.name.clone(), base: sig.points[0].name.clone(), lp: sig.paths[0].name.clone() })
}

struct Recognizer<'g> {
    ev: Ev<'g>,
    circle: CircleShape,
    concat: Name,
    inv: Name,
    span: Span,
}

impl Recognizer<'_> {
    fn is_base(&self, v: &V) -> bool {
        matches!(&**v, Val::HitCtor { ctor, .. } if *ctor == self.circle.base)
    }

    fn is_circle(&self, v: &V) -> bool {
        matches!(&**v, Val::HitType(h, _, _) if *h == self.circle.hit)
    }

    fn reject(&self, v: &V) -> Error {
        let t = self.ev.quote(0, v);
        Error::new(
            Code::LoopForm,
            self.span,
            format!("`{}` is not built from `{}`, `refl`, `concat` and `inv`", print(&t), self.circle.lp),
        )
    }

    fn args<'a>(&self, spine: &'a [Elim], n: usize) -> Option<Vec<&'a V>> {
        if spine.len() != n {
            return None;
        }
        spine
            .iter()
            .map(|e| match e {
                Elim::App(a, _) => Some(a),
                _ => None,
            })
            .collect()
    }

    fn word(&self, v: &V) -> Result<LoopWord> {
        match &**v {
            Val::Refl(a, x) if self.is_circle(a) && self.is_base(x) => Ok(LoopWord::Refl),
            Val::Neu(Head::PathCtor { ctor, .. }, sp) if *ctor == self.circle.lp && sp.is_empty() => {
                Ok(LoopWord::Loop)
            }
            Val::Neu(Head::Const(c, _), sp) if *c == self.concat => {
                let a = self.args(sp, 6).ok_or_else(|| self.reject(v))?;
                if !(self.is_circle(a[0]) && a[1..4].iter().all(|x| self.is_base(x))) {
                    return Err(self.reject(v));
                }
                Ok(LoopWord::concat(self.word(a[4])?, self.word(a[5])?))
            }
            Val::Neu(Head::Const(c, _), sp) if *c == self.inv => {
                let a = self.args(sp, 4).ok_or_else(|| self.reject(v))?;
                if !(self.is_circle(a[0]) && self.is_base(a[1]) && self.is_base(a[2])) {
                    return Err(self.reject(v));
                }
                Ok(LoopWord::inv(self.word(a[3])?))
            }
            _ => Err(self.reject(v)),
        }
    }
}

/// Recognizes a closed elaborated term of type `base = base` on a circle
/// as a loop word.
pub fn recognize(g: &Globals, t: &Term, span: Span) -> Result<LoopWord> {
    let mut el = Elab::new(g);
    let (t, ty) = el.infer(&Ctx::new(), t, span)?;
    let circle = match &*ty {
        Val::Id(a, x, y) => match &**a {
            Val::HitType(h, _, _) => circle_shape(g, h).filter(|c| {
                let base = |v: &V| matches!(&**v, Val::HitCtor { ctor, .. } if *ctor == c.base);
                base(x) && base(y)
            }),
            _ => None,
        },
        _ => None,
    };
    let Some(circle) = circle else {
        return Err(Error::new(
            Code::Type,
            span,
            format!("expected a loop at the base point of a circle, found a term of type `{}`", el.show(&Ctx::new(), &ty)),
        ));
    };
    let (Some(concat), Some(inv)) = (g.role_name(g.roles.concat), g.role_name(g.roles.inv)) else {
        return Err(Error::new(Code::LoopForm, span, "`concat` and `inv` are not defined"));
    };
    let fold: HashSet<Name> = [concat.clone(), inv.clone()].into_iter().collect();
    let ev = Ev::folding(g, &fold);
    let v = ev.eval(&Vec::new(), &t);
    Recognizer { ev, circle, concat, inv, span }.word(&v)
}

/// The winding number of a checked declaration.
pub fn winding_of(g: &Globals, decl: &str, span: Span) -> Result<i64> {
    let d = g
        .decl(decl)
        .ok_or_else(|| Error::new(Code::Scope, span, format!("unknown declaration `{decl}`")))?;
    if d.nlevels() != 0 {
        return Err(Error::new(Code::Univ, span, format!("`{decl}` is universe polymorphic")));
    }
    let w = recognize(g, &Term::Const(d.name.clone(), Vec::new()), span)?;
    Ok(winding(&w))
}

/// Independent oracle: flattens the word into a sequence of generators
/// with signs, without recursion, and sums it.
pub fn oracle_exponent_sum(w: &LoopWord) -> i64 {
    let mut stack: Vec<(&LoopWord, bool)> = vec![(w, false)];
    let mut letters: Vec<i8> = Vec::new();
    while let Some((w, flipped)) = stack.pop() {
        match w {
            LoopWord::Refl => {}
            LoopWord::Loop => letters.push(if flipped { -1 } else { 1 }),
            LoopWord::Inverse(a) => stack.push((a, !flipped)),
            LoopWord::Concat(a, b) => {
                stack.push((b, flipped));
                stack.push((a, flipped));
            }
        }
    }
    letters.iter().map(|x| i64::from(*x)).sum()
}

/// Wraps a word into a term the elaborator can check, given the resolved
/// names of the circle.
pub fn word_term(w: &LoopWord, c: &CircleShape, concat: &Name, inv: &Name) -> Term {
    let base = Term::Const(c.base.clone(), Vec::new());
    let konst = |n: &Name| Term::Const(n.clone(), vec![crate::syntax::Level::Lit(0)]);
    match w {
        LoopWord::Refl => Term::Refl(Arc::new(Term::Hole), Arc::new(base)),
        LoopWord::Loop => Term::Const(c.lp.clone(), Vec::new()),
        LoopWord::Inverse(a) => Term::app(konst(inv), word_term(a, c, concat, inv)),
        LoopWord::Concat(a, b) => {
            Term::app(Term::app(konst(concat), word_term(a, c, concat, inv)), word_term(b, c, concat, inv))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_examples() {
        assert_eq!(winding(&LoopWord::Refl), 0);
        let l3 = LoopWord::concat(LoopWord::concat(LoopWord::Loop, LoopWord::Loop), LoopWord::Loop);
        assert_eq!(winding(&l3), 3);
        assert_eq!(winding(&LoopWord::concat(LoopWord::Loop, LoopWord::inv(LoopWord::Loop))), 0);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_exponent_sum(&LoopWord::Refl), 0);
        assert_eq!(oracle_exponent_sum(&LoopWord::inv(LoopWord::inv(LoopWord::Loop))), 1);
    }

    #[test]
    fn powers() {
        for c in -20..=20 {
            assert_eq!(winding(&power(c)), c);
            assert_eq!(oracle_exponent_sum(&power(c)), c);
        }
    }
}
