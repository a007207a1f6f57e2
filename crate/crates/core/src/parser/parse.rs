use super::lexer::{tokenize, Tok, Token};
use super::surface::*;
use crate::diag::{Code, Error, Result, Span};

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: Span,
}

pub fn parse_module(file: u32, src: &str) -> Result<Vec<SDecl>> {
    let toks = tokenize(file, src)?;
    let end = src.len() as u32;
    let mut p = Parser { toks, pos: 0, eof: Span::new(file, end, end) };
    let mut out = Vec::new();
    while !p.at_end() {
        out.push(p.decl()?);
    }
    Ok(out)
}

/// Parses a standalone term, used by tests and the round-trip suite.
pub fn parse_term(file: u32, src: &str) -> Result<STerm> {
    let toks = tokenize(file, src)?;
    let end = src.len() as u32;
    let mut p = Parser { toks, pos: 0, eof: Span::new(file, end, end) };
    let t = p.term()?;
    if !p.at_end() {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or(self.eof)
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            self.span()
        } else {
            self.toks[self.pos - 1].span
        }
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.toks.get(self.pos) {
            Some(t) => Error::new(
                Code::Parse,
                t.span,
                format!("expected {wanted}, found {}", t.tok.describe()),
            ),
            None => Error::new(Code::Parse, self.eof, format!("expected {wanted}, found end of input")),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Span> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(self.prev_span())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn ident(&mut self) -> Result<SName> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let text = s.clone();
                self.pos += 1;
                Ok(SName { text, span: self.prev_span() })
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn binder_name(&mut self) -> Result<SName> {
        if self.eat(&Tok::Underscore) {
            return Ok(SName { text: "_".into(), span: self.prev_span() });
        }
        self.ident()
    }

    fn level(&mut self) -> Result<SLevel> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(SLevel::Num(n))
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(SLevel::Name(s))
            }
            _ => Err(self.unexpected("universe level")),
        }
    }

    fn level_args(&mut self) -> Result<Option<Vec<SLevel>>> {
        if !self.eat(&Tok::LevelOpen) {
            return Ok(None);
        }
        let mut ls = Vec::new();
        while !self.eat(&Tok::RBrace) {
            ls.push(self.level()?);
        }
        Ok(Some(ls))
    }

    fn decl(&mut self) -> Result<SDecl> {
        let start = self.span();
        let which = self.peek().cloned();
        match which {
            Some(Tok::Def) | Some(Tok::Axiom) | Some(Tok::Hit) => self.pos += 1,
            _ => return Err(self.unexpected("`def`, `axiom` or `hit`")),
        }
        let name = self.ident()?;
        let mut univars = Vec::new();
        if self.eat(&Tok::LevelOpen) {
            while !self.eat(&Tok::RBrace) {
                univars.push(self.ident()?);
            }
        }
        let mut params = Vec::new();
        while matches!(self.peek(), Some(Tok::LParen) | Some(Tok::LBrace)) {
            params.push(self.group()?);
        }
        let kind = match which {
            Some(Tok::Def) => {
                self.expect(Tok::Colon)?;
                let ty = self.term()?;
                self.expect(Tok::Assign)?;
                let body = self.term()?;
                SDeclKind::Def { ty, body }
            }
            Some(Tok::Axiom) => {
                self.expect(Tok::Colon)?;
                let ty = self.term()?;
                SDeclKind::Axiom { ty }
            }
            _ => {
                let mut level = None;
                if self.eat(&Tok::Colon) {
                    self.expect(Tok::Type)?;
                    level = Some(self.level()?);
                }
                self.expect(Tok::Where)?;
                self.eat(&Tok::Bar);
                let mut ctors = vec![self.ctor()?];
                while self.eat(&Tok::Bar) {
                    ctors.push(self.ctor()?);
                }
                SDeclKind::Hit { level, ctors }
            }
        };
        Ok(SDecl { name, univars, params, kind, span: start.join(self.prev_span()) })
    }

    fn ctor(&mut self) -> Result<SCtor> {
        let kind = if self.eat(&Tok::Point) {
            CtorKind::Point
        } else if self.eat(&Tok::Path) {
            CtorKind::Path
        } else {
            return Err(self.unexpected("`point` or `path`"));
        };
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let ty = self.term()?;
        Ok(SCtor { kind, name, ty })
    }

    /// `(x y : A)` or `{x y : A}`.
    fn group(&mut self) -> Result<Group> {
        let implicit = match self.peek() {
            Some(Tok::LParen) => false,
            Some(Tok::LBrace) => true,
            _ => return Err(self.unexpected("binder group")),
        };
        self.pos += 1;
        let mut names = vec![self.binder_name()?];
        while !matches!(self.peek(), Some(Tok::Colon)) {
            names.push(self.binder_name()?);
        }
        self.expect(Tok::Colon)?;
        let ty = self.term()?;
        self.expect(if implicit { Tok::RBrace } else { Tok::RParen })?;
        Ok(Group { names, ty, implicit })
    }

    /// Tries to read a binder telescope that is immediately followed by `->`
    /// or `*`. Restores the position when the lookahead does not match.
    fn try_telescope(&mut self, allow_implicit: bool) -> Option<Vec<Group>> {
        let save = self.pos;
        let mut groups = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::LParen) => {}
                Some(Tok::LBrace) if allow_implicit => {}
                _ => break,
            }
            // A group needs a name list followed by a colon.
            let mut k = 1;
            while matches!(self.peek_at(k), Some(Tok::Ident(_)) | Some(Tok::Underscore)) {
                k += 1;
            }
            if k == 1 || self.peek_at(k) != Some(&Tok::Colon) {
                break;
            }
            match self.group() {
                Ok(g) => groups.push(g),
                Err(_) => {
                    self.pos = save;
                    return None;
                }
            }
        }
        let follows = matches!(self.peek(), Some(Tok::Arrow))
            || (matches!(self.peek(), Some(Tok::Star)) && groups.iter().all(|g| !g.implicit));
        if groups.is_empty() || !follows {
            self.pos = save;
            return None;
        }
        Some(groups)
    }

    pub fn term(&mut self) -> Result<STerm> {
        let start = self.span();
        if self.eat(&Tok::Backslash) {
            let mut binders = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Ident(_)) | Some(Tok::Underscore) => {
                        let name = self.binder_name()?;
                        binders.push(LamBinder { name, implicit: false, ty: None });
                    }
                    Some(Tok::LParen) | Some(Tok::LBrace) => {
                        let implicit = self.peek() == Some(&Tok::LBrace);
                        self.pos += 1;
                        let mut names = vec![self.binder_name()?];
                        while matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Underscore)) {
                            names.push(self.binder_name()?);
                        }
                        let ty = if self.eat(&Tok::Colon) { Some(self.term()?) } else { None };
                        self.expect(if implicit { Tok::RBrace } else { Tok::RParen })?;
                        for name in names {
                            binders.push(LamBinder { name, implicit, ty: ty.clone() });
                        }
                    }
                    _ => break,
                }
            }
            if binders.is_empty() {
                return Err(self.unexpected("lambda binder"));
            }
            self.expect(Tok::Dot)?;
            let body = self.term()?;
            let span = start.join(body.span);
            return Ok(STerm::new(span, SKind::Lam(binders, Box::new(body))));
        }
        if let Some(groups) = self.try_telescope(true) {
            if self.eat(&Tok::Arrow) {
                let body = self.term()?;
                let span = start.join(body.span);
                return Ok(STerm::new(span, SKind::Pi(groups, Box::new(body))));
            }
            self.expect(Tok::Star)?;
            let rhs = self.sigma()?;
            let span = start.join(rhs.span);
            let lhs = STerm::new(span, SKind::Sigma(groups, Box::new(rhs)));
            return self.arrow_tail(lhs);
        }
        let lhs = self.sigma()?;
        self.arrow_tail(lhs)
    }

    fn arrow_tail(&mut self, lhs: STerm) -> Result<STerm> {
        if self.eat(&Tok::Arrow) {
            let rhs = self.term()?;
            let span = lhs.span.join(rhs.span);
            return Ok(STerm::new(span, SKind::Arrow(Box::new(lhs), Box::new(rhs))));
        }
        Ok(lhs)
    }

    fn sigma(&mut self) -> Result<STerm> {
        let start = self.span();
        if let Some(groups) = self.try_telescope(false) {
            self.expect(Tok::Star)?;
            let rhs = self.sigma()?;
            let span = start.join(rhs.span);
            return Ok(STerm::new(span, SKind::Sigma(groups, Box::new(rhs))));
        }
        let lhs = self.equality()?;
        if self.eat(&Tok::Star) {
            let rhs = self.sigma()?;
            let span = lhs.span.join(rhs.span);
            return Ok(STerm::new(span, SKind::Prod(Box::new(lhs), Box::new(rhs))));
        }
        Ok(lhs)
    }

    fn equality(&mut self) -> Result<STerm> {
        let lhs = self.sum()?;
        if self.eat(&Tok::Eq) {
            let rhs = self.sum()?;
            let span = lhs.span.join(rhs.span);
            return Ok(STerm::new(span, SKind::Eq(Box::new(lhs), Box::new(rhs))));
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<STerm> {
        let lhs = self.app()?;
        if self.eat(&Tok::Plus) {
            let rhs = self.sum()?;
            let span = lhs.span.join(rhs.span);
            return Ok(STerm::new(span, SKind::Sum(Box::new(lhs), Box::new(rhs))));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_))
                | Some(Tok::Type)
                | Some(Tok::Underscore)
                | Some(Tok::LParen)
                | Some(Tok::LBracket)
                | Some(Tok::Percent)
                | Some(Tok::At)
        )
    }

    fn app(&mut self) -> Result<STerm> {
        let mut head = self.atom()?;
        loop {
            if self.peek() == Some(&Tok::LBrace) {
                self.pos += 1;
                let arg = self.term()?;
                self.expect(Tok::RBrace)?;
                let span = head.span.join(self.prev_span());
                head = STerm::new(span, SKind::App(Box::new(head), Box::new(arg), true));
            } else if self.peek() == Some(&Tok::Backslash) {
                let arg = self.term()?;
                let span = head.span.join(arg.span);
                head = STerm::new(span, SKind::App(Box::new(head), Box::new(arg), false));
                return Ok(head);
            } else if self.starts_atom() {
                let arg = self.atom()?;
                let span = head.span.join(arg.span);
                head = STerm::new(span, SKind::App(Box::new(head), Box::new(arg), false));
            } else {
                return Ok(head);
            }
        }
    }

    fn atom(&mut self) -> Result<STerm> {
        let start = self.span();
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let levels = self.level_args()?;
                Ok(STerm::new(start.join(self.prev_span()), SKind::Ident { name, levels, raw: false }))
            }
            Some(Tok::Percent) => {
                self.pos += 1;
                let n = self.ident()?;
                let levels = self.level_args()?;
                Ok(STerm::new(
                    start.join(self.prev_span()),
                    SKind::Ident { name: n.text, levels, raw: true },
                ))
            }
            Some(Tok::At) => {
                self.pos += 1;
                let inner = self.atom()?;
                Ok(STerm::new(start.join(inner.span), SKind::At(Box::new(inner))))
            }
            Some(Tok::Type) => {
                self.pos += 1;
                let l = self.level()?;
                Ok(STerm::new(start.join(self.prev_span()), SKind::Universe(l)))
            }
            Some(Tok::Underscore) => {
                self.pos += 1;
                Ok(STerm::new(start, SKind::Hole))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let mut names = vec![self.binder_name()?];
                while !self.eat(&Tok::Dot) {
                    names.push(self.binder_name()?);
                }
                let body = self.term()?;
                self.expect(Tok::RBracket)?;
                Ok(STerm::new(start.join(self.prev_span()), SKind::Motive(names, Box::new(body))))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let first = self.term()?;
                if self.eat(&Tok::Colon) {
                    let ty = self.term()?;
                    self.expect(Tok::RParen)?;
                    return Ok(STerm::new(
                        start.join(self.prev_span()),
                        SKind::Ann(Box::new(first), Box::new(ty)),
                    ));
                }
                let mut items = vec![first];
                while self.eat(&Tok::Comma) {
                    items.push(self.term()?);
                }
                self.expect(Tok::RParen)?;
                let span = start.join(self.prev_span());
                let mut acc = items.pop().expect("nonempty");
                while let Some(prev) = items.pop() {
                    acc = STerm::new(span, SKind::Pair(Box::new(prev), Box::new(acc)));
                }
                if let SKind::Pair(..) = acc.kind {
                    acc.span = span;
                }
                Ok(acc)
            }
            _ => Err(self.unexpected("term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(src: &str) -> SKind {
        parse_term(0, src).unwrap().kind
    }

    #[test]
    fn definition_with_pi_and_lambda() {
        let ds = parse_module(0, "def idfun : (A : Type 0) -> A -> A := \\A. \\a. a").unwrap();
        assert_eq!(ds.len(), 1);
        match &ds[0].kind {
            SDeclKind::Def { ty, body } => {
                assert!(matches!(ty.kind, SKind::Pi(..)));
                assert!(matches!(body.kind, SKind::Lam(..)));
            }
            _ => panic!("expected a definition"),
        }
    }

    #[test]
    fn axiom_declaration() {
        let src = "axiom funext {A : Type 0} {B : A -> Type 0} {f g : (x : A) -> B x} : ((x : A) -> f x = g x) -> f = g";
        let ds = parse_module(0, src).unwrap();
        assert!(matches!(ds[0].kind, SDeclKind::Axiom { .. }));
        assert_eq!(ds[0].params.len(), 3);
    }

    #[test]
    fn unclosed_paren_is_a_parse_error() {
        let e = parse_module(0, "def p := (a,").unwrap_err();
        assert_eq!(e.code, Code::Parse);
    }

    #[test]
    fn ascription_versus_telescope() {
        assert!(matches!(kind("(f : A) x"), SKind::App(..)));
        assert!(matches!(kind("(x : A) -> B"), SKind::Pi(..)));
        assert!(matches!(kind("(x : A) (y : B) -> C"), SKind::Pi(ref g, _) if g.len() == 2));
        assert!(matches!(kind("(x : A) * B"), SKind::Sigma(..)));
        assert!(matches!(kind("{x : A} -> B"), SKind::Pi(ref g, _) if g[0].implicit));
    }

    #[test]
    fn precedence() {
        // application binds tighter than `=`, `=` tighter than `*`, `*` tighter than `->`
        match kind("f a = b * C -> D") {
            SKind::Arrow(l, _) => match l.kind {
                SKind::Prod(e, _) => assert!(matches!(e.kind, SKind::Eq(..))),
                k => panic!("{k:?}"),
            },
            k => panic!("{k:?}"),
        }
        match kind("A -> B -> C") {
            SKind::Arrow(_, r) => assert!(matches!(r.kind, SKind::Arrow(..))),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn tuples_nest_right() {
        match kind("(a, b, c)") {
            SKind::Pair(_, r) => assert!(matches!(r.kind, SKind::Pair(..))),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn hit_declaration() {
        let src = "hit Circle where\n  | point base : Circle\n  | path loop : base = base\n";
        let ds = parse_module(0, src).unwrap();
        match &ds[0].kind {
            SDeclKind::Hit { ctors, level } => {
                assert_eq!(ctors.len(), 2);
                assert!(level.is_none());
                assert_eq!(ctors[1].kind, CtorKind::Path);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn implicit_arguments_and_motives() {
        let t = parse_term(0, "J [y p. Id A x y] (refl {A} x) y q").unwrap();
        let (head, args) = t.spine();
        assert!(matches!(&head.kind, SKind::Ident { name, .. } if name == "J"));
        assert_eq!(args.len(), 4);
        assert!(matches!(args[0].0.kind, SKind::Motive(ref ns, _) if ns.len() == 2));
        let t = parse_term(0, "refl {A} x").unwrap();
        let (_, args) = t.spine();
        assert!(args[0].1 && !args[1].1);
    }

    #[test]
    fn parsing_is_deterministic() {
        let src = "def f.{u} {A : Type u} (x : A) : A := (\\y. y) x";
        assert_eq!(parse_module(0, src).unwrap(), parse_module(0, src).unwrap());
    }
}
