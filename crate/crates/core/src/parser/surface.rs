use crate::diag::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SLevel {
    Num(u32),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SName {
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub names: Vec<SName>,
    pub ty: STerm,
    pub implicit: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LamBinder {
    pub name: SName,
    pub implicit: bool,
    pub ty: Option<STerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct STerm {
    pub span: Span,
    pub kind: SKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SKind {
    Ident { name: String, levels: Option<Vec<SLevel>>, raw: bool },
    Universe(SLevel),
    Hole,
    Pi(Vec<Group>, Box<STerm>),
    Sigma(Vec<Group>, Box<STerm>),
    Arrow(Box<STerm>, Box<STerm>),
    Prod(Box<STerm>, Box<STerm>),
    Sum(Box<STerm>, Box<STerm>),
    Eq(Box<STerm>, Box<STerm>),
    Lam(Vec<LamBinder>, Box<STerm>),
    App(Box<STerm>, Box<STerm>, bool),
    Pair(Box<STerm>, Box<STerm>),
    Ann(Box<STerm>, Box<STerm>),
    Motive(Vec<SName>, Box<STerm>),
    At(Box<STerm>),
}

impl STerm {
    pub fn new(span: Span, kind: SKind) -> STerm {
        STerm { span, kind }
    }

    pub fn ident(span: Span, name: &str) -> STerm {
        STerm::new(span, SKind::Ident { name: name.to_string(), levels: None, raw: false })
    }

    pub fn app(self, arg: STerm) -> STerm {
        let span = self.span;
        STerm::new(span, SKind::App(Box::new(self), Box::new(arg), false))
    }

    pub fn app_implicit(self, arg: STerm) -> STerm {
        let span = self.span;
        STerm::new(span, SKind::App(Box::new(self), Box::new(arg), true))
    }

    /// Splits an application spine into its head and arguments.
    pub fn spine(&self) -> (&STerm, Vec<(&STerm, bool)>) {
        let mut args = Vec::new();
        let mut t = self;
        while let SKind::App(f, a, imp) = &t.kind {
            args.push((&**a, *imp));
            t = f;
        }
        args.reverse();
        (t, args)
    }

    /// Rewrites every span in the tree to `span`.
    pub fn respan(&mut self, span: Span) {
        self.span = span;
        let fix_groups = |gs: &mut Vec<Group>| {
            for g in gs {
                for n in &mut g.names {
                    n.span = span;
                }
                g.ty.respan(span);
            }
        };
        match &mut self.kind {
            SKind::Ident { .. } | SKind::Universe(_) | SKind::Hole => {}
            SKind::Pi(gs, b) | SKind::Sigma(gs, b) => {
                fix_groups(gs);
                b.respan(span);
            }
            SKind::Arrow(a, b)
            | SKind::Prod(a, b)
            | SKind::Sum(a, b)
            | SKind::Eq(a, b)
            | SKind::App(a, b, _)
            | SKind::Pair(a, b)
            | SKind::Ann(a, b) => {
                a.respan(span);
                b.respan(span);
            }
            SKind::Lam(bs, b) => {
                for x in bs {
                    x.name.span = span;
                    if let Some(t) = &mut x.ty {
                        t.respan(span);
                    }
                }
                b.respan(span);
            }
            SKind::Motive(ns, b) => {
                for n in ns {
                    n.span = span;
                }
                b.respan(span);
            }
            SKind::At(b) => b.respan(span),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtorKind {
    Point,
    Path,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SCtor {
    pub kind: CtorKind,
    pub name: SName,
    pub ty: STerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SDeclKind {
    Def { ty: STerm, body: STerm },
    Axiom { ty: STerm },
    Hit { level: Option<SLevel>, ctors: Vec<SCtor> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SDecl {
    pub name: SName,
    pub univars: Vec<SName>,
    pub params: Vec<Group>,
    pub kind: SDeclKind,
    pub span: Span,
}
