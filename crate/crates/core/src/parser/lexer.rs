use crate::diag::{Code, Error, Result, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u32),
    Def,
    Axiom,
    Hit,
    Where,
    Point,
    Path,
    Type,
    Assign,
    Colon,
    Arrow,
    Star,
    Plus,
    Eq,
    Backslash,
    Dot,
    LevelOpen,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Underscore,
    Percent,
    At,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Def => "`def`".into(),
            Tok::Axiom => "`axiom`".into(),
            Tok::Hit => "`hit`".into(),
            Tok::Where => "`where`".into(),
            Tok::Point => "`point`".into(),
            Tok::Path => "`path`".into(),
            Tok::Type => "`Type`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Star => "`*`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Backslash => "`\\`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LevelOpen => "`.{`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Underscore => "`_`".into(),
            Tok::Percent => "`%`".into(),
            Tok::At => "`@`".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub const KEYWORDS: &[&str] = &["def", "axiom", "hit", "where", "point", "path", "Type"];

fn ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' || c == b'-'
}

pub fn is_ident_text(s: &str) -> bool {
    let b = s.as_bytes();
    !b.is_empty()
        && ident_start(b[0])
        && s != "_"
        && b.iter().all(|c| ident_char(*c))
        && !s.contains("->")
        && !s.contains("--")
        && !s.ends_with('-')
        && !KEYWORDS.contains(&s)
}

pub fn tokenize(file: u32, src: &str) -> Result<Vec<Token>> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let sp = |s: usize, e: usize| Span::new(file, s as u32, e as u32);
    while i < b.len() {
        let c = b[i];
        if c == b' ' || c == b'\t' || c == b'\n' || c == b'\r' {
            i += 1;
            continue;
        }
        if c == b'-' && b.get(i + 1) == Some(&b'-') {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'{' && b.get(i + 1) == Some(&b'-') {
            let start = i;
            let mut depth = 0usize;
            loop {
                if i >= b.len() {
                    return Err(Error::new(Code::Parse, sp(start, start + 2), "unterminated block comment"));
                }
                if b[i] == b'{' && b.get(i + 1) == Some(&b'-') {
                    depth += 1;
                    i += 2;
                } else if b[i] == b'-' && b.get(i + 1) == Some(&b'}') {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    i += 1;
                }
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let n: u32 = src[start..i]
                .parse()
                .map_err(|_| Error::new(Code::Parse, sp(start, i), "number literal too large"))?;
            out.push(Token { tok: Tok::Num(n), span: sp(start, i) });
            continue;
        }
        if ident_start(c) {
            i += 1;
            while i < b.len() && ident_char(b[i]) {
                if b[i] == b'-' && matches!(b.get(i + 1), Some(b'>') | Some(b'-') | None) {
                    break;
                }
                if b[i] == b'-' && !b.get(i + 1).is_some_and(|c| ident_char(*c)) {
                    break;
                }
                i += 1;
            }
            let text = &src[start..i];
            let tok = match text {
                "_" => Tok::Underscore,
                "def" => Tok::Def,
                "axiom" => Tok::Axiom,
                "hit" => Tok::Hit,
                "where" => Tok::Where,
                "point" => Tok::Point,
                "path" => Tok::Path,
                "Type" => Tok::Type,
                _ => Tok::Ident(text.to_string()),
            };
            out.push(Token { tok, span: sp(start, i) });
            if i < b.len() && b[i] == b'.' && b.get(i + 1) == Some(&b'{') {
                out.push(Token { tok: Tok::LevelOpen, span: sp(i, i + 2) });
                i += 2;
            }
            continue;
        }
        let (tok, len) = match c {
            b':' if b.get(i + 1) == Some(&b'=') => (Tok::Assign, 2),
            b':' => (Tok::Colon, 1),
            b'-' if b.get(i + 1) == Some(&b'>') => (Tok::Arrow, 2),
            b'*' => (Tok::Star, 1),
            b'+' => (Tok::Plus, 1),
            b'=' => (Tok::Eq, 1),
            b'\\' => (Tok::Backslash, 1),
            b'.' => (Tok::Dot, 1),
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'{' => (Tok::LBrace, 1),
            b'}' => (Tok::RBrace, 1),
            b'[' => (Tok::LBracket, 1),
            b']' => (Tok::RBracket, 1),
            b',' => (Tok::Comma, 1),
            b'|' => (Tok::Bar, 1),
            b'%' => (Tok::Percent, 1),
            b'@' => (Tok::At, 1),
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(Error::new(
                    Code::Parse,
                    sp(i, i + ch.len_utf8()),
                    format!("illegal character `{ch}`"),
                ));
            }
        };
        out.push(Token { tok, span: sp(start, start + len) });
        i += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(0, s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn simple_definition() {
        assert_eq!(
            toks("def x := y"),
            vec![Tok::Def, Tok::Ident("x".into()), Tok::Assign, Tok::Ident("y".into())]
        );
    }

    #[test]
    fn nested_comments() {
        assert_eq!(toks("{- {- -} -} def"), vec![Tok::Def]);
        assert_eq!(toks("-- hello\ndef -- trailing"), vec![Tok::Def]);
    }

    #[test]
    fn unicode_is_rejected_at_its_offset() {
        let e = tokenize(0, "λ").unwrap_err();
        assert_eq!(e.code, Code::Parse);
        assert_eq!(e.span.start, 0);
    }

    #[test]
    fn unterminated_comment() {
        let e = tokenize(0, "def {- oops").unwrap_err();
        assert_eq!(e.code, Code::Parse);
        assert_eq!(e.span.start, 4);
    }

    #[test]
    fn dashes_and_arrows() {
        assert_eq!(
            toks("a-b->c"),
            vec![Tok::Ident("a-b".into()), Tok::Arrow, Tok::Ident("c".into())]
        );
        assert_eq!(toks("x--c"), vec![Tok::Ident("x".into())]);
        assert_eq!(toks("ind-nat"), vec![Tok::Ident("ind-nat".into())]);
    }

    #[test]
    fn levels_and_dots() {
        assert_eq!(
            toks("ua.{1} \\x. x"),
            vec![
                Tok::Ident("ua".into()),
                Tok::LevelOpen,
                Tok::Num(1),
                Tok::RBrace,
                Tok::Backslash,
                Tok::Ident("x".into()),
                Tok::Dot,
                Tok::Ident("x".into())
            ]
        );
    }

    #[test]
    fn ident_text_predicate() {
        assert!(is_ident_text("loop-neq-refl"));
        assert!(is_ident_text("x'"));
        assert!(!is_ident_text("def"));
        assert!(!is_ident_text("a->b"));
        assert!(!is_ident_text("_"));
        assert!(!is_ident_text("1a"));
    }
}
