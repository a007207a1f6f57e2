//! Source locations and diagnostics.

use std::fmt;
use std::path::PathBuf;

/// A byte range inside one registered source file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub file: u32,
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn new(file: u32, start: u32, end: u32) -> Span {
        Span { file, start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span { file: self.file, start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

/// A resolved location with 1-based lines and columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    pub start: usize,
    pub end: usize,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    Parse,
    Scope,
    Type,
    Univ,
    HitSchema,
    LoopForm,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Parse => "E-PARSE",
            Code::Scope => "E-SCOPE",
            Code::Type => "E-TYPE",
            Code::Univ => "E-UNIV",
            Code::HitSchema => "E-HIT-SCHEMA",
            Code::LoopForm => "E-LOOPFORM",
        }
    }

    pub fn parse(s: &str) -> Option<Code> {
        Some(match s {
            "E-PARSE" => Code::Parse,
            "E-SCOPE" => Code::Scope,
            "E-TYPE" => Code::Type,
            "E-UNIV" => Code::Univ,
            "E-HIT-SCHEMA" => Code::HitSchema,
            "E-LOOPFORM" => Code::LoopForm,
            _ => return None,
        })
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An error as produced inside the checker, before locations are resolved.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct Error {
    pub code: Code,
    pub message: String,
    pub span: Span,
    pub related: Vec<Span>,
}

impl Error {
    pub fn new(code: Code, span: Span, message: impl Into<String>) -> Error {
        Error { code, message: message.into(), span, related: Vec::new() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: SourceSpan,
    pub related: Vec<SourceSpan>,
}

impl Diagnostic {
    pub fn machine(&self) -> String {
        let msg = self.message.replace(['\t', '\n'], " ");
        format!(
            "{}\t{}\t{}\t{}\t{}\n",
            self.code, self.span.file, self.span.start_line, self.span.start_col, msg
        )
    }

    pub fn human(&self) -> String {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let mut s = format!(
            "{}:{}:{}: {}[{}]: {}\n",
            self.span.file, self.span.start_line, self.span.start_col, sev, self.code, self.message
        );
        for r in &self.related {
            s.push_str(&format!("  note: see {}:{}:{}\n", r.file, r.start_line, r.start_col));
        }
        s
    }
}

#[derive(Clone)]
struct SourceFile {
    path: PathBuf,
    display: String,
    text: String,
    line_starts: Vec<usize>,
}

/// Registry of loaded sources, used to turn spans into line/column pairs.
#[derive(Clone, Default)]
pub struct SourceMap {
    files: Vec<SourceFile>,
}

impl SourceMap {
    pub fn new() -> SourceMap {
        SourceMap::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, text: impl Into<String>) -> u32 {
        let path = path.into();
        let text = text.into();
        let mut line_starts = vec![0];
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        let display = path.display().to_string();
        self.files.push(SourceFile { path, display, text, line_starts });
        (self.files.len() - 1) as u32
    }

    pub fn text(&self, file: u32) -> &str {
        &self.files[file as usize].text
    }

    pub fn path(&self, file: u32) -> &PathBuf {
        &self.files[file as usize].path
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    fn line_col(&self, file: u32, offset: usize) -> (usize, usize) {
        let f = &self.files[file as usize];
        let offset = offset.min(f.text.len());
        let line = match f.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let col = f.text[f.line_starts[line]..offset].chars().count() + 1;
        (line + 1, col)
    }

    pub fn resolve(&self, span: Span) -> SourceSpan {
        if (span.file as usize) >= self.files.len() {
            return SourceSpan {
                file: "<internal>".into(),
                start: 0,
                end: 0,
                start_line: 1,
                start_col: 1,
                end_line: 1,
                end_col: 1,
            };
        }
        let (start_line, start_col) = self.line_col(span.file, span.start as usize);
        let (end_line, end_col) = self.line_col(span.file, span.end as usize);
        SourceSpan {
            file: self.files[span.file as usize].display.clone(),
            start: span.start as usize,
            end: span.end as usize,
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn diagnostic(&self, e: &Error) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            code: e.code,
            message: e.message.clone(),
            span: self.resolve(e.span),
            related: e.related.iter().map(|s| self.resolve(*s)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_and_column() {
        let mut sm = SourceMap::new();
        let f = sm.add("a.hott", "ab\ncd\n\nef");
        let s = sm.resolve(Span::new(f, 4, 9));
        assert_eq!((s.start_line, s.start_col), (2, 2));
        assert_eq!((s.end_line, s.end_col), (4, 3));
        let s = sm.resolve(Span::new(f, 0, 0));
        assert_eq!((s.start_line, s.start_col), (1, 1));
    }

    #[test]
    fn machine_format() {
        let mut sm = SourceMap::new();
        let f = sm.add("x.hott", "def\n  y");
        let d = sm.diagnostic(&Error::new(Code::Scope, Span::new(f, 6, 7), "unknown\tname"));
        assert_eq!(d.machine(), "E-SCOPE\tx.hott\t2\t3\tunknown name\n");
    }

    #[test]
    fn code_names_round_trip() {
        for c in [Code::Parse, Code::Scope, Code::Type, Code::Univ, Code::HitSchema, Code::LoopForm] {
            assert_eq!(Code::parse(c.as_str()), Some(c));
        }
    }
}
