//! Reader and canonical printer for the parenthesized list notation used by
//! lexicon and frame files.
//!
//! The reader is iterative, tracks byte spans for every form and refuses
//! input nested deeper than [`MAX_DEPTH`]. Symbols and keywords are folded to
//! lowercase on read; `;` starts a comment that runs to the end of the line.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Deepest list nesting the reader accepts.
pub const MAX_DEPTH: usize = 64;

/// Half-open byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    /// 1-based line and column of `start` in `source`.
    pub fn line_col(&self, source: &str) -> (usize, usize) {
        let upto = &source[..self.start.min(source.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rfind('\n').map_or(upto.chars().count(), |nl| {
            upto[nl + 1..].chars().count()
        }) + 1;
        (line, col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExprKind {
    Symbol(String),
    /// Keyword text, including the leading colon.
    Keyword(String),
    Str(String),
    Integer(i64),
    List(Vec<SExpr>),
}

/// One form together with the span it was read from.
///
/// Equality ignores spans: two forms are equal when their trees are.
#[derive(Debug, Clone)]
pub struct SExpr {
    pub kind: SExprKind,
    pub span: Span,
}

impl PartialEq for SExpr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for SExpr {}

impl SExpr {
    fn spanless(kind: SExprKind) -> Self {
        SExpr {
            kind,
            span: Span::default(),
        }
    }

    /// Builds a symbol, folding it to lowercase.
    pub fn symbol(text: impl AsRef<str>) -> Self {
        Self::spanless(SExprKind::Symbol(text.as_ref().to_lowercase()))
    }

    /// Builds a keyword; a missing leading colon is added.
    pub fn keyword(text: impl AsRef<str>) -> Self {
        let text = text.as_ref().to_lowercase();
        let text = if text.starts_with(':') {
            text
        } else {
            format!(":{text}")
        };
        Self::spanless(SExprKind::Keyword(text))
    }

    pub fn string(text: impl Into<String>) -> Self {
        Self::spanless(SExprKind::Str(text.into()))
    }

    pub fn integer(value: i64) -> Self {
        Self::spanless(SExprKind::Integer(value))
    }

    pub fn list(items: Vec<SExpr>) -> Self {
        Self::spanless(SExprKind::List(items))
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match &self.kind {
            SExprKind::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_keyword(&self) -> Option<&str> {
        match &self.kind {
            SExprKind::Keyword(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match &self.kind {
            SExprKind::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self.kind {
            SExprKind::Integer(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match &self.kind {
            SExprKind::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn is_empty_list(&self) -> bool {
        matches!(&self.kind, SExprKind::List(items) if items.is_empty())
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sexpr(f, self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unbalanced parenthesis at bytes {}..{}", .0.start, .0.end)]
    UnbalancedParen(Span),
    #[error("unterminated string starting at byte {}", .0.start)]
    UnterminatedString(Span),
    #[error("illegal token at bytes {}..{}", .0.start, .0.end)]
    IllegalToken(Span),
    #[error("lists nested deeper than {MAX_DEPTH} levels at byte {}", .0.start)]
    TooDeep(Span),
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::UnbalancedParen(s)
            | ParseError::UnterminatedString(s)
            | ParseError::IllegalToken(s)
            | ParseError::TooDeep(s) => *s,
        }
    }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';')
}

/// Reads every top-level form in `text`.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, ParseError> {
    Reader::new(text).read_all()
}

/// Reads exactly one form; trailing forms are an error.
pub fn parse_one(text: &str) -> Result<SExpr, ParseError> {
    let mut forms = parse_sexprs(text)?;
    match forms.len() {
        1 => Ok(forms.pop().unwrap()),
        0 => Err(ParseError::IllegalToken(Span::new(0, text.len()))),
        _ => Err(ParseError::IllegalToken(forms[1].span)),
    }
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { src, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read_all(mut self) -> Result<Vec<SExpr>, ParseError> {
        // Each frame holds the open-paren offset and the items read so far.
        let mut stack: Vec<(usize, Vec<SExpr>)> = Vec::new();
        let mut top = Vec::new();
        loop {
            self.skip_trivia();
            let start = self.pos;
            let Some(c) = self.peek() else {
                return match stack.last() {
                    Some(&(open, _)) => Err(ParseError::UnbalancedParen(Span::new(open, open + 1))),
                    None => Ok(top),
                };
            };
            let form = match c {
                '(' => {
                    self.bump();
                    if stack.len() >= MAX_DEPTH {
                        return Err(ParseError::TooDeep(Span::new(start, self.pos)));
                    }
                    stack.push((start, Vec::new()));
                    continue;
                }
                ')' => {
                    self.bump();
                    let Some((open, items)) = stack.pop() else {
                        return Err(ParseError::UnbalancedParen(Span::new(start, self.pos)));
                    };
                    SExpr {
                        kind: SExprKind::List(items),
                        span: Span::new(open, self.pos),
                    }
                }
                '"' => self.read_string()?,
                _ => self.read_atom()?,
            };
            match stack.last_mut() {
                Some((_, items)) => items.push(form),
                None => top.push(form),
            }
        }
    }

    fn read_string(&mut self) -> Result<SExpr, ParseError> {
        let start = self.pos;
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(ParseError::UnterminatedString(Span::new(start, self.pos))),
                Some('"') => break,
                Some('\\') => match self.bump() {
                    None => {
                        return Err(ParseError::UnterminatedString(Span::new(start, self.pos)))
                    }
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some(other) => out.push(other),
                },
                Some(c) => out.push(c),
            }
        }
        Ok(SExpr {
            kind: SExprKind::Str(out),
            span: Span::new(start, self.pos),
        })
    }

    fn read_atom(&mut self) -> Result<SExpr, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if is_delimiter(c) {
                break;
            }
            self.bump();
        }
        let span = Span::new(start, self.pos);
        let raw = &self.src[start..self.pos];
        if raw.chars().any(char::is_control) {
            return Err(ParseError::IllegalToken(span));
        }
        let kind = if let Some(rest) = raw.strip_prefix(':') {
            if rest.is_empty() {
                return Err(ParseError::IllegalToken(span));
            }
            SExprKind::Keyword(raw.to_lowercase())
        } else if raw.bytes().all(|b| b.is_ascii_digit()) {
            match raw.parse::<i64>() {
                Ok(v) => SExprKind::Integer(v),
                Err(_) => return Err(ParseError::IllegalToken(span)),
            }
        } else {
            SExprKind::Symbol(raw.to_lowercase())
        };
        Ok(SExpr { kind, span })
    }
}

/// Prints `form` in canonical single-line form.
pub fn print_sexpr(form: &SExpr) -> String {
    form.to_string()
}

fn write_sexpr(out: &mut impl fmt::Write, form: &SExpr) -> fmt::Result {
    match &form.kind {
        SExprKind::Symbol(s) => out.write_str(&s.to_lowercase()),
        SExprKind::Keyword(k) => out.write_str(&k.to_lowercase()),
        SExprKind::Integer(i) => write!(out, "{i}"),
        SExprKind::Str(s) => {
            out.write_char('"')?;
            for c in s.chars() {
                if matches!(c, '"' | '\\') {
                    out.write_char('\\')?;
                }
                out.write_char(c)?;
            }
            out.write_char('"')
        }
        SExprKind::List(items) => {
            out.write_char('(')?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.write_char(' ')?;
                }
                write_sexpr(out, item)?;
            }
            out.write_char(')')
        }
    }
}
