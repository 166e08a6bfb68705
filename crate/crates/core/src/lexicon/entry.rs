//! Lexicon entries: one record per (headword, part of speech).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::diag::{DiagCode, Diagnostic, Locus};
use super::{LexiconError, ParseMode};
use crate::sexpr::{SExpr, SExprKind, Span};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PartOfSpeech {
    Adjective,
    Adverb,
    Noun,
    Prep,
    Verb,
    /// Head symbol outside the closed set, kept verbatim (lenient mode only).
    Other(String),
}

impl PartOfSpeech {
    pub fn as_str(&self) -> &str {
        match self {
            PartOfSpeech::Adjective => "adjective",
            PartOfSpeech::Adverb => "adverb",
            PartOfSpeech::Noun => "noun",
            PartOfSpeech::Prep => "prep",
            PartOfSpeech::Verb => "verb",
            PartOfSpeech::Other(s) => s,
        }
    }

    /// Resolves a head symbol. Returns the POS and whether the `pre` alias
    /// was used. Unknown heads come back as [`PartOfSpeech::Other`].
    pub fn resolve(head: &str) -> (Self, bool) {
        match head {
            "verb" => (PartOfSpeech::Verb, false),
            "noun" => (PartOfSpeech::Noun, false),
            "adjective" => (PartOfSpeech::Adjective, false),
            "adverb" => (PartOfSpeech::Adverb, false),
            "prep" => (PartOfSpeech::Prep, false),
            "pre" => (PartOfSpeech::Prep, true),
            other => (PartOfSpeech::Other(other.to_string()), false),
        }
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self, PartOfSpeech::Other(_))
    }

    /// Morphology keys an entry of this POS may carry.
    pub fn morph_keys(&self) -> &'static [&'static str] {
        match self {
            PartOfSpeech::Noun => &["plural"],
            PartOfSpeech::Verb => &["past", "past-part", "pres-3sg", "pres-part"],
            PartOfSpeech::Adjective => &["comparative", "superlative"],
            _ => &[],
        }
    }
}

impl fmt::Display for PartOfSpeech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PartOfSpeech {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_lowercase();
        if lower.is_empty() || lower.contains(|c: char| c.is_whitespace() || "()\";".contains(c)) {
            return Err(format!("invalid part of speech `{s}`"));
        }
        Ok(PartOfSpeech::resolve(&lower).0)
    }
}

impl From<PartOfSpeech> for String {
    fn from(p: PartOfSpeech) -> String {
        p.as_str().to_string()
    }
}

impl TryFrom<String> for PartOfSpeech {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Every morphology key recognised on any POS.
pub const MORPH_KEYS: &[&str] = &[
    "comparative",
    "past",
    "past-part",
    "plural",
    "pres-3sg",
    "pres-part",
    "superlative",
];

/// A syntactic feature such as `(countable :pval ("with"))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpec {
    pub name: String,
    pub pval: Option<Vec<String>>,
    /// Parameters other than `:pval`, keyed without the colon.
    pub params: BTreeMap<String, SExpr>,
}

impl FeatureSpec {
    pub fn new(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            pval: None,
            params: BTreeMap::new(),
        }
    }
}

/// One complement option, e.g. `(np-pp :pval ("to"))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcatSpec {
    pub frame: String,
    pub pval: Option<Vec<String>>,
    pub params: BTreeMap<String, SExpr>,
}

impl SubcatSpec {
    pub fn new(frame: impl Into<String>) -> Self {
        SubcatSpec {
            frame: frame.into(),
            pval: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_pval<I, S>(mut self, pval: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.pval = Some(pval.into_iter().map(Into::into).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub pos: PartOfSpeech,
    pub orth: String,
    /// Irregular forms keyed by morphology key (`plural`, `past`, ...).
    pub morphology: BTreeMap<String, Vec<String>>,
    pub features: Vec<FeatureSpec>,
    pub subc: Vec<SubcatSpec>,
}

impl Entry {
    pub fn new(pos: PartOfSpeech, orth: impl Into<String>) -> Self {
        Entry {
            pos,
            orth: orth.into(),
            morphology: BTreeMap::new(),
            features: Vec::new(),
            subc: Vec::new(),
        }
    }

    pub fn with_subc(mut self, spec: SubcatSpec) -> Self {
        self.subc.push(spec);
        self
    }

    pub fn key(&self) -> (String, PartOfSpeech) {
        (self.orth.clone(), self.pos.clone())
    }

    pub fn locus(&self) -> Locus {
        Locus::Entry {
            orth: self.orth.clone(),
            pos: self.pos.to_string(),
        }
    }

    pub fn subcat(&self, frame: &str) -> Option<&SubcatSpec> {
        self.subc.iter().find(|s| s.frame == frame)
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", entry_to_sexpr(self))
    }
}

/// Splits a property list (`:key value :key value ...`) into pairs.
pub(crate) fn keyword_pairs(items: &[SExpr]) -> Result<Vec<(&str, &SExpr, Span)>, LexiconError> {
    let mut out = Vec::with_capacity(items.len() / 2);
    let mut iter = items.iter();
    while let Some(key) = iter.next() {
        let Some(k) = key.as_keyword() else {
            return Err(LexiconError::MalformedPair(key.span));
        };
        let Some(value) = iter.next() else {
            return Err(LexiconError::MalformedPair(key.span));
        };
        if out.iter().any(|(seen, _, _)| *seen == k) {
            return Err(LexiconError::DuplicateKey {
                key: k.to_string(),
                span: key.span,
            });
        }
        out.push((k, value, key.span));
    }
    Ok(out)
}

/// Reads a `:pval` value: a non-empty list of non-empty strings.
pub(crate) fn read_pval(value: &SExpr) -> Result<Vec<String>, LexiconError> {
    let items = value
        .as_list()
        .ok_or(LexiconError::BadPvalShape(value.span))?;
    if items.is_empty() {
        return Err(LexiconError::BadPvalShape(value.span));
    }
    items
        .iter()
        .map(|it| match it.as_str() {
            Some(s) if !s.is_empty() => Ok(s.to_string()),
            _ => Err(LexiconError::BadPvalShape(it.span)),
        })
        .collect()
}

fn read_string_list(value: &SExpr) -> Result<Vec<String>, LexiconError> {
    let bad = || LexiconError::BadValue {
        span: value.span,
        what: "expected a string or a non-empty list of strings".into(),
    };
    match &value.kind {
        SExprKind::Str(s) if !s.is_empty() => Ok(vec![s.clone()]),
        SExprKind::List(items) if !items.is_empty() => items
            .iter()
            .map(|it| match it.as_str() {
                Some(s) if !s.is_empty() => Ok(s.to_string()),
                _ => Err(bad()),
            })
            .collect(),
        _ => Err(bad()),
    }
}

/// A `(name :pval (...) :k v ...)` element of `:features` or `:subc`.
/// A bare symbol is accepted as a parameterless element.
type SpecParts = (String, Option<Vec<String>>, BTreeMap<String, SExpr>);

fn read_spec(form: &SExpr) -> Result<SpecParts, LexiconError> {
    if let Some(name) = form.as_symbol() {
        return Ok((name.to_string(), None, BTreeMap::new()));
    }
    let items = form.as_list().ok_or_else(|| LexiconError::BadValue {
        span: form.span,
        what: "expected a list headed by a symbol".into(),
    })?;
    let name = items
        .first()
        .and_then(SExpr::as_symbol)
        .ok_or_else(|| LexiconError::BadValue {
            span: form.span,
            what: "expected a list headed by a symbol".into(),
        })?;
    let mut pval = None;
    let mut params = BTreeMap::new();
    for (key, value, _) in keyword_pairs(&items[1..])? {
        if key == ":pval" {
            pval = Some(read_pval(value)?);
        } else {
            params.insert(key[1..].to_string(), value.clone());
        }
    }
    Ok((name.to_string(), pval, params))
}

fn read_spec_list(value: &SExpr) -> Result<Vec<&SExpr>, LexiconError> {
    value
        .as_list()
        .map(|items| items.iter().collect())
        .ok_or_else(|| LexiconError::BadValue {
            span: value.span,
            what: "expected a list".into(),
        })
}

/// Builds an [`Entry`] from one parsed form.
///
/// Unknown keywords and POS heads are warnings in lenient mode and errors
/// in strict mode. The `pre` head always resolves to `prep` with a warning.
pub fn entry_from_sexpr(
    form: &SExpr,
    mode: ParseMode,
) -> Result<(Entry, Vec<Diagnostic>), LexiconError> {
    let items = form.as_list().ok_or(LexiconError::BadHead(form.span))?;
    let head = items.first().ok_or(LexiconError::BadHead(form.span))?;
    let head_sym = head.as_symbol().ok_or(LexiconError::BadHead(head.span))?;
    let mut diags = Vec::new();

    let (pos, aliased) = PartOfSpeech::resolve(head_sym);
    if aliased {
        diags.push(Diagnostic::warning(
            DiagCode::PosAlias,
            Locus::Span(head.span),
            "part of speech `pre` read as `prep`",
        ));
    }
    if !pos.is_closed() {
        if mode == ParseMode::Strict {
            return Err(LexiconError::UnknownPos {
                head: head_sym.to_string(),
                span: head.span,
            });
        }
        diags.push(Diagnostic::warning(
            DiagCode::UnknownPos,
            Locus::Span(head.span),
            format!("unknown part of speech `{head_sym}`"),
        ));
    }

    let mut orth = None;
    let mut entry = Entry::new(pos, String::new());
    for (key, value, key_span) in keyword_pairs(&items[1..])? {
        let name = &key[1..];
        match name {
            "orth" => match value.as_str() {
                Some(s) if !s.is_empty() => orth = Some(s.to_string()),
                _ => {
                    return Err(LexiconError::BadValue {
                        span: value.span,
                        what: ":orth must be a non-empty string".into(),
                    })
                }
            },
            "features" => {
                for spec in read_spec_list(value)? {
                    let (name, pval, params) = read_spec(spec)?;
                    entry.features.push(FeatureSpec { name, pval, params });
                }
            }
            "subc" => {
                for spec in read_spec_list(value)? {
                    let (frame, pval, params) = read_spec(spec)?;
                    entry.subc.push(SubcatSpec { frame, pval, params });
                }
            }
            _ if MORPH_KEYS.contains(&name) => {
                entry
                    .morphology
                    .insert(name.to_string(), read_string_list(value)?);
            }
            _ => {
                if mode == ParseMode::Strict {
                    return Err(LexiconError::UnknownKeyword {
                        keyword: key.to_string(),
                        span: key_span,
                    });
                }
                diags.push(Diagnostic::warning(
                    DiagCode::UnknownKeyword,
                    Locus::Span(key_span),
                    format!("unknown keyword `{key}` ignored"),
                ));
            }
        }
    }
    entry.orth = orth.ok_or(LexiconError::MissingOrth(form.span))?;
    Ok((entry, diags))
}

fn string_list(values: &[String]) -> SExpr {
    SExpr::list(values.iter().map(SExpr::string).collect())
}

fn spec_to_sexpr(name: &str, pval: &Option<Vec<String>>, params: &BTreeMap<String, SExpr>) -> SExpr {
    let mut items = vec![SExpr::symbol(name)];
    if let Some(pval) = pval {
        items.push(SExpr::keyword("pval"));
        items.push(string_list(pval));
    }
    for (k, v) in params {
        items.push(SExpr::keyword(k));
        items.push(v.clone());
    }
    SExpr::list(items)
}

/// Canonical form: head, `:orth`, morphology keys alphabetically,
/// `:features`, `:subc`. Empty sections are omitted.
pub fn entry_to_sexpr(entry: &Entry) -> SExpr {
    let mut items = vec![
        SExpr::symbol(entry.pos.as_str()),
        SExpr::keyword("orth"),
        SExpr::string(entry.orth.clone()),
    ];
    for (key, forms) in &entry.morphology {
        items.push(SExpr::keyword(key));
        items.push(match forms.as_slice() {
            [single] => SExpr::string(single.clone()),
            many => string_list(many),
        });
    }
    if !entry.features.is_empty() {
        items.push(SExpr::keyword("features"));
        items.push(SExpr::list(
            entry
                .features
                .iter()
                .map(|f| spec_to_sexpr(&f.name, &f.pval, &f.params))
                .collect(),
        ));
    }
    if !entry.subc.is_empty() {
        items.push(SExpr::keyword("subc"));
        items.push(SExpr::list(
            entry
                .subc
                .iter()
                .map(|s| spec_to_sexpr(&s.frame, &s.pval, &s.params))
                .collect(),
        ));
    }
    SExpr::list(items)
}
