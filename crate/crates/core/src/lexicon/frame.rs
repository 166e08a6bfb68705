//! Subcategorization frame definitions and the registry that holds them.
//!
//! A frame file is a sequence of forms such as
//!
//! ```text
//! (vp-frame to-inf-sc :cs ((vp 2 :mood to-infinitive :subject 1))
//!   :features (:control subject)
//!   :gs (:subject 1 :comp 2)
//!   :ex "I wanted to come.")
//! ```
//!
//! Constituents in `:cs` carry integer indices; `:gs` assigns functional
//! roles by index. Index 1 is the surface subject and never appears in `:cs`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::diag::{DiagCode, Diagnostic, Locus, Severity};
use super::entry::{keyword_pairs, PartOfSpeech};
use super::{LexiconError, ParseMode};
use crate::sexpr::{parse_sexprs, SExpr, SExprKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameKind {
    Vp,
    Noun,
    Adj,
}

impl FrameKind {
    pub fn head(&self) -> &'static str {
        match self {
            FrameKind::Vp => "vp-frame",
            FrameKind::Noun => "noun-frame",
            FrameKind::Adj => "adj-frame",
        }
    }

    pub fn from_head(head: &str) -> Option<Self> {
        match head {
            "vp-frame" => Some(FrameKind::Vp),
            "noun-frame" => Some(FrameKind::Noun),
            "adj-frame" => Some(FrameKind::Adj),
            _ => None,
        }
    }

    /// The frame kind consulted for entries of `pos`, if any.
    pub fn for_pos(pos: &PartOfSpeech) -> Option<Self> {
        match pos {
            PartOfSpeech::Verb => Some(FrameKind::Vp),
            PartOfSpeech::Noun => Some(FrameKind::Noun),
            PartOfSpeech::Adjective => Some(FrameKind::Adj),
            _ => None,
        }
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.head())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlTarget {
    Subject,
    Object,
    Variable,
    Arbitrary,
}

impl ControlTarget {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlTarget::Subject => "subject",
            ControlTarget::Object => "object",
            ControlTarget::Variable => "variable",
            ControlTarget::Arbitrary => "arbitrary",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "subject" => Some(ControlTarget::Subject),
            "object" => Some(ControlTarget::Object),
            "variable" => Some(ControlTarget::Variable),
            "arbitrary" => Some(ControlTarget::Arbitrary),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameFeature {
    Control(ControlTarget),
    Raising(ControlTarget),
    /// Any other `:key value` pair, key without the colon.
    Other(String, SExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constituent {
    pub category: String,
    pub index: i64,
    pub options: BTreeMap<String, SExpr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubjectSlot {
    Ref(i64),
    /// `:subject ()`: no matrix subject.
    Unfilled,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrammaticalStructure {
    pub subject: Option<SubjectSlot>,
    pub comp: Vec<i64>,
    pub other: BTreeMap<String, i64>,
}

impl GrammaticalStructure {
    /// Every index the structure refers to, in role order.
    pub fn referenced_indices(&self) -> Vec<i64> {
        let mut out = Vec::new();
        if let Some(SubjectSlot::Ref(i)) = self.subject {
            out.push(i);
        }
        out.extend(&self.comp);
        out.extend(self.other.values());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub name: String,
    pub cs: Vec<Constituent>,
    pub gs: GrammaticalStructure,
    pub features: Vec<FrameFeature>,
    pub examples: Vec<String>,
    pub requires_pval: bool,
    /// Unrecognised keys kept so the frame can be reprinted.
    pub extra: BTreeMap<String, SExpr>,
}

impl Frame {
    pub fn has_control(&self) -> bool {
        self.features.iter().any(|f| matches!(f, FrameFeature::Control(_)))
    }

    pub fn has_raising(&self) -> bool {
        self.features.iter().any(|f| matches!(f, FrameFeature::Raising(_)))
    }

    pub fn example(&self) -> Option<&str> {
        self.examples.first().map(String::as_str)
    }
}

/// Whether entries using a frame named `name` must list prepositions:
/// true when a hyphen-separated segment is `pp` or `p`.
pub fn default_requires_pval(name: &str) -> bool {
    name.split('-').any(|seg| seg == "pp" || seg == "p")
}

fn read_index(form: &SExpr) -> Result<i64, LexiconError> {
    form.as_integer().ok_or(LexiconError::NonIntegerIndex(form.span))
}

fn read_constituent(form: &SExpr) -> Result<Constituent, LexiconError> {
    let bad = || LexiconError::BadValue {
        span: form.span,
        what: "constituent must be (category index :key value ...)".into(),
    };
    let items = form.as_list().ok_or_else(bad)?;
    let category = items.first().and_then(SExpr::as_symbol).ok_or_else(bad)?;
    let index = read_index(items.get(1).ok_or_else(bad)?)?;
    let options = keyword_pairs(&items[2..])?
        .into_iter()
        .map(|(k, v, _)| (k[1..].to_string(), v.clone()))
        .collect();
    Ok(Constituent {
        category: category.to_string(),
        index,
        options,
    })
}

fn read_gs(form: &SExpr) -> Result<GrammaticalStructure, LexiconError> {
    let items = form.as_list().ok_or_else(|| LexiconError::BadValue {
        span: form.span,
        what: ":gs must be a property list".into(),
    })?;
    let mut gs = GrammaticalStructure::default();
    for (key, value, _) in keyword_pairs(items)? {
        match key {
            ":subject" if value.is_empty_list() => gs.subject = Some(SubjectSlot::Unfilled),
            ":subject" => gs.subject = Some(SubjectSlot::Ref(read_index(value)?)),
            ":comp" => match &value.kind {
                SExprKind::List(xs) => {
                    gs.comp = xs.iter().map(read_index).collect::<Result<_, _>>()?;
                }
                _ => gs.comp = vec![read_index(value)?],
            },
            _ => {
                gs.other.insert(key[1..].to_string(), read_index(value)?);
            }
        }
    }
    Ok(gs)
}

fn read_frame_features(form: &SExpr) -> Result<Vec<FrameFeature>, LexiconError> {
    let items = form.as_list().ok_or_else(|| LexiconError::BadValue {
        span: form.span,
        what: ":features must be a property list".into(),
    })?;
    keyword_pairs(items)?
        .into_iter()
        .map(|(key, value, _)| {
            let target = || {
                value
                    .as_symbol()
                    .and_then(ControlTarget::parse)
                    .ok_or_else(|| LexiconError::BadValue {
                        span: value.span,
                        what: "expected subject, object, variable or arbitrary".into(),
                    })
            };
            Ok(match key {
                ":control" => FrameFeature::Control(target()?),
                ":raising" => FrameFeature::Raising(target()?),
                _ => FrameFeature::Other(key[1..].to_string(), value.clone()),
            })
        })
        .collect()
}

fn read_bool(form: &SExpr) -> Result<bool, LexiconError> {
    match form.as_symbol() {
        Some("t" | "true" | "yes") => Ok(true),
        Some("nil" | "false" | "no") => Ok(false),
        _ if form.is_empty_list() => Ok(false),
        _ => Err(LexiconError::BadValue {
            span: form.span,
            what: "expected t or nil".into(),
        }),
    }
}

/// Builds a [`Frame`] from one parsed form. Structural checks beyond shape
/// are left to [`validate_frame`].
pub fn frame_from_sexpr(form: &SExpr, mode: ParseMode) -> Result<(Frame, Vec<Diagnostic>), LexiconError> {
    let items = form.as_list().ok_or(LexiconError::BadHead(form.span))?;
    let head = items.first().ok_or(LexiconError::BadHead(form.span))?;
    let head_sym = head.as_symbol().ok_or(LexiconError::BadHead(head.span))?;
    let kind = FrameKind::from_head(head_sym).ok_or_else(|| LexiconError::UnknownFrameKind {
        head: head_sym.to_string(),
        span: head.span,
    })?;
    let name_form = items.get(1).ok_or(LexiconError::BadHead(form.span))?;
    let name = name_form.as_symbol().ok_or_else(|| LexiconError::BadValue {
        span: name_form.span,
        what: "frame name must be a symbol".into(),
    })?;

    let mut diags = Vec::new();
    let mut cs = None;
    let mut gs = None;
    let mut features = Vec::new();
    let mut examples = Vec::new();
    let mut requires_pval = None;
    let mut extra = BTreeMap::new();
    for (key, value, key_span) in keyword_pairs(&items[2..])? {
        match key {
            ":cs" => {
                let list = value.as_list().ok_or_else(|| LexiconError::BadValue {
                    span: value.span,
                    what: ":cs must be a list of constituents".into(),
                })?;
                cs = Some(list.iter().map(read_constituent).collect::<Result<Vec<_>, _>>()?);
            }
            ":gs" => gs = Some(read_gs(value)?),
            ":features" => features = read_frame_features(value)?,
            ":ex" => {
                examples = match &value.kind {
                    SExprKind::Str(s) => vec![s.clone()],
                    SExprKind::List(xs) => xs
                        .iter()
                        .map(|x| {
                            x.as_str().map(str::to_string).ok_or_else(|| LexiconError::BadValue {
                                span: x.span,
                                what: ":ex must hold strings".into(),
                            })
                        })
                        .collect::<Result<_, _>>()?,
                    _ => {
                        return Err(LexiconError::BadValue {
                            span: value.span,
                            what: ":ex must be a string".into(),
                        })
                    }
                }
            }
            ":requires-pval" => requires_pval = Some(read_bool(value)?),
            _ => {
                if mode == ParseMode::Strict {
                    return Err(LexiconError::UnknownKeyword {
                        keyword: key.to_string(),
                        span: key_span,
                    });
                }
                diags.push(Diagnostic::warning(
                    DiagCode::UnknownKeyword,
                    crate::lexicon::Locus::Span(key_span),
                    format!("unknown frame keyword `{key}` kept verbatim"),
                ));
                extra.insert(key[1..].to_string(), value.clone());
            }
        }
    }
    let frame = Frame {
        kind,
        name: name.to_string(),
        cs: cs.ok_or(LexiconError::MissingCs(form.span))?,
        gs: gs.ok_or(LexiconError::MissingGs(form.span))?,
        features,
        examples,
        requires_pval: requires_pval.unwrap_or_else(|| default_requires_pval(name)),
        extra,
    };
    Ok((frame, diags))
}

/// Canonical printed form of a frame.
pub fn frame_to_sexpr(frame: &Frame) -> SExpr {
    let mut items = vec![SExpr::symbol(frame.kind.head()), SExpr::symbol(&frame.name)];
    items.push(SExpr::keyword("cs"));
    items.push(SExpr::list(
        frame
            .cs
            .iter()
            .map(|c| {
                let mut xs = vec![SExpr::symbol(&c.category), SExpr::integer(c.index)];
                for (k, v) in &c.options {
                    xs.push(SExpr::keyword(k));
                    xs.push(v.clone());
                }
                SExpr::list(xs)
            })
            .collect(),
    ));
    if !frame.features.is_empty() {
        let mut xs = Vec::new();
        for f in &frame.features {
            match f {
                FrameFeature::Control(t) => {
                    xs.push(SExpr::keyword("control"));
                    xs.push(SExpr::symbol(t.as_str()));
                }
                FrameFeature::Raising(t) => {
                    xs.push(SExpr::keyword("raising"));
                    xs.push(SExpr::symbol(t.as_str()));
                }
                FrameFeature::Other(k, v) => {
                    xs.push(SExpr::keyword(k));
                    xs.push(v.clone());
                }
            }
        }
        items.push(SExpr::keyword("features"));
        items.push(SExpr::list(xs));
    }
    let mut gs = Vec::new();
    match frame.gs.subject {
        Some(SubjectSlot::Ref(i)) => {
            gs.push(SExpr::keyword("subject"));
            gs.push(SExpr::integer(i));
        }
        Some(SubjectSlot::Unfilled) => {
            gs.push(SExpr::keyword("subject"));
            gs.push(SExpr::list(vec![]));
        }
        None => {}
    }
    match frame.gs.comp.as_slice() {
        [] => {}
        [single] => {
            gs.push(SExpr::keyword("comp"));
            gs.push(SExpr::integer(*single));
        }
        many => {
            gs.push(SExpr::keyword("comp"));
            gs.push(SExpr::list(many.iter().map(|i| SExpr::integer(*i)).collect()));
        }
    }
    for (k, i) in &frame.gs.other {
        gs.push(SExpr::keyword(k));
        gs.push(SExpr::integer(*i));
    }
    items.push(SExpr::keyword("gs"));
    items.push(SExpr::list(gs));
    match frame.examples.as_slice() {
        [] => {}
        [single] => {
            items.push(SExpr::keyword("ex"));
            items.push(SExpr::string(single.clone()));
        }
        many => {
            items.push(SExpr::keyword("ex"));
            items.push(SExpr::list(many.iter().map(SExpr::string).collect()));
        }
    }
    if frame.requires_pval != default_requires_pval(&frame.name) {
        items.push(SExpr::keyword("requires-pval"));
        items.push(SExpr::symbol(if frame.requires_pval { "t" } else { "nil" }));
    }
    for (k, v) in &frame.extra {
        items.push(SExpr::keyword(k));
        items.push(v.clone());
    }
    SExpr::list(items)
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", frame_to_sexpr(self))
    }
}

/// Structural checks on one frame.
///
/// When a frame carries both control and raising features only the
/// conflict is reported; the subject checks assume one or the other.
pub fn validate_frame(frame: &Frame) -> Vec<Diagnostic> {
    let locus = || Locus::Frame {
        name: frame.name.clone(),
    };
    let mut out = Vec::new();

    let mut seen = BTreeSet::new();
    for c in &frame.cs {
        if c.index < 2 {
            out.push(Diagnostic::error(
                DiagCode::ReservedIndex,
                locus(),
                format!(
                    "constituent `{}` uses index {}; complements are numbered from 2",
                    c.category, c.index
                ),
            ));
        }
        if !seen.insert(c.index) {
            out.push(Diagnostic::error(
                DiagCode::DuplicateIndex,
                locus(),
                format!("index {} appears more than once in :cs", c.index),
            ));
        }
    }

    for i in frame.gs.referenced_indices() {
        if i != 1 && !seen.contains(&i) {
            out.push(Diagnostic::error(
                DiagCode::UnknownGsIndex,
                locus(),
                format!(":gs refers to index {i}, which is not a :cs constituent"),
            ));
        }
    }

    let control_subject = frame.features.contains(&FrameFeature::Control(ControlTarget::Subject));
    let raising_subject = frame.features.contains(&FrameFeature::Raising(ControlTarget::Subject));

    if frame.has_control() && frame.has_raising() {
        out.push(Diagnostic::error(
            DiagCode::ControlRaisingConflict,
            locus(),
            "a frame cannot carry both control and raising features",
        ));
        return out;
    }
    if control_subject && frame.gs.subject != Some(SubjectSlot::Ref(1)) {
        out.push(Diagnostic::error(
            DiagCode::ControlSubjectMismatch,
            locus(),
            "subject control requires :gs subject 1",
        ));
    }
    if raising_subject && frame.gs.subject != Some(SubjectSlot::Unfilled) {
        out.push(Diagnostic::error(
            DiagCode::RaisingSubjectMismatch,
            locus(),
            "subject raising requires an unfilled :gs subject",
        ));
    }
    if !frame.has_raising() && !control_subject && frame.gs.subject == Some(SubjectSlot::Unfilled) {
        out.push(Diagnostic::error(
            DiagCode::UnfilledSubject,
            locus(),
            "an unfilled :gs subject is only allowed on raising frames",
        ));
    }
    out
}

/// Frames keyed by (kind, name), in definition order.
#[derive(Debug, Clone, Default)]
pub struct FrameRegistry {
    frames: indexmap::IndexMap<(FrameKind, String), Frame>,
}

impl FrameRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, frame: Frame) -> Result<(), LexiconError> {
        let key = (frame.kind, frame.name.clone());
        if self.frames.contains_key(&key) {
            return Err(LexiconError::DuplicateFrame {
                kind: frame.kind.head().to_string(),
                name: frame.name,
            });
        }
        self.frames.insert(key, frame);
        Ok(())
    }

    /// Parses a frame file. Frame diagnostics from [`validate_frame`] are
    /// returned alongside the registry rather than rejecting it.
    pub fn parse(text: &str, mode: ParseMode) -> Result<(Self, Vec<Diagnostic>), LexiconError> {
        let mut reg = FrameRegistry::new();
        let mut diags = Vec::new();
        for form in parse_sexprs(text)? {
            let (frame, mut d) = frame_from_sexpr(&form, mode)?;
            diags.append(&mut d);
            diags.extend(validate_frame(&frame));
            reg.insert(frame)?;
        }
        Ok((reg, diags))
    }

    pub fn get(&self, kind: FrameKind, name: &str) -> Option<&Frame> {
        self.frames.get(&(kind, name.to_string()))
    }

    /// All frames with `name`, across kinds.
    pub fn by_name<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Frame> + 'a {
        self.frames.values().filter(move |f| f.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Frame> {
        self.frames.values()
    }

    /// Frames sorted by kind, then name.
    pub fn sorted(&self) -> Vec<&Frame> {
        let mut v: Vec<_> = self.frames.values().collect();
        v.sort_by(|a, b| (a.kind, &a.name).cmp(&(b.kind, &b.name)));
        v
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.frames.values().map(|f| format!("{f}\n")).collect()
    }
}

/// Convenience: true when no diagnostic is an error.
pub fn frame_is_valid(frame: &Frame) -> bool {
    validate_frame(frame).iter().all(|d| d.severity != Severity::Error)
}
