//! Typed lexicon model: entries, frames, validation, p-dir expansion and
//! regular morphology.

mod diag;
mod entry;
mod frame;
mod morph;
mod pdir;
mod validate;

use indexmap::IndexMap;
use thiserror::Error;

pub use diag::{has_errors, DiagCode, Diagnostic, Locus, Severity};
pub use entry::{entry_from_sexpr, entry_to_sexpr, Entry, FeatureSpec, PartOfSpeech, SubcatSpec, MORPH_KEYS};
pub use frame::{
    default_requires_pval, frame_from_sexpr, frame_is_valid, frame_to_sexpr, validate_frame, Constituent,
    ControlTarget, Frame, FrameFeature, FrameKind, FrameRegistry, GrammaticalStructure, SubjectSlot,
};
pub use morph::{inflections, surface_forms};
pub use pdir::{expand_pdir, is_pdir_token, PdirClass, DEFAULT_PDIR, PDIR_TOKEN};
pub use validate::validate_entry;

use crate::sexpr::{parse_sexprs, ParseError, SExpr, Span};

/// Built-in frame inventory: the documented frames plus stubs for every
/// frame the sample entries use.
pub const FIXTURE_FRAMES: &str = include_str!("../../data/frames.def");

/// How unknown keywords and part-of-speech heads are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    Strict,
    #[default]
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("entry has no :orth")]
    MissingOrth(Span),
    #[error("form must start with a part-of-speech symbol")]
    BadHead(Span),
    #[error("keyword without a value, or value without a keyword")]
    MalformedPair(Span),
    #[error(":pval must be a non-empty list of non-empty strings")]
    BadPvalShape(Span),
    #[error("duplicate key `{key}`")]
    DuplicateKey { key: String, span: Span },
    #[error("unknown keyword `{keyword}`")]
    UnknownKeyword { keyword: String, span: Span },
    #[error("unknown part of speech `{head}`")]
    UnknownPos { head: String, span: Span },
    #[error("{what}")]
    BadValue { span: Span, what: String },
    #[error("frame has no :cs")]
    MissingCs(Span),
    #[error("frame has no :gs")]
    MissingGs(Span),
    #[error("constituent index must be an integer")]
    NonIntegerIndex(Span),
    #[error("unknown frame kind `{head}`")]
    UnknownFrameKind { head: String, span: Span },
    #[error("{kind} `{name}` defined twice")]
    DuplicateFrame { kind: String, name: String },
    #[error("duplicate entry for \"{orth}\" ({pos})")]
    DuplicateEntry { orth: String, pos: String, span: Span },
    #[error("p-dir used but the p-dir class is empty")]
    EmptyPdirClass,
    #[error("{0}")]
    Usage(String),
}

impl LexiconError {
    /// Source location, when the error has one.
    pub fn span(&self) -> Option<Span> {
        use LexiconError::*;
        match self {
            Parse(e) => Some(e.span()),
            MissingOrth(s) | BadHead(s) | MalformedPair(s) | BadPvalShape(s) | MissingCs(s) | MissingGs(s)
            | NonIntegerIndex(s) => Some(*s),
            DuplicateKey { span, .. }
            | UnknownKeyword { span, .. }
            | UnknownPos { span, .. }
            | BadValue { span, .. }
            | UnknownFrameKind { span, .. }
            | DuplicateEntry { span, .. } => Some(*span),
            DuplicateFrame { .. } | EmptyPdirClass | Usage(_) => None,
        }
    }
}

pub type EntryKey = (String, PartOfSpeech);

/// Entries keyed by (orth, pos), kept in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: IndexMap<EntryKey, Entry>,
}

/// Result of reading one form of a lexicon file.
pub type FormResult = Result<(Entry, Vec<Diagnostic>), LexiconError>;

/// Reads each form independently so that one bad entry does not hide the
/// rest. Only a syntax error in the file as a whole is fatal.
pub fn read_entries(text: &str, mode: ParseMode) -> Result<Vec<(SExpr, FormResult)>, ParseError> {
    Ok(parse_sexprs(text)?
        .into_iter()
        .map(|form| {
            let res = entry_from_sexpr(&form, mode);
            (form, res)
        })
        .collect())
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a lexicon file, failing on the first bad form.
    pub fn parse(text: &str, mode: ParseMode) -> Result<(Self, Vec<Diagnostic>), LexiconError> {
        let mut lex = Lexicon::new();
        let mut diags = Vec::new();
        for form in parse_sexprs(text)? {
            let (entry, mut d) = entry_from_sexpr(&form, mode)?;
            diags.append(&mut d);
            if lex.contains(&entry.orth, &entry.pos) {
                return Err(LexiconError::DuplicateEntry {
                    orth: entry.orth,
                    pos: entry.pos.to_string(),
                    span: form.span,
                });
            }
            lex.upsert(entry);
        }
        Ok((lex, diags))
    }

    /// Inserts or replaces; a replaced entry keeps its position.
    pub fn upsert(&mut self, entry: Entry) -> Option<Entry> {
        self.entries.insert(entry.key(), entry)
    }

    pub fn get(&self, orth: &str, pos: &PartOfSpeech) -> Option<&Entry> {
        self.entries.get(&(orth.to_string(), pos.clone()))
    }

    pub fn contains(&self, orth: &str, pos: &PartOfSpeech) -> bool {
        self.get(orth, pos).is_some()
    }

    /// Entries for `orth`, sorted by part of speech name.
    pub fn lookup(&self, orth: &str) -> Vec<&Entry> {
        let mut v: Vec<_> = self.entries.values().filter(|e| e.orth == orth).collect();
        v.sort_by(|a, b| a.pos.as_str().cmp(b.pos.as_str()));
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = &Entry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One canonical line per entry.
    pub fn to_text(&self) -> String {
        self.entries.values().map(|e| format!("{e}\n")).collect()
    }

    pub fn validate(&self, registry: &FrameRegistry, pdir: &PdirClass) -> Vec<Diagnostic> {
        self.iter().flat_map(|e| validate_entry(e, registry, pdir)).collect()
    }

    /// Copy with every `p-dir` token expanded.
    pub fn expand_pdir(&self, pdir: &PdirClass) -> Result<Lexicon, LexiconError> {
        let mut out = self.clone();
        for entry in out.entries.values_mut() {
            for spec in &mut entry.subc {
                if let Some(pval) = &spec.pval {
                    spec.pval = Some(expand_pdir(pval, pdir)?);
                }
            }
            for f in &mut entry.features {
                if let Some(pval) = &f.pval {
                    f.pval = Some(expand_pdir(pval, pdir)?);
                }
            }
        }
        Ok(out)
    }
}

impl FromIterator<Entry> for Lexicon {
    fn from_iter<I: IntoIterator<Item = Entry>>(iter: I) -> Self {
        let mut lex = Lexicon::new();
        for e in iter {
            lex.upsert(e);
        }
        lex
    }
}

/// The fixture frame registry.
pub fn fixture_registry() -> FrameRegistry {
    FrameRegistry::parse(FIXTURE_FRAMES, ParseMode::Strict)
        .expect("fixture frames parse")
        .0
}
