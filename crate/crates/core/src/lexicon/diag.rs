use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sexpr::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes. Tools match on these; messages are free text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagCode {
    /// `pre` read as `prep`.
    PosAlias,
    UnknownPos,
    UnknownKeyword,
    /// A grammatical-structure index that names no constituent.
    UnknownGsIndex,
    ControlSubjectMismatch,
    RaisingSubjectMismatch,
    ControlRaisingConflict,
    DuplicateIndex,
    /// A constituent using index 1, which belongs to the surface subject.
    ReservedIndex,
    /// Unfilled matrix subject on a frame that is not a raising frame.
    UnfilledSubject,
    UnknownFrame,
    MissingPval,
    UnexpectedPval,
    DuplicatePrep,
    UnknownMorphKey,
    EmptyPdirClass,
    MorphologyConflict,
    ParamConflict,
}

impl DiagCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagCode::PosAlias => "PosAlias",
            DiagCode::UnknownPos => "UnknownPos",
            DiagCode::UnknownKeyword => "UnknownKeyword",
            DiagCode::UnknownGsIndex => "UnknownGsIndex",
            DiagCode::ControlSubjectMismatch => "ControlSubjectMismatch",
            DiagCode::RaisingSubjectMismatch => "RaisingSubjectMismatch",
            DiagCode::ControlRaisingConflict => "ControlRaisingConflict",
            DiagCode::DuplicateIndex => "DuplicateIndex",
            DiagCode::ReservedIndex => "ReservedIndex",
            DiagCode::UnfilledSubject => "UnfilledSubject",
            DiagCode::UnknownFrame => "UnknownFrame",
            DiagCode::MissingPval => "MissingPval",
            DiagCode::UnexpectedPval => "UnexpectedPval",
            DiagCode::DuplicatePrep => "DuplicatePrep",
            DiagCode::UnknownMorphKey => "UnknownMorphKey",
            DiagCode::EmptyPdirClass => "EmptyPdirClass",
            DiagCode::MorphologyConflict => "MorphologyConflict",
            DiagCode::ParamConflict => "ParamConflict",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a diagnostic points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Locus {
    Span(Span),
    Entry { orth: String, pos: String },
    Frame { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
    pub locus: Locus,
}

impl Diagnostic {
    pub fn error(code: DiagCode, locus: Locus, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            locus,
        }
    }

    pub fn warning(code: DiagCode, locus: Locus, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            locus,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
