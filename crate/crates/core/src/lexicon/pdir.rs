//! The `p-dir` preposition class.
//!
//! Verbs of motion license long lists of directional prepositions. Writing
//! the token `p-dir` in a `:pval` list stands for the whole configured class.

use std::collections::HashSet;

use super::LexiconError;

/// The distinguished `:pval` token.
pub const PDIR_TOKEN: &str = "p-dir";

/// Built-in class, used when no class file is supplied. Not authoritative.
pub const DEFAULT_PDIR: &[&str] = &[
    "into", "onto", "over", "through", "toward", "towards", "up", "down", "across", "along",
    "around", "out", "off", "past", "to", "from",
];

pub fn is_pdir_token(s: &str) -> bool {
    s.eq_ignore_ascii_case(PDIR_TOKEN)
}

/// An ordered, duplicate-free set of prepositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdirClass {
    members: Vec<String>,
}

impl Default for PdirClass {
    fn default() -> Self {
        PdirClass::new(DEFAULT_PDIR.iter().copied())
    }
}

impl PdirClass {
    /// Builds a class, dropping repeats after their first occurrence.
    pub fn new<I, S>(members: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let members = members
            .into_iter()
            .map(Into::into)
            .filter(|m| seen.insert(m.clone()))
            .collect();
        PdirClass { members }
    }

    pub fn empty() -> Self {
        PdirClass { members: Vec::new() }
    }

    /// Reads a class file: one preposition per line, `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        PdirClass::new(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty()),
        )
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn contains(&self, prep: &str) -> bool {
        self.members.iter().any(|m| m.eq_ignore_ascii_case(prep))
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.members.iter().map(|m| format!("{m}\n")).collect()
    }
}

/// Replaces every `p-dir` token with the class members. The result keeps
/// first-occurrence order and has no duplicates.
pub fn expand_pdir<S: AsRef<str>>(pval: &[S], pdir: &PdirClass) -> Result<Vec<String>, LexiconError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(pval.len());
    for item in pval {
        let item = item.as_ref();
        if is_pdir_token(item) {
            if pdir.is_empty() {
                return Err(LexiconError::EmptyPdirClass);
            }
            for m in &pdir.members {
                if seen.insert(m.clone()) {
                    out.push(m.clone());
                }
            }
        } else if seen.insert(item.to_string()) {
            out.push(item.to_string());
        }
    }
    Ok(out)
}
