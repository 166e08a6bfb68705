//! In-memory token index over plain-text documents with keyword-in-context
//! lookup.
//!
//! A token is a maximal run of alphabetic characters, optionally joined by
//! single internal hyphens or apostrophes (`well-known`, `don't`). Matching
//! is on the lowercased token.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexicon::{surface_forms, Entry};

const CACHE_MAGIC: &[u8] = b"COMLEXIDX\x01\n";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no documents to index")]
    EmptyCorpus,
    #[error("kwic limit must be at least 1")]
    ZeroLimit,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("cache file is not a valid index: {0}")]
    BadCache(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Byte range of one token in its document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: usize,
    pub source: String,
    pub text: String,
    pub tokens: Vec<TokenSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Posting {
    pub doc: usize,
    /// Position of the token within its document, counted in tokens.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusIndex {
    documents: Vec<Document>,
    postings: BTreeMap<String, Vec<Posting>>,
    content_hash: String,
}

/// Character range (not bytes) into a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KwicLine {
    pub doc_id: usize,
    pub source: String,
    pub left: String,
    #[serde(rename = "match")]
    pub matched: String,
    pub right: String,
    /// Covers `left + matched + right`.
    pub span: CharSpan,
}

impl KwicLine {
    /// Single-line rendering with the match bracketed; newlines in context
    /// become spaces.
    pub fn display(&self, window: usize) -> String {
        let flat = |s: &str| s.replace(['\n', '\r', '\t'], " ");
        format!(
            "{:>width$} [{}] {}",
            flat(&self.left),
            self.matched,
            flat(&self.right),
            width = window
        )
    }
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

/// Tokenizes `text`, returning byte spans.
pub fn tokenize(text: &str) -> Vec<TokenSpan> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !c.is_alphabetic() {
            continue;
        }
        let start = i;
        let mut end = i + c.len_utf8();
        loop {
            match chars.peek().copied() {
                Some((j, d)) if d.is_alphabetic() => {
                    chars.next();
                    end = j + d.len_utf8();
                }
                Some((j, d)) if is_joiner(d) => {
                    // Only joins when another letter follows.
                    let after = text[j + d.len_utf8()..].chars().next();
                    if after.is_some_and(char::is_alphabetic) {
                        chars.next();
                        end = j + d.len_utf8();
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        out.push(TokenSpan { start, end });
    }
    out
}

fn content_hash(docs: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    for (name, text) in docs {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((text.len() as u64).to_le_bytes());
        h.update(text.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl CorpusIndex {
    /// Builds an index over `(source-name, text)` pairs, in the given order.
    pub fn ingest<I, N, T>(documents: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (N, T)>,
        N: Into<String>,
        T: Into<String>,
    {
        let docs: Vec<(String, String)> = documents
            .into_iter()
            .map(|(n, t)| (n.into(), t.into()))
            .collect();
        if docs.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let content_hash = content_hash(&docs);
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let documents = docs
            .into_iter()
            .enumerate()
            .map(|(id, (source, text))| {
                let tokens = tokenize(&text);
                for (offset, t) in tokens.iter().enumerate() {
                    postings
                        .entry(text[t.start..t.end].to_lowercase())
                        .or_default()
                        .push(Posting { doc: id, offset });
                }
                Document {
                    id,
                    source,
                    text,
                    tokens,
                }
            })
            .collect();
        Ok(CorpusIndex {
            documents,
            postings,
            content_hash,
        })
    }

    /// Reads every `.txt` file in `dir`, in file-name order.
    pub fn read_dir_documents(dir: &Path) -> Result<Vec<(String, String)>, CorpusError> {
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        paths
            .into_iter()
            .map(|p| {
                let text = fs::read_to_string(&p).map_err(io_err(&p))?;
                let name = p.file_name().unwrap().to_string_lossy().into_owned();
                Ok((name, text))
            })
            .collect()
    }

    pub fn from_dir(dir: &Path) -> Result<Self, CorpusError> {
        Self::ingest(Self::read_dir_documents(dir)?)
    }

    /// Like [`from_dir`](Self::from_dir) but reuses `cache` when its content
    /// hash matches the directory, and rewrites it otherwise.
    pub fn from_dir_cached(dir: &Path, cache: &Path) -> Result<Self, CorpusError> {
        let docs = Self::read_dir_documents(dir)?;
        let hash = content_hash(&docs);
        if let Ok(cached) = Self::load_cache(cache) {
            if cached.content_hash == hash {
                return Ok(cached);
            }
        }
        let index = Self::ingest(docs)?;
        // A cache that cannot be written only costs a rebuild next time.
        let _ = index.save_cache(cache);
        Ok(index)
    }

    pub fn save_cache(&self, path: &Path) -> Result<(), CorpusError> {
        let mut bytes = CACHE_MAGIC.to_vec();
        bytes.extend(serde_json::to_vec(self).map_err(|e| CorpusError::BadCache(e.to_string()))?);
        crate::store::atomic_write(path, &bytes).map_err(io_err(path))
    }

    pub fn load_cache(path: &Path) -> Result<Self, CorpusError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let body = bytes
            .strip_prefix(CACHE_MAGIC)
            .ok_or_else(|| CorpusError::BadCache("bad magic header".into()))?;
        serde_json::from_slice(body).map_err(|e| CorpusError::BadCache(e.to_string()))
    }

    pub fn content_hash(&self) -> &str {
        &self.content_hash
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn postings(&self, form: &str) -> &[Posting] {
        self.postings
            .get(&form.to_lowercase())
            .map_or(&[], Vec::as_slice)
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn total_postings(&self) -> usize {
        self.postings.values().map(Vec::len).sum()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    /// Concordance lines for any of `forms`, ordered by (document, offset).
    /// Context is at most `window` characters per side, trimmed back to a
    /// whitespace boundary when one exists inside the window.
    pub fn kwic<S: AsRef<str>>(
        &self,
        forms: &[S],
        window: usize,
        limit: usize,
    ) -> Result<Vec<KwicLine>, CorpusError> {
        if limit == 0 {
            return Err(CorpusError::ZeroLimit);
        }
        let keys: BTreeSet<String> = forms.iter().map(|f| f.as_ref().to_lowercase()).collect();
        let mut hits: Vec<Posting> = keys.iter().flat_map(|k| self.postings(k).iter().copied()).collect();
        hits.sort_unstable();
        hits.dedup();
        hits.truncate(limit);
        Ok(hits.into_iter().map(|p| self.line(p, window)).collect())
    }

    fn line(&self, p: Posting, window: usize) -> KwicLine {
        let doc = &self.documents[p.doc];
        let tok = doc.tokens[p.offset];
        let text = doc.text.as_str();

        let left_full = &text[..tok.start];
        let left_start = {
            let mut it = left_full.char_indices().rev();
            let cut = it.nth(window.saturating_sub(1)).filter(|_| window > 0);
            match cut {
                _ if window == 0 => tok.start,
                None => 0,
                Some((b, _)) => {
                    let candidate = &left_full[b..];
                    let mid_word = b > 0 && !left_full[..b].ends_with(char::is_whitespace);
                    match candidate.find(char::is_whitespace) {
                        Some(ws) if mid_word => {
                            let ws_char = candidate[ws..].chars().next().unwrap();
                            b + ws + ws_char.len_utf8()
                        }
                        _ => b,
                    }
                }
            }
        };

        let right_full = &text[tok.end..];
        let right_end = {
            let end = right_full
                .char_indices()
                .nth(window)
                .map_or(right_full.len(), |(b, _)| b);
            let candidate = &right_full[..end];
            let mid_word = end < right_full.len() && !right_full[end..].starts_with(char::is_whitespace);
            match candidate.rfind(char::is_whitespace) {
                Some(ws) if mid_word => ws,
                _ => end,
            }
        };

        let start_chars = text[..left_start].chars().count();
        let left = text[left_start..tok.start].to_string();
        let matched = text[tok.start..tok.end].to_string();
        let right = right_full[..right_end].to_string();
        let len = left.chars().count() + matched.chars().count() + right.chars().count();
        KwicLine {
            doc_id: doc.id,
            source: doc.source.clone(),
            left,
            matched,
            right,
            span: CharSpan {
                start: start_chars,
                end: start_chars + len,
            },
        }
    }

    /// Concordance for every surface form of `entry`.
    pub fn concordance_for_entry(
        &self,
        entry: &Entry,
        window: usize,
        limit: usize,
    ) -> Result<Vec<KwicLine>, CorpusError> {
        let forms: Vec<String> = surface_forms(entry).into_iter().collect();
        self.kwic(&forms, window, limit)
    }

    /// Text covered by `span` in document `doc_id`.
    pub fn slice_chars(&self, doc_id: usize, span: CharSpan) -> Option<String> {
        let doc = self.documents.get(doc_id)?;
        Some(doc.text.chars().skip(span.start).take(span.end - span.start).collect())
    }
}
