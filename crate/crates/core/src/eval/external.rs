//! Scoring against another dictionary's complement codes through a mapping
//! table, and the spurious-frame estimate.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::coverage::Cell;
use super::instance::TaggedInstance;
use super::EvalError;
use crate::lexicon::{Entry, Lexicon, PartOfSpeech};

/// Internal frame name to external codes. Frames the external scheme cannot
/// express are listed as unmappable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingTable {
    pub map: BTreeMap<String, BTreeSet<String>>,
    pub unmappable: BTreeSet<String>,
}

pub const UNMAPPABLE: &str = "UNMAPPABLE";

impl MappingTable {
    /// Reads `frame<TAB>code,code,...` or `frame<TAB>UNMAPPABLE` lines.
    /// `#` lines and an `internal-frame` header are skipped.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut table = MappingTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let bad = |message: String| EvalError::Tsv { line: i + 1, message };
            let (frame, codes) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected two tab-separated columns".into()))?;
            let frame = frame.trim().to_lowercase();
            if frame == "internal-frame" {
                continue;
            }
            if frame.is_empty() {
                return Err(bad("empty frame name".into()));
            }
            if table.map.contains_key(&frame) || table.unmappable.contains(&frame) {
                return Err(bad(format!("frame `{frame}` listed twice")));
            }
            if codes.trim() == UNMAPPABLE {
                table.unmappable.insert(frame);
                continue;
            }
            let codes: BTreeSet<String> = codes
                .split(',')
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .map(str::to_string)
                .collect();
            if codes.is_empty() {
                return Err(bad(format!("no codes for `{frame}`")));
            }
            table.map.insert(frame, codes);
        }
        Ok(table)
    }

    pub fn codes(&self, frame: &str) -> Option<&BTreeSet<String>> {
        self.map.get(frame)
    }
}

/// External codes per lemma implied by a lexicon under `mapping`.
pub fn external_codes_for_lexicon(mapping: &MappingTable, lexicon: &Lexicon) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for entry in lexicon.iter() {
        let codes = out.entry(entry.orth.clone()).or_default();
        for spec in &entry.subc {
            if let Some(c) = mapping.codes(&spec.frame) {
                codes.extend(c.iter().cloned());
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExternalMode {
    /// Unmappable gold frames count as misses.
    Strict,
    /// Unmappable gold frames are dropped from the denominator.
    Soft,
}

/// How many instances the external codes recognise.
pub fn external_coverage(
    mapping: &MappingTable,
    codes_by_lemma: &BTreeMap<String, BTreeSet<String>>,
    instances: &[TaggedInstance],
    mode: ExternalMode,
) -> Cell {
    let mut covered = 0;
    let mut total = 0;
    for inst in instances {
        let unmappable = mapping.unmappable.contains(&inst.frame);
        if unmappable && mode == ExternalMode::Soft {
            continue;
        }
        total += 1;
        let hit = match (mapping.codes(&inst.frame), codes_by_lemma.get(&inst.lemma)) {
            (Some(wanted), Some(have)) => !wanted.is_disjoint(have),
            _ => false,
        };
        if hit {
            covered += 1;
        }
    }
    Cell::new(covered, total)
}

/// Observed (frame, prepositions) analyses for one headword.
pub fn attested_analyses(
    instances: &[TaggedInstance],
    orth: &str,
    pos: &PartOfSpeech,
) -> BTreeSet<(String, BTreeSet<String>)> {
    instances
        .iter()
        .filter(|i| i.lemma == orth && &i.pos == pos)
        .map(|i| (i.frame.clone(), i.preps.iter().cloned().collect()))
        .collect()
}

/// Share of an entry's subcategorization specs whose frame never occurs in
/// `attested`. An upper bound on spurious features: a frame can be valid and
/// merely absent from the sample. Zero for an entry with no specs.
pub fn spurious_rate(entry: &Entry, attested: &BTreeSet<(String, BTreeSet<String>)>) -> f64 {
    if entry.subc.is_empty() {
        return 0.0;
    }
    let frames: BTreeSet<&str> = attested.iter().map(|(f, _)| f.as_str()).collect();
    let unattested = entry.subc.iter().filter(|s| !frames.contains(s.frame.as_str())).count();
    unattested as f64 / entry.subc.len() as f64
}
