//! Instance coverage of annotator lexicons against gold-tagged instances.
//!
//! The denominator is instances. An instance is covered when the lexicon
//! entry for its (lemma, pos) lists the gold frame and, outside
//! complements-only mode, every gold preposition is licensed by that frame's
//! `:pval` lists. Multi-preposition instances are all-or-nothing.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::instance::TaggedInstance;
use super::union::union_lexicon;
use super::EvalError;
use crate::lexicon::{is_pdir_token, Entry, Lexicon, PdirClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageMode {
    /// Frame only; prepositions and particles ignored.
    ComplementsOnly,
    /// Frame plus prepositions; `p-dir` licenses nothing.
    FullStrict,
    /// Frame plus prepositions; `p-dir` licenses the whole class.
    FullPdir,
}

impl CoverageMode {
    pub const ALL: [CoverageMode; 3] = [
        CoverageMode::ComplementsOnly,
        CoverageMode::FullStrict,
        CoverageMode::FullPdir,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CoverageMode::ComplementsOnly => "complements-only",
            CoverageMode::FullStrict => "full-strict",
            CoverageMode::FullPdir => "full-pdir",
        }
    }
}

impl fmt::Display for CoverageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoverageMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "complements-only" | "complements" => Ok(CoverageMode::ComplementsOnly),
            "full-strict" | "strict" => Ok(CoverageMode::FullStrict),
            "full-pdir" | "pdir" => Ok(CoverageMode::FullPdir),
            other => Err(format!(
                "unknown coverage mode `{other}` (expected complements-only, full-strict or full-pdir)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MissReason {
    MissingEntry,
    FrameAbsent,
    PrepAbsent,
}

/// Why `entry` fails to cover `inst`, or `None` when it does.
fn miss_reason(entry: &Entry, inst: &TaggedInstance, mode: CoverageMode, pdir: &PdirClass) -> Option<MissReason> {
    let specs: Vec<_> = entry.subc.iter().filter(|s| s.frame == inst.frame).collect();
    if specs.is_empty() {
        return Some(MissReason::FrameAbsent);
    }
    if mode == CoverageMode::ComplementsOnly {
        return None;
    }
    let mut licensed = BTreeSet::new();
    for p in specs.iter().filter_map(|s| s.pval.as_ref()).flatten() {
        if is_pdir_token(p) {
            if mode == CoverageMode::FullPdir {
                licensed.extend(pdir.members().iter().map(|m| m.to_lowercase()));
            }
        } else {
            licensed.insert(p.to_lowercase());
        }
    }
    if inst.preps.iter().all(|p| licensed.contains(&p.to_lowercase())) {
        None
    } else {
        Some(MissReason::PrepAbsent)
    }
}

/// Whether `entry` licenses the gold analysis of `inst` under `mode`.
pub fn instance_covered(
    entry: &Entry,
    inst: &TaggedInstance,
    mode: CoverageMode,
    pdir: &PdirClass,
) -> Result<bool, EvalError> {
    if entry.pos != inst.pos || entry.orth != inst.lemma {
        return Err(EvalError::KeyMismatch {
            instance: inst.id.clone(),
            entry: format!("{} ({})", entry.orth, entry.pos),
        });
    }
    Ok(miss_reason(entry, inst, mode, pdir).is_none())
}

/// Covered/total with an integer percentage rounded half up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub covered: usize,
    pub total: usize,
    pub percent: u32,
}

impl Cell {
    pub fn new(covered: usize, total: usize) -> Self {
        assert!(covered <= total, "covered {covered} exceeds total {total}");
        Cell {
            covered,
            total,
            percent: percent_half_up(covered, total),
        }
    }

    /// Exact ratio; `None` when there is nothing to count.
    pub fn fraction(&self) -> Option<f64> {
        (self.total > 0).then(|| self.covered as f64 / self.total as f64)
    }
}

/// `round(100 * covered / total)` with halves rounded up; 0 when `total` is 0.
pub fn percent_half_up(covered: usize, total: usize) -> u32 {
    if total == 0 {
        return 0;
    }
    ((200 * covered as u128 + total as u128) / (2 * total as u128)) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Individual,
    Pair,
    Union,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Miss {
    pub instance: String,
    pub reason: MissReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub kind: RowKind,
    pub members: Vec<String>,
    #[serde(flatten)]
    pub cell: Cell,
    pub fraction: Option<f64>,
    pub misses: Vec<Miss>,
}

impl CoverageRow {
    pub fn label(&self) -> String {
        match self.kind {
            RowKind::Union if self.members.len() > 2 => "union".to_string(),
            _ => self.members.join(" + "),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub mode: CoverageMode,
    pub include_flagged: bool,
    /// Individual rows in annotator order, then every unordered pair, then
    /// the union of all annotators.
    pub rows: Vec<CoverageRow>,
    /// Mean fraction over individual rows.
    pub individual_mean: Option<f64>,
    /// Mean fraction over pair rows.
    pub pair_mean: Option<f64>,
}

impl CoverageReport {
    pub fn rows_of(&self, kind: RowKind) -> impl Iterator<Item = &CoverageRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    pub fn individual(&self, annotator: &str) -> Option<&CoverageRow> {
        self.rows_of(RowKind::Individual).find(|r| r.members[0] == annotator)
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&CoverageRow> {
        self.rows_of(RowKind::Pair)
            .find(|r| (r.members[0] == a && r.members[1] == b) || (r.members[0] == b && r.members[1] == a))
    }

    pub fn union(&self) -> Option<&CoverageRow> {
        self.rows_of(RowKind::Union).next()
    }
}

fn score(lexicon: &Lexicon, instances: &[&TaggedInstance], mode: CoverageMode, pdir: &PdirClass) -> (Cell, Vec<Miss>) {
    let mut misses = Vec::new();
    for inst in instances {
        let reason = match lexicon.get(&inst.lemma, &inst.pos) {
            None => Some(MissReason::MissingEntry),
            Some(entry) => miss_reason(entry, inst, mode, pdir),
        };
        if let Some(reason) = reason {
            misses.push(Miss {
                instance: inst.id.clone(),
                reason,
            });
        }
    }
    (Cell::new(instances.len() - misses.len(), instances.len()), misses)
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Scores each annotator's lexicon, every pair of annotators, and all of
/// them together. Pair and union rows score the union lexicon of their
/// members.
pub fn coverage(
    lexicons: &[(String, Lexicon)],
    instances: &[TaggedInstance],
    mode: CoverageMode,
    pdir: &PdirClass,
    include_flagged: bool,
) -> Result<CoverageReport, EvalError> {
    let selected: Vec<&TaggedInstance> = instances
        .iter()
        .filter(|i| include_flagged || i.flag.is_none())
        .collect();
    if selected.is_empty() {
        return Err(EvalError::EmptyInstanceSet);
    }
    let mut rows = Vec::new();
    let mut push = |kind, members: Vec<String>, lex: &Lexicon| {
        let (cell, misses) = score(lex, &selected, mode, pdir);
        rows.push(CoverageRow {
            kind,
            members,
            cell,
            fraction: cell.fraction(),
            misses,
        });
    };
    for (name, lex) in lexicons {
        push(RowKind::Individual, vec![name.clone()], lex);
    }
    for i in 0..lexicons.len() {
        for j in i + 1..lexicons.len() {
            let (merged, _) = union_lexicon(&[&lexicons[i].1, &lexicons[j].1]);
            push(
                RowKind::Pair,
                vec![lexicons[i].0.clone(), lexicons[j].0.clone()],
                &merged,
            );
        }
    }
    if !lexicons.is_empty() {
        let all: Vec<&Lexicon> = lexicons.iter().map(|(_, l)| l).collect();
        let (merged, _) = union_lexicon(&all);
        push(
            RowKind::Union,
            lexicons.iter().map(|(n, _)| n.clone()).collect(),
            &merged,
        );
    }
    let individual_mean = mean(rows.iter().filter(|r| r.kind == RowKind::Individual).map(|r| r.fraction));
    let pair_mean = mean(rows.iter().filter(|r| r.kind == RowKind::Pair).map(|r| r.fraction));
    Ok(CoverageReport {
        mode,
        include_flagged,
        rows,
        individual_mean,
        pair_mean,
    })
}
