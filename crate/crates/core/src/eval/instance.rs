//! Gold-tagged corpus instances and their TSV file format.
//!
//! ```text
//! id  lemma  pos  frame  preps  labels  flag  annotator  sentence
//! ```
//!
//! `preps` and `labels` are comma-separated and may be empty. Labels are
//! `a` (argument) or `j` (adjunct), one per postverbal constituent.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::lexicon::PartOfSpeech;

pub const TSV_HEADER: [&str; 9] = [
    "id", "lemma", "pos", "frame", "preps", "labels", "flag", "annotator", "sentence",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Difficult,
    Ambiguous,
    Figurative,
}

impl Flag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Flag::Difficult => "difficult",
            Flag::Ambiguous => "ambiguous",
            Flag::Figurative => "figurative",
        }
    }
}

impl FromStr for Flag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "difficult" => Ok(Flag::Difficult),
            "ambiguous" => Ok(Flag::Ambiguous),
            "figurative" => Ok(Flag::Figurative),
            other => Err(format!("unknown flag `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgLabel {
    Argument,
    Adjunct,
}

impl ArgLabel {
    pub fn code(&self) -> char {
        match self {
            ArgLabel::Argument => 'a',
            ArgLabel::Adjunct => 'j',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedInstance {
    pub id: String,
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub sentence: String,
    pub frame: String,
    pub preps: Vec<String>,
    pub flag: Option<Flag>,
    pub annotator: String,
    pub labels: Vec<ArgLabel>,
}

impl TaggedInstance {
    pub fn new(id: impl Into<String>, lemma: impl Into<String>, pos: PartOfSpeech, frame: impl Into<String>) -> Self {
        TaggedInstance {
            id: id.into(),
            lemma: lemma.into(),
            pos,
            sentence: String::new(),
            frame: frame.into(),
            preps: Vec::new(),
            flag: None,
            annotator: String::new(),
            labels: Vec::new(),
        }
    }

    pub fn with_preps<I, S>(mut self, preps: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.preps = preps.into_iter().map(Into::into).collect();
        self
    }

    /// Checks the field invariants that the TSV reader also enforces.
    pub fn check(&self) -> Result<(), String> {
        let no_tabs = |name: &str, v: &str| {
            if v.contains(['\t', '\n', '\r']) {
                Err(format!("{name} contains a tab or newline"))
            } else {
                Ok(())
            }
        };
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.lemma.is_empty() {
            return Err("empty lemma".into());
        }
        if self.frame.is_empty() {
            return Err("empty frame".into());
        }
        for (n, v) in [
            ("id", &self.id),
            ("lemma", &self.lemma),
            ("frame", &self.frame),
            ("annotator", &self.annotator),
            ("sentence", &self.sentence),
        ] {
            no_tabs(n, v)?;
        }
        for p in &self.preps {
            if p.is_empty() || p.contains(',') {
                return Err(format!("bad preposition `{p}`"));
            }
            no_tabs("preps", p)?;
        }
        Ok(())
    }
}

impl fmt::Display for TaggedInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: String = self
            .labels
            .iter()
            .map(|l| l.code().to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.id,
            self.lemma,
            self.pos,
            self.frame,
            self.preps.join(","),
            labels,
            self.flag.map_or("", |fl| fl.as_str()),
            self.annotator,
            self.sentence
        )
    }
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Reads an instance file. Ids must be unique within the file.
pub fn read_instances(text: &str) -> Result<Vec<TaggedInstance>, EvalError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty());
    let bad = |line: usize, message: String| EvalError::Tsv { line, message };

    let Some((hline, header)) = lines.next() else {
        return Err(bad(1, "missing header row".into()));
    };
    let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
    if cols != TSV_HEADER {
        return Err(bad(hline, format!("header must be: {}", TSV_HEADER.join("\\t"))));
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (n, line) in lines {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != TSV_HEADER.len() {
            return Err(bad(n, format!("expected {} columns, found {}", TSV_HEADER.len(), f.len())));
        }
        let pos: PartOfSpeech = f[2].parse().map_err(|e| bad(n, e))?;
        let labels = split_list(f[5])
            .iter()
            .map(|code| match code.as_str() {
                "a" => Ok(ArgLabel::Argument),
                "j" => Ok(ArgLabel::Adjunct),
                other => Err(bad(n, format!("label `{other}` is neither a nor j"))),
            })
            .collect::<Result<_, _>>()?;
        let flag = match f[6].trim() {
            "" => None,
            s => Some(s.parse().map_err(|e| bad(n, e))?),
        };
        let inst = TaggedInstance {
            id: f[0].trim().to_string(),
            lemma: f[1].trim().to_string(),
            pos,
            frame: f[3].trim().to_lowercase(),
            preps: split_list(f[4]),
            labels,
            flag,
            annotator: f[7].trim().to_string(),
            sentence: f[8].to_string(),
        };
        inst.check().map_err(|e| bad(n, e))?;
        if !seen.insert(inst.id.clone()) {
            return Err(bad(n, format!("duplicate id `{}`", inst.id)));
        }
        out.push(inst);
    }
    Ok(out)
}

/// Writes an instance file, header included.
pub fn write_instances(instances: &[TaggedInstance]) -> String {
    let mut out = TSV_HEADER.join("\t");
    out.push('\n');
    for inst in instances {
        out.push_str(&inst.to_string());
        out.push('\n');
    }
    out
}

/// Instance counts per (lemma, frame).
pub fn frame_frequencies(instances: &[TaggedInstance]) -> BTreeMap<(String, String), usize> {
    let mut out = BTreeMap::new();
    for inst in instances {
        *out.entry((inst.lemma.clone(), inst.frame.clone())).or_insert(0) += 1;
    }
    out
}
