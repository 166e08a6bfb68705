//! Plain-text rendering of evaluation reports.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::agreement::AgreementReport;
use super::coverage::{coverage, CoverageMode, CoverageReport, RowKind};
use super::instance::TaggedInstance;
use super::EvalError;
use crate::lexicon::{Lexicon, PdirClass};

/// One coverage report per mode, over the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTable {
    pub reports: Vec<CoverageReport>,
}

pub fn coverage_all_modes(
    lexicons: &[(String, Lexicon)],
    instances: &[TaggedInstance],
    pdir: &PdirClass,
    include_flagged: bool,
) -> Result<CoverageTable, EvalError> {
    let reports = CoverageMode::ALL
        .iter()
        .map(|m| coverage(lexicons, instances, *m, pdir, include_flagged))
        .collect::<Result<_, _>>()?;
    Ok(CoverageTable { reports })
}

fn mode_heading(mode: CoverageMode) -> (&'static str, &'static str) {
    match mode {
        CoverageMode::ComplementsOnly => ("complements", "only"),
        CoverageMode::FullStrict => ("+preps/particles", "without p-dir"),
        CoverageMode::FullPdir => ("+preps/particles", "using p-dir"),
    }
}

fn mean_percent(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |f| format!("{}%", (f * 100.0 + 0.5).floor() as u32))
}

/// Aligned table: individual rows, their mean, pair rows, their mean, then
/// the union row. One column per report.
pub fn render_coverage(reports: &[CoverageReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let mut rows: Vec<(String, Vec<String>)> = Vec::new();
    let cells = |i: usize| -> Vec<String> {
        reports
            .iter()
            .map(|r| {
                let c = &r.rows[i].cell;
                format!("{}% ({}/{})", c.percent, c.covered, c.total)
            })
            .collect()
    };
    let indices = |kind: RowKind| -> Vec<usize> {
        first
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind == kind)
            .map(|(i, _)| i)
            .collect()
    };
    let individuals = indices(RowKind::Individual);
    let pairs = indices(RowKind::Pair);
    for &i in &individuals {
        rows.push((first.rows[i].label(), cells(i)));
    }
    if individuals.len() > 1 {
        rows.push(("individual mean".into(), reports.iter().map(|r| mean_percent(r.individual_mean)).collect()));
    }
    for &i in &pairs {
        rows.push((first.rows[i].label(), cells(i)));
    }
    if pairs.len() > 1 {
        rows.push(("pair mean".into(), reports.iter().map(|r| mean_percent(r.pair_mean)).collect()));
    }
    if individuals.len() > 2 {
        for i in indices(RowKind::Union) {
            rows.push(("union".into(), cells(i)));
        }
    }

    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(9);
    let col_w: Vec<usize> = reports
        .iter()
        .enumerate()
        .map(|(c, r)| {
            let (a, b) = mode_heading(r.mode);
            rows.iter().map(|(_, v)| v[c].len()).max().unwrap_or(0).max(a.len()).max(b.len())
        })
        .collect();

    let mut out = String::new();
    let line = |out: &mut String, label: &str, vals: Vec<&str>| {
        let mut s = format!("{label:<label_w$}");
        for (v, w) in vals.iter().zip(&col_w) {
            let _ = write!(s, "  {v:<w$}");
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut out, "", reports.iter().map(|r| mode_heading(r.mode).0).collect());
    line(&mut out, "annotator", reports.iter().map(|r| mode_heading(r.mode).1).collect());
    for (label, vals) in &rows {
        line(&mut out, label, vals.iter().map(String::as_str).collect());
    }
    out
}

fn rate(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |f| format!("{:.1}%", f * 100.0))
}

pub fn render_agreement(r: &AgreementReport) -> String {
    format!(
        "instances                      {}\n\
         flagged (excluded below)       {}\n\
         label agreement                {} ({}/{})\n\
         label agreement, unflagged     {} ({}/{})\n\
         frame agreement | labels agree {} ({}/{})\n",
        r.n_instances,
        r.n_flagged_excluded,
        rate(Some(r.overall_rate)),
        r.label_agreements,
        r.n_instances,
        rate(r.unflagged_rate),
        r.unflagged_label_agreements,
        r.n_instances - r.n_flagged_excluded,
        rate(r.frame_agreement_given_label_agreement),
        r.frame_agreements_given_label,
        r.label_agreements,
    )
}
