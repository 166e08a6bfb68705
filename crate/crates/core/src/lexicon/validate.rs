use std::collections::HashSet;

use super::diag::{DiagCode, Diagnostic};
use super::entry::Entry;
use super::frame::{FrameKind, FrameRegistry};
use super::pdir::{expand_pdir, is_pdir_token, PdirClass};

fn check_pval(entry: &Entry, owner: &str, pval: &[String], pdir: &PdirClass, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    let mut literal_dup = false;
    for p in pval {
        if !seen.insert(p.as_str()) {
            literal_dup = true;
            out.push(Diagnostic::error(
                DiagCode::DuplicatePrep,
                entry.locus(),
                format!("`{owner}` lists \"{p}\" more than once"),
            ));
        }
    }
    if !pval.iter().any(|p| is_pdir_token(p)) {
        return;
    }
    if pdir.is_empty() {
        out.push(Diagnostic::error(
            DiagCode::EmptyPdirClass,
            entry.locus(),
            format!("`{owner}` uses p-dir but the p-dir class is empty"),
        ));
        return;
    }
    if literal_dup {
        return;
    }
    let overlap: Vec<&str> = pval
        .iter()
        .filter(|p| !is_pdir_token(p) && pdir.contains(p))
        .map(String::as_str)
        .collect();
    if !overlap.is_empty() {
        debug_assert!(expand_pdir(pval, pdir).is_ok());
        out.push(Diagnostic::warning(
            DiagCode::DuplicatePrep,
            entry.locus(),
            format!(
                "`{owner}` lists {} alongside p-dir, which already includes it",
                overlap.iter().map(|p| format!("\"{p}\"")).collect::<Vec<_>>().join(", ")
            ),
        ));
    }
}

/// Checks an entry against a frame registry and p-dir class.
///
/// Output order follows the entry (morphology, features, subc), so it is
/// deterministic regardless of how the registry was built.
pub fn validate_entry(entry: &Entry, registry: &FrameRegistry, pdir: &PdirClass) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let allowed = entry.pos.morph_keys();
    for key in entry.morphology.keys() {
        if !allowed.contains(&key.as_str()) {
            out.push(Diagnostic::error(
                DiagCode::UnknownMorphKey,
                entry.locus(),
                format!(":{key} is not a morphology key for {}", entry.pos),
            ));
        }
    }
    for feature in &entry.features {
        if let Some(pval) = &feature.pval {
            check_pval(entry, &feature.name, pval, pdir, &mut out);
        }
    }
    let kind = FrameKind::for_pos(&entry.pos);
    for spec in &entry.subc {
        let frame = kind.and_then(|k| registry.get(k, &spec.frame));
        match frame {
            None => out.push(Diagnostic::error(
                DiagCode::UnknownFrame,
                entry.locus(),
                match kind {
                    Some(k) => format!("no {k} named `{}`", spec.frame),
                    None => format!("{} entries cannot take frame `{}`", entry.pos, spec.frame),
                },
            )),
            Some(frame) => match (&spec.pval, frame.requires_pval) {
                (None, true) => out.push(Diagnostic::error(
                    DiagCode::MissingPval,
                    entry.locus(),
                    format!("frame `{}` requires :pval", spec.frame),
                )),
                (Some(_), false) => out.push(Diagnostic::error(
                    DiagCode::UnexpectedPval,
                    entry.locus(),
                    format!("frame `{}` does not take :pval", spec.frame),
                )),
                _ => {}
            },
        }
        if let Some(pval) = &spec.pval {
            check_pval(entry, &spec.frame, pval, pdir, &mut out);
        }
    }
    out
}
