use std::collections::BTreeMap;

use crate::lexicon::{DiagCode, Diagnostic, Entry, Lexicon};
use crate::sexpr::SExpr;

fn ordered_union(into: &mut Vec<String>, from: &[String]) {
    for x in from {
        if !into.contains(x) {
            into.push(x.clone());
        }
    }
}

fn merge_pval(into: &mut Option<Vec<String>>, from: &Option<Vec<String>>) {
    match (into.as_mut(), from) {
        (_, None) => {}
        (None, Some(f)) => *into = Some(f.clone()),
        (Some(i), Some(f)) => ordered_union(i, f),
    }
}

fn merge_params(
    entry: &Entry,
    owner: &str,
    into: &mut BTreeMap<String, SExpr>,
    from: &BTreeMap<String, SExpr>,
    diags: &mut Vec<Diagnostic>,
) {
    for (k, v) in from {
        match into.get(k) {
            None => {
                into.insert(k.clone(), v.clone());
            }
            Some(existing) if existing != v => diags.push(Diagnostic::warning(
                DiagCode::ParamConflict,
                entry.locus(),
                format!("`{owner}` :{k} differs between lexicons ({existing} vs {v}); kept the first"),
            )),
            Some(_) => {}
        }
    }
}

fn merge_entry(into: &mut Entry, from: &Entry, diags: &mut Vec<Diagnostic>) {
    let locus = into.locus();
    for (key, forms) in &from.morphology {
        match into.morphology.get_mut(key) {
            None => {
                into.morphology.insert(key.clone(), forms.clone());
            }
            Some(existing) if existing != forms => {
                diags.push(Diagnostic::warning(
                    DiagCode::MorphologyConflict,
                    locus.clone(),
                    format!(":{key} differs between lexicons; keeping all forms"),
                ));
                ordered_union(existing, forms);
            }
            Some(_) => {}
        }
    }
    let snapshot = into.clone();
    for f in &from.features {
        match into.features.iter_mut().find(|x| x.name == f.name) {
            None => into.features.push(f.clone()),
            Some(x) => {
                merge_pval(&mut x.pval, &f.pval);
                merge_params(&snapshot, &f.name, &mut x.params, &f.params, diags);
            }
        }
    }
    for s in &from.subc {
        match into.subc.iter_mut().find(|x| x.frame == s.frame) {
            None => into.subc.push(s.clone()),
            Some(x) => {
                merge_pval(&mut x.pval, &s.pval);
                merge_params(&snapshot, &s.frame, &mut x.params, &s.params, diags);
            }
        }
    }
}

/// Per-headword merge of several lexicons.
///
/// Entries are matched on (orth, pos); subcategorization and feature specs
/// are matched by name and their `:pval` lists joined in first-seen order.
/// Conflicting morphology or parameters are reported as warnings.
pub fn union_lexicon(lexicons: &[&Lexicon]) -> (Lexicon, Vec<Diagnostic>) {
    let mut out = Lexicon::new();
    let mut diags = Vec::new();
    for lex in lexicons {
        for entry in lex.iter() {
            let merged = match out.get(&entry.orth, &entry.pos) {
                None => entry.clone(),
                Some(existing) => {
                    let mut e = existing.clone();
                    merge_entry(&mut e, entry, &mut diags);
                    e
                }
            };
            out.upsert(merged);
        }
    }
    (out, diags)
}
