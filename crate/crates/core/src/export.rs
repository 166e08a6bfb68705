//! Alternative renderings of a lexicon: SGML-style markup and flat
//! tab-separated records. Both are write-only.

use std::fmt::Write;

use crate::lexicon::{Entry, Lexicon};
use crate::sexpr::SExpr;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn sgml_params(out: &mut String, pval: &Option<Vec<String>>, params: &std::collections::BTreeMap<String, SExpr>) {
    if let Some(p) = pval {
        for v in p {
            let _ = write!(out, "<pval>{}</pval>", escape(v));
        }
    }
    for (k, v) in params {
        let _ = write!(out, "<param name=\"{}\">{}</param>", escape(k), escape(&v.to_string()));
    }
}

fn sgml_entry(out: &mut String, e: &Entry) {
    let _ = writeln!(out, "<entry pos=\"{}\" orth=\"{}\">", escape(e.pos.as_str()), escape(&e.orth));
    for (key, forms) in &e.morphology {
        for f in forms {
            let _ = writeln!(out, "  <morph key=\"{}\">{}</morph>", escape(key), escape(f));
        }
    }
    for f in &e.features {
        let _ = write!(out, "  <feature name=\"{}\">", escape(&f.name));
        sgml_params(out, &f.pval, &f.params);
        out.push_str("</feature>\n");
    }
    for s in &e.subc {
        let _ = write!(out, "  <subc frame=\"{}\">", escape(&s.frame));
        sgml_params(out, &s.pval, &s.params);
        out.push_str("</subc>\n");
    }
    out.push_str("</entry>\n");
}

/// Markup following `docs/comlex.dtd`. Entries appear in lexicon order.
pub fn to_sgml(lexicon: &Lexicon) -> String {
    let mut out = String::from("<lexicon>\n");
    for e in lexicon.iter() {
        sgml_entry(&mut out, e);
    }
    out.push_str("</lexicon>\n");
    out
}

fn field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

fn join_pval(p: &Option<Vec<String>>) -> String {
    p.as_ref().map(|v| v.iter().map(|s| field(s)).collect::<Vec<_>>().join("|")).unwrap_or_default()
}

fn join_params(params: &std::collections::BTreeMap<String, SExpr>) -> String {
    params
        .iter()
        .map(|(k, v)| format!(":{k} {}", field(&v.to_string())))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One tab-separated line per entry component:
/// `orth pos kind name values params`, where kind is `entry`, `morph`,
/// `feature` or `subc` and values are `|`-joined.
pub fn to_records(lexicon: &Lexicon) -> String {
    let mut out = String::new();
    for e in lexicon.iter() {
        let (orth, pos) = (field(&e.orth), e.pos.as_str());
        let _ = writeln!(out, "{orth}\t{pos}\tentry\t\t\t");
        for (key, forms) in &e.morphology {
            let _ = writeln!(out, "{orth}\t{pos}\tmorph\t{key}\t{}\t", forms.iter().map(|s| field(s)).collect::<Vec<_>>().join("|"));
        }
        for f in &e.features {
            let _ = writeln!(out, "{orth}\t{pos}\tfeature\t{}\t{}\t{}", f.name, join_pval(&f.pval), join_params(&f.params));
        }
        for s in &e.subc {
            let _ = writeln!(out, "{orth}\t{pos}\tsubc\t{}\t{}\t{}", s.frame, join_pval(&s.pval), join_params(&s.params));
        }
    }
    out
}
