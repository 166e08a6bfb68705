//! Regular inflection, used to widen concordance lookups.
//!
//! Nouns take -s/-es/-ies; verbs take -s/-es/-ies, -ed/-d/-ied and -ing with
//! final-e deletion. Consonant doubling is not attempted (`stop` gives
//! `stoped`); irregular and doubled forms come from the entry's morphology
//! overrides.

use std::collections::BTreeSet;

use super::entry::{Entry, PartOfSpeech};
use super::LexiconError;

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn consonant_y(word: &str) -> bool {
    let mut rev = word.chars().rev();
    matches!((rev.next(), rev.next()), (Some('y'), Some(c)) if !is_vowel(c))
}

fn plural_s(word: &str) -> String {
    if ["s", "x", "z", "ch", "sh"].iter().any(|suf| word.ends_with(suf)) {
        format!("{word}es")
    } else if consonant_y(word) {
        format!("{}ies", &word[..word.len() - 1])
    } else {
        format!("{word}s")
    }
}

fn past_ed(word: &str) -> String {
    if word.ends_with('e') {
        format!("{word}d")
    } else if consonant_y(word) {
        format!("{}ied", &word[..word.len() - 1])
    } else {
        format!("{word}ed")
    }
}

fn pres_part(word: &str) -> String {
    // "make" -> "making", but "see" -> "seeing"
    if word.ends_with('e') && !word.ends_with("ee") && word.len() > 2 {
        format!("{}ing", &word[..word.len() - 1])
    } else {
        format!("{word}ing")
    }
}

/// The base form plus regular inflections, each replaced by the entry's
/// morphology override when present.
pub fn inflections(entry: &Entry) -> Result<BTreeSet<String>, LexiconError> {
    let base = entry.orth.as_str();
    let regular: Vec<(&str, String)> = match entry.pos {
        PartOfSpeech::Noun => vec![("plural", plural_s(base))],
        PartOfSpeech::Verb => vec![
            ("pres-3sg", plural_s(base)),
            ("past", past_ed(base)),
            ("past-part", past_ed(base)),
            ("pres-part", pres_part(base)),
        ],
        PartOfSpeech::Adjective => vec![],
        ref other => {
            return Err(LexiconError::Usage(format!(
                "inflections are defined for nouns, verbs and adjectives, not `{other}`"
            )))
        }
    };
    let mut out = BTreeSet::from([base.to_string()]);
    for (key, form) in regular {
        match entry.morphology.get(key) {
            Some(overrides) => out.extend(overrides.iter().cloned()),
            None => {
                out.insert(form);
            }
        }
    }
    for key in entry.pos.morph_keys() {
        if let Some(forms) = entry.morphology.get(*key) {
            out.extend(forms.iter().cloned());
        }
    }
    Ok(out)
}

/// Forms to look up in a corpus: inflections where defined, otherwise just
/// the headword.
pub fn surface_forms(entry: &Entry) -> BTreeSet<String> {
    inflections(entry).unwrap_or_else(|_| BTreeSet::from([entry.orth.clone()]))
}
