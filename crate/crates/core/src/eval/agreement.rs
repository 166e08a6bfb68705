//! Raw agreement between two annotators on argument/adjunct labelling.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::instance::TaggedInstance;
use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub n_instances: usize,
    /// Ids flagged by at least one annotator.
    pub n_flagged_excluded: usize,
    pub label_agreements: usize,
    pub unflagged_label_agreements: usize,
    pub frame_agreements_given_label: usize,
    /// Label agreement over all ids.
    pub overall_rate: f64,
    /// Label agreement over ids flagged by neither annotator; `None` if all
    /// were flagged.
    pub unflagged_rate: Option<f64>,
    /// Among label-agreeing ids, the share that also agree on the frame.
    pub frame_agreement_given_label_agreement: Option<f64>,
}

fn by_id(xs: &[TaggedInstance]) -> Result<BTreeMap<&str, &TaggedInstance>, EvalError> {
    let mut out = BTreeMap::new();
    for x in xs {
        if out.insert(x.id.as_str(), x).is_some() {
            return Err(EvalError::DuplicateId(x.id.clone()));
        }
    }
    Ok(out)
}

fn ratio(n: usize, d: usize) -> Option<f64> {
    (d > 0).then(|| n as f64 / d as f64)
}

/// Pairs the two annotation sets by instance id and compares them.
pub fn agreement(a: &[TaggedInstance], b: &[TaggedInstance]) -> Result<AgreementReport, EvalError> {
    let a = by_id(a)?;
    let b = by_id(b)?;
    let ids_a: BTreeSet<&str> = a.keys().copied().collect();
    let ids_b: BTreeSet<&str> = b.keys().copied().collect();
    if ids_a != ids_b {
        return Err(EvalError::IdSetMismatch {
            only_a: ids_a.difference(&ids_b).map(|s| s.to_string()).collect(),
            only_b: ids_b.difference(&ids_a).map(|s| s.to_string()).collect(),
        });
    }
    if ids_a.is_empty() {
        return Err(EvalError::EmptyInstanceSet);
    }

    let (mut agree, mut flagged, mut unflagged_agree, mut frame_agree) = (0, 0, 0, 0);
    for id in &ids_a {
        let (x, y) = (a[id], b[id]);
        let labels_equal = x.labels == y.labels;
        let is_flagged = x.flag.is_some() || y.flag.is_some();
        if labels_equal {
            agree += 1;
            if x.frame == y.frame {
                frame_agree += 1;
            }
        }
        if is_flagged {
            flagged += 1;
        } else if labels_equal {
            unflagged_agree += 1;
        }
    }
    let n = ids_a.len();
    Ok(AgreementReport {
        n_instances: n,
        n_flagged_excluded: flagged,
        label_agreements: agree,
        unflagged_label_agreements: unflagged_agree,
        frame_agreements_given_label: frame_agree,
        overall_rate: agree as f64 / n as f64,
        unflagged_rate: ratio(unflagged_agree, n - flagged),
        frame_agreement_given_label_agreement: ratio(frame_agree, agree),
    })
}
