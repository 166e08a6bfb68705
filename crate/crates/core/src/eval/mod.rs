//! Lexicon quality measurements over gold-tagged instances: coverage per
//! annotator, per pair and for the union of all annotators; raw
//! inter-annotator agreement; external-scheme comparison; spurious-frame
//! estimates.

mod agreement;
mod coverage;
mod external;
mod instance;
mod report;
mod union;

use thiserror::Error;

pub use agreement::{agreement, AgreementReport};
pub use coverage::{
    coverage, instance_covered, percent_half_up, Cell, CoverageMode, CoverageReport, CoverageRow, Miss, MissReason,
    RowKind,
};
pub use external::{
    attested_analyses, external_codes_for_lexicon, external_coverage, spurious_rate, ExternalMode, MappingTable,
    UNMAPPABLE,
};
pub use instance::{frame_frequencies, read_instances, write_instances, ArgLabel, Flag, TaggedInstance, TSV_HEADER};
pub use report::{coverage_all_modes, render_agreement, render_coverage, CoverageTable};
pub use union::union_lexicon;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no instances to score")]
    EmptyInstanceSet,
    #[error("instance {instance} does not belong to entry {entry}")]
    KeyMismatch { instance: String, entry: String },
    #[error("annotation sets cover different ids (only in a: {only_a:?}; only in b: {only_b:?})")]
    IdSetMismatch { only_a: Vec<String>, only_b: Vec<String> },
    #[error("duplicate instance id `{0}`")]
    DuplicateId(String),
    #[error("line {line}: {message}")]
    Tsv { line: usize, message: String },
}
