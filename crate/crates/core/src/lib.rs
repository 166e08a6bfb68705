//! Tools for a COMLEX-style syntax lexicon: an S-expression reader and
//! printer, a typed entry and frame model with validation, a corpus
//! concordancer, coverage and agreement measurements, and a versioned
//! file-backed store.

pub mod corpus;
pub mod eval;
pub mod export;
pub mod lexicon;
pub mod sexpr;
pub mod store;

pub use lexicon::{Entry, Lexicon, ParseMode, PartOfSpeech};
pub use sexpr::{parse_sexprs, print_sexpr, SExpr};
