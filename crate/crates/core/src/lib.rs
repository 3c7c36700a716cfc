//! Corpus toolkit for end-to-end relation extraction over standoff
//! annotations with discontinuous and nested entities.
//!
//! The stages, in pipeline order:
//!
//! * [`standoff`]: parse and write `.txt`/`.ann` document pairs.
//! * [`repair`]: fix dangling relation arguments, off-by-one entity ends and
//!   out-of-order fragments.
//! * [`corpus`]: entity shape classes, corpus counts, train/dev/test splits.
//! * [`flatten`]: render discontinuous entities as contiguous text.
//! * [`schema`]: encode gold relations as generation targets and decode model
//!   output back into triples.
//! * [`eval`]: strict triple scoring and error categorization.

pub mod corpus;
pub mod eval;
pub mod flatten;
pub mod io;
pub mod repair;
pub mod schema;
pub mod standoff;
pub mod types;

pub use corpus::{classify_shape, corpus_statistics, split_corpus, CorpusStats, ShapeClass, SplitSpec, Splits};
pub use eval::{categorize_errors, collapse_duplicates, score, ErrorCategory, ErrorRecord, MatchConfig, ScoreReport};
pub use flatten::{flatten_document, OffsetMap};
pub use repair::{repair_all, RepairLog, RepairRule};
pub use schema::{
    build_prompt, decode_target, encode_target, normalize_generation, PredicateNounMap, SchemaKind, Triple,
};
pub use standoff::{
    parse_document, serialize_document, AnnotatedDocument, EntityMention, RelationInstance, TextDocument,
};
pub use types::{EntityType, Predicate, Span};
