//! Staged multi-turn training data for tag-based grammatical error
//! correction.
//!
//! The crate works on pre-tokenized sentences only. It aligns erroneous and
//! corrected sentences, turns the alignment into per-token editing-action
//! labels (`$KEEP`, `$DELETE`, `$APPEND_{t}`, `$REPLACE_{t}`), expands every
//! training pair into a chain of partially corrected sentences, and scores
//! system output per label kind.
//!
//! Numeric code in [`eval`] is generic over [`num_traits::Float`]; the
//! aliases below fix the scalar to `f64` (and `f32` where useful).

pub mod align;
pub mod construct;
pub mod error;
pub mod eval;
pub mod labels;
pub mod synth;
pub mod textcore;

pub use align::{align, apply_script, filter_script, EditKind, EditOp, EditScript};
pub use construct::{
    build_intermediate, construct_corpus, corpus_stats, emit_turns, ConstructOptions, CorpusStats,
    Strategy, TurnInstance,
};
pub use error::{Error, Result};
pub use labels::{
    apply_labels, derive_labels, ged_labels, iterate_derive, EditLabel, GedLabelSequence,
    LabelSequence,
};
pub use textcore::{ParallelInstance, Sentence, TurnRecord};

pub type EvalReport = eval::EvalReport<f64>;
pub type KindScore = eval::KindScore<f64>;
pub type QuantReport = eval::QuantReport<f64>;
pub type LossReport = eval::LossReport<f64>;
pub type LossReport32 = eval::LossReport<f32>;
pub type LossInput = eval::LossInput<f64>;
