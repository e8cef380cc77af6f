//! Sentence data model, corpus ingestion and the JSONL record schema.

mod jsonl;
mod m2;
mod parallel;
mod sentence;

pub use jsonl::{read_jsonl, write_jsonl, write_jsonl_to, TurnRecord};
pub use m2::{
    annotate, m2_to_parallel, parse_m2, parse_m2_str, render_m2, M2Annotation, M2Document, M2Entry,
};
pub use parallel::{read_lines, read_parallel, write_sentences, ParallelInstance};
pub use sentence::Sentence;
