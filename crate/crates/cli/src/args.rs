use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use tmtc_core::EditKind;

pub const SCHEMA: &str = r#"JSONL schema (one object per line, keys in this order):
  {"origin_id": int, "turn": int, "strategy": string, "src": [string], "tgt": [string], "labels": [string], "mask": [0|1]}
labels[i] is one of "$KEEP", "$DELETE", "$APPEND_<t>", "$REPLACE_<t>" with the token <t> written verbatim,
and len(labels) == len(mask) == len(src).
When the slot before the first source token carries a non-$KEEP label or a 0 mask bit, it is written as
element 0 of labels and mask, both arrays are one longer than src, and a trailing key "sentinel": true is added.
strategy is one of "random:<ratio>", "append-first", "delete-first", "replace-first",
"ordered:<kinds>" (kinds joined by '+' from app/rep/del), "kturn:<k>" or "original"."#;

#[derive(Debug, Parser)]
#[command(name = "tmtc", version, about = "Staged multi-turn training corpora and per-label evaluation for tag-based grammatical error correction", after_help = SCHEMA)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Base seed for every random choice.
    #[arg(long, global = true, env = "TMTC_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    Random,
    AppendFirst,
    DeleteFirst,
    ReplaceFirst,
    Ordered,
    Kturn,
}

pub fn parse_kind(s: &str) -> Result<EditKind, String> {
    EditKind::parse(s)
        .ok_or_else(|| format!("unknown edit kind {s:?}; expected append, delete or replace"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive editing-action labels for each source/reference pair.
    #[command(after_help = SCHEMA)]
    Derive {
        #[arg(long)]
        src: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Output JSONL; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the slot before the first token when it is needed.
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
        sentinel: bool,
    },
    /// Apply the labels of a JSONL file to its sources and write the results as text.
    #[command(after_help = SCHEMA)]
    Apply {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a multi-turn training corpus.
    #[command(after_help = SCHEMA)]
    Construct {
        #[arg(long)]
        src: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = StrategyName::Random)]
        strategy: StrategyName,
        /// Share of error units corrected in the intermediate sentence (random).
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        /// Number of turns (kturn).
        #[arg(long, default_value_t = 3)]
        turns: usize,
        /// Correction order, e.g. app+rep+del (ordered).
        #[arg(long, default_value = "app+rep+del")]
        order: String,
        /// Also emit each expanded instance as a single-turn original.
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
        include_original: bool,
        /// Correct every kind except the featured one in the first turn.
        #[arg(long)]
        invert_typefirst: bool,
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
        sentinel: bool,
        /// Also write the statistics as JSON to this path.
        #[arg(long)]
        stats_json: Option<PathBuf>,
    },
    /// Summarize a JSONL corpus.
    #[command(after_help = SCHEMA)]
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Per-label precision, recall and F-beta of hypotheses against references.
    #[command(after_help = SCHEMA)]
    Eval {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Kinds to report, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_value = "replace,append,delete")]
        labels: Vec<EditKind>,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Match edits on anchor and kind only, ignoring the tokens.
        #[arg(long)]
        kind_only: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Measure how correcting one kind first changes the other kinds.
    #[command(after_help = SCHEMA)]
    Quantexp {
        #[arg(long)]
        src: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        action: EditKind,
        /// Write the raw and checked subsets into this directory and exit.
        #[arg(long, conflicts_with_all = ["pred_raw", "pred_checked"])]
        prepare: Option<PathBuf>,
        /// Model output on the raw subset, one line per subset sentence.
        #[arg(long, required_unless_present = "prepare")]
        pred_raw: Option<PathBuf>,
        /// Model output on the checked subset.
        #[arg(long, required_unless_present = "prepare")]
        pred_checked: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        kind_only: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Convert an M2 file into parallel text.
    #[command(after_help = SCHEMA)]
    M2 {
        #[arg(long)]
        convert: PathBuf,
        #[arg(long, default_value_t = 0)]
        annotator: u32,
        #[arg(long)]
        out_src: PathBuf,
        #[arg(long)]
        out_ref: PathBuf,
    },
    /// Detection and correction losses from per-position log-probabilities.
    #[command(after_help = SCHEMA)]
    Loss {
        /// JSONL with log_probs, gold and optional mask, ged_log_probs, ged_gold, second.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Derive { .. } => "derive",
            Command::Apply { .. } => "apply",
            Command::Construct { .. } => "construct",
            Command::Stats { .. } => "stats",
            Command::Eval { .. } => "eval",
            Command::Quantexp { .. } => "quantexp",
            Command::M2 { .. } => "m2",
            Command::Loss { .. } => "loss",
        }
    }
}
