use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tmtc_core::construct::ORIGINAL_TAG;
use tmtc_core::eval::{build_action_subsets, quantexp, score, MatchMode};
use tmtc_core::textcore::{parse_m2, read_lines, read_parallel, write_sentences};
use tmtc_core::{
    apply_labels, construct_corpus, corpus_stats, derive_labels, ConstructOptions, CorpusStats,
    EditKind, LossInput, LossReport, Strategy, TurnInstance, TurnRecord,
};

use crate::args::{Cli, Command, Format, StrategyName};
use crate::config::RunConfig;
use crate::{EXIT_DATA, EXIT_USAGE};

/// A failed run: bad arguments (exit 1) or bad input data (exit 2).
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Failure::Usage(e) | Failure::Data(e)) = self;
        if f.alternate() {
            write!(f, "{e:#}")
        } else {
            write!(f, "{e}")
        }
    }
}

impl From<tmtc_core::Error> for Failure {
    fn from(e: tmtc_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = Result<(), Failure>;

/// A JSON report: `{"config": ..., "report": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub config: RunConfig,
    pub report: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub records: Vec<LossReport>,
    /// Per-field mean over records; all zeros for empty input.
    pub mean: LossReport,
}

pub fn execute(cli: &Cli) -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.workers as usize)
        .build()
        .map_err(|e| Failure::Usage(e.into()))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Derive {
            src,
            reference,
            out,
            sentinel,
        } => derive(src, reference, out.as_deref(), *sentinel),
        Command::Apply { input, out } => apply(input, out.as_deref()),
        Command::Construct {
            src,
            reference,
            out,
            strategy,
            ratio,
            turns,
            order,
            include_original,
            invert_typefirst,
            sentinel,
            stats_json,
        } => {
            let strategy = build_strategy(*strategy, *ratio, *turns, order, *invert_typefirst)?;
            let config = RunConfig::from_cli(cli, Some(strategy.tag()));
            let options = ConstructOptions {
                seed: cli.global.seed,
                include_original: *include_original,
            };
            let corpus = read_parallel(src, reference)?;
            let turns = construct_corpus(&corpus, &strategy, &options)?;
            write_turns(&turns, out.as_deref(), *sentinel)?;
            let records: Vec<TurnRecord> = turns
                .iter()
                .map(|t| TurnRecord::from_instance(t, *sentinel))
                .collect();
            let stats = corpus_stats(&records);
            eprint!("{stats}");
            if let Some(path) = stats_json {
                write_json(
                    &Report {
                        config,
                        report: stats,
                    },
                    Some(path),
                )?;
            }
            Ok(())
        }
        Command::Stats { input, format } => {
            let records = tmtc_core::textcore::read_jsonl(input)?;
            let stats: CorpusStats = corpus_stats(&records);
            match format {
                Format::Text => write_text(&stats),
                Format::Json => write_json(
                    &Report {
                        config: RunConfig::from_cli(cli, None),
                        report: stats,
                    },
                    None,
                ),
            }
        }
        Command::Eval {
            src,
            hyp,
            reference,
            labels,
            beta,
            kind_only,
            format,
        } => {
            check_beta(*beta)?;
            let (sources, hyps, refs) =
                (read_lines(src)?, read_lines(hyp)?, read_lines(reference)?);
            let report = score(
                &sources,
                &hyps,
                &refs,
                &dedup_kinds(labels),
                *beta,
                match_mode(*kind_only),
            )?;
            match format {
                Format::Text => write_text(&report),
                Format::Json => write_json(
                    &Report {
                        config: RunConfig::from_cli(cli, None),
                        report,
                    },
                    None,
                ),
            }
        }
        Command::Quantexp {
            src,
            reference,
            action,
            prepare,
            pred_raw,
            pred_checked,
            beta,
            kind_only,
            format,
        } => {
            check_beta(*beta)?;
            let corpus = read_parallel(src, reference)?;
            if let Some(dir) = prepare {
                return prepare_subsets(&corpus, *action, dir);
            }
            let (Some(pred_raw), Some(pred_checked)) = (pred_raw, pred_checked) else {
                return Err(Failure::Usage(anyhow!(
                    "--pred-raw and --pred-checked are required without --prepare"
                )));
            };
            let report = quantexp(
                &corpus,
                &read_lines(pred_raw)?,
                &read_lines(pred_checked)?,
                *action,
                *beta,
                match_mode(*kind_only),
            )?;
            if report.subset_size == 0 {
                eprintln!("warning: no instance contains {} errors", action.name());
            }
            match format {
                Format::Text => write_text(&report),
                Format::Json => write_json(
                    &Report {
                        config: RunConfig::from_cli(cli, None),
                        report,
                    },
                    None,
                ),
            }
        }
        Command::M2 {
            convert,
            annotator,
            out_src,
            out_ref,
        } => {
            let doc = parse_m2(convert)?;
            let pairs = tmtc_core::textcore::m2_to_parallel(&doc, *annotator)?;
            write_sentences(pairs.iter().map(|p| &p.source), out_src)?;
            write_sentences(pairs.iter().map(|p| &p.reference), out_ref)?;
            Ok(())
        }
        Command::Loss { input, format } => {
            let summary = loss_summary(input)?;
            match format {
                Format::Text => write_loss_table(&summary),
                Format::Json => write_json(
                    &Report {
                        config: RunConfig::from_cli(cli, None),
                        report: summary,
                    },
                    None,
                ),
            }
        }
    }
}

fn build_strategy(
    name: StrategyName,
    ratio: f64,
    turns: usize,
    order: &str,
    inverted: bool,
) -> Result<Strategy, Failure> {
    let type_first = |kind| Ok(Strategy::TypeFirst { kind, inverted });
    let strategy = match name {
        StrategyName::Random => Strategy::random(ratio),
        StrategyName::AppendFirst => type_first(EditKind::Append),
        StrategyName::DeleteFirst => type_first(EditKind::Delete),
        StrategyName::ReplaceFirst => type_first(EditKind::Replace),
        StrategyName::Ordered => format!("ordered:{order}").parse(),
        StrategyName::Kturn => Strategy::k_turn(turns),
    };
    strategy.map_err(|e| Failure::Usage(e.into()))
}

fn check_beta(beta: f64) -> Outcome {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(anyhow!(
            "--beta must be a positive number, got {beta}"
        )))
    }
}

fn match_mode(kind_only: bool) -> MatchMode {
    if kind_only {
        MatchMode::KindOnly
    } else {
        MatchMode::Exact
    }
}

fn dedup_kinds(kinds: &[EditKind]) -> Vec<EditKind> {
    let mut out = Vec::with_capacity(kinds.len());
    for &k in kinds {
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, Failure> {
    let file =
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_turns(turns: &[TurnInstance], out: Option<&Path>, sentinel: bool) -> Outcome {
    tmtc_core::textcore::write_jsonl_to(output(out)?, turns, sentinel)?;
    Ok(())
}

fn write_text(value: &impl fmt::Display) -> Outcome {
    let mut out = output(None)?;
    write!(out, "{value}")?;
    out.flush()?;
    Ok(())
}

fn write_json(value: &impl Serialize, path: Option<&Path>) -> Outcome {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Data(e.into()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn derive(src: &Path, reference: &Path, out: Option<&Path>, sentinel: bool) -> Outcome {
    let corpus = read_parallel(src, reference)?;
    let turns: Vec<TurnInstance> = corpus
        .par_iter()
        .map(|inst| TurnInstance {
            origin_id: inst.id,
            turn: 0,
            strategy: ORIGINAL_TAG.to_owned(),
            source: inst.source.clone(),
            target: inst.reference.clone(),
            labels: derive_labels(&inst.source, &inst.reference),
            mask: vec![true; inst.source.len()],
            sentinel_mask: true,
        })
        .collect();
    write_turns(&turns, out, sentinel)
}

fn apply(input: &Path, out: Option<&Path>) -> Outcome {
    let records = tmtc_core::textcore::read_jsonl(input)?;
    let mut out = output(out)?;
    for (i, record) in records.iter().enumerate() {
        let labels = record
            .label_sequence()
            .with_context(|| format!("record {}", i + 1))?;
        let corrected =
            apply_labels(&record.src, &labels).with_context(|| format!("record {}", i + 1))?;
        writeln!(out, "{corrected}")?;
    }
    out.flush()?;
    Ok(())
}

fn prepare_subsets(
    corpus: &[tmtc_core::ParallelInstance],
    action: EditKind,
    dir: &PathBuf,
) -> Outcome {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let (raw, checked) = build_action_subsets(corpus, action);
    let name = action.name();
    for (suffix, subset) in [("", &raw), ("_checked", &checked)] {
        let stem = format!("d_{name}{suffix}");
        write_sentences(
            subset.iter().map(|p| &p.source),
            dir.join(format!("{stem}.src")),
        )?;
        write_sentences(
            subset.iter().map(|p| &p.reference),
            dir.join(format!("{stem}.ref")),
        )?;
    }
    if raw.is_empty() {
        eprintln!("warning: no instance contains {name} errors; the subset files are empty");
    } else {
        eprintln!(
            "{} of {} instances contain {name} errors",
            raw.len(),
            corpus.len()
        );
    }
    Ok(())
}

fn loss_summary(path: &Path) -> Result<LossSummary, Failure> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let input: LossInput =
            serde_json::from_str(&line).with_context(|| format!("line {}", i + 1))?;
        records.push(tmtc_core::eval::losses(&input).with_context(|| format!("line {}", i + 1))?);
    }
    let n = records.len().max(1) as f64;
    let sum = |f: fn(&LossReport) -> f64| records.iter().map(f).sum::<f64>() / n;
    let mean = LossReport::new(
        sum(|r| r.l_d),
        sum(|r| r.l_c),
        sum(|r| r.l_c1),
        sum(|r| r.l_c2),
    );
    Ok(LossSummary { records, mean })
}

fn write_loss_table(summary: &LossSummary) -> Outcome {
    let mut out = output(None)?;
    writeln!(
        out,
        "{:<6} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "line", "L_d", "L_c", "L_c1", "L_c2", "total"
    )?;
    let row = |out: &mut Box<dyn Write>, name: &str, r: &LossReport| {
        writeln!(
            out,
            "{name:<6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            r.l_d, r.l_c, r.l_c1, r.l_c2, r.l_total
        )
    };
    for (i, r) in summary.records.iter().enumerate() {
        row(&mut out, &(i + 1).to_string(), r)?;
    }
    row(&mut out, "mean", &summary.mean)?;
    out.flush()?;
    Ok(())
}
