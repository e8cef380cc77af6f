use std::collections::BTreeSet;
use std::fmt;

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::Counts;
use crate::align::{align, EditKind, EditOp};
use crate::error::{Error, Result};
use crate::textcore::Sentence;

/// Two edits match iff anchor, kind and argument tokens all agree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EditMatchKey {
    /// Source position; -1 for an insertion before the first token.
    pub anchor: i64,
    pub kind: EditKind,
    pub tokens: Vec<String>,
}

impl EditMatchKey {
    pub fn from_op(op: &EditOp, mode: MatchMode) -> Option<Self> {
        let kind = op.kind()?;
        let tokens = match mode {
            MatchMode::Exact => op.new_tokens().to_vec(),
            MatchMode::KindOnly => Vec::new(),
        };
        Some(Self {
            anchor: op.anchor(),
            kind,
            tokens,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// Anchor, kind and argument tokens must agree.
    #[default]
    Exact,
    /// Argument tokens are ignored: `$REPLACE_few` matches `$REPLACE_less`.
    KindOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindScore<T> {
    pub kind: EditKind,
    pub num_gold: usize,
    #[serde(flatten)]
    pub counts: Counts,
    pub precision: T,
    pub recall: T,
    pub f_beta: T,
}

impl<T: Float> KindScore<T> {
    pub fn new(kind: EditKind, counts: Counts, beta: T) -> Self {
        Self {
            kind,
            num_gold: counts.num_gold(),
            counts,
            precision: counts.precision(),
            recall: counts.recall(),
            f_beta: counts.f_beta(beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<T> {
    pub beta: T,
    pub match_mode: MatchMode,
    pub sentences: usize,
    pub kinds: Vec<KindScore<T>>,
}

impl<T: Float> EvalReport<T> {
    pub fn get(&self, kind: EditKind) -> Option<&KindScore<T>> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

pub(crate) fn kind_label(kind: EditKind) -> &'static str {
    match kind {
        EditKind::Append => "$APPEND_{t}",
        EditKind::Delete => "$DELETE",
        EditKind::Replace => "$REPLACE_{t}",
    }
}

fn pct<T: Float>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN) * 100.0
}

impl<T: Float> fmt::Display for EvalReport<T> {
    /// Columns: label, Num., Prec., Rec., F; scores as percentages.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let f_head = format!("F_{}", self.beta.to_f64().unwrap_or(f64::NAN));
        writeln!(
            f,
            "{:<14} {:>7} {:>7} {:>7} {:>7}",
            "Label", "Num.", "Prec.", "Rec.", f_head
        )?;
        for k in &self.kinds {
            writeln!(
                f,
                "{:<14} {:>7} {:>7.2} {:>7.2} {:>7.2}",
                kind_label(k.kind),
                k.num_gold,
                pct(k.precision),
                pct(k.recall),
                pct(k.f_beta)
            )?;
        }
        Ok(())
    }
}

fn keys(source: &Sentence, other: &Sentence, mode: MatchMode) -> BTreeSet<EditMatchKey> {
    align(source, other)
        .error_units()
        .filter_map(|op| EditMatchKey::from_op(op, mode))
        .collect()
}

/// Per-sentence counts indexed like `EditKind::ALL`.
fn sentence_counts(
    source: &Sentence,
    hypothesis: &Sentence,
    reference: &Sentence,
    mode: MatchMode,
) -> [Counts; 3] {
    let predicted = keys(source, hypothesis, mode);
    let gold = keys(source, reference, mode);
    let mut out = [Counts::default(); 3];
    for (slot, kind) in out.iter_mut().zip(EditKind::ALL) {
        let pred: BTreeSet<_> = predicted.iter().filter(|k| k.kind == kind).collect();
        let gold: BTreeSet<_> = gold.iter().filter(|k| k.kind == kind).collect();
        let tp = pred.intersection(&gold).count();
        *slot = Counts {
            tp,
            fp: pred.len() - tp,
            fn_: gold.len() - tp,
        };
    }
    out
}

/// Scores hypotheses against references, both aligned to the same sources.
pub fn score<T: Float>(
    sources: &[Sentence],
    hypotheses: &[Sentence],
    references: &[Sentence],
    kinds: &[EditKind],
    beta: T,
    mode: MatchMode,
) -> Result<EvalReport<T>> {
    for (what, found) in [
        ("hypothesis", hypotheses.len()),
        ("reference", references.len()),
    ] {
        if found != sources.len() {
            return Err(Error::CorpusLengthMismatch {
                what: what.to_owned(),
                expected: sources.len(),
                found,
            });
        }
    }
    if !beta.is_finite() || beta <= T::zero() {
        return Err(Error::InvalidMetric("beta must be positive".to_owned()));
    }
    let totals = (0..sources.len())
        .into_par_iter()
        .map(|i| sentence_counts(&sources[i], &hypotheses[i], &references[i], mode))
        .reduce(
            || [Counts::default(); 3],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let kinds = EditKind::ALL
        .iter()
        .zip(totals)
        .filter(|(k, _)| kinds.contains(k))
        .map(|(&k, c)| KindScore::new(k, c, beta))
        .collect();
    Ok(EvalReport {
        beta,
        match_mode: mode,
        sentences: sources.len(),
        kinds,
    })
}
