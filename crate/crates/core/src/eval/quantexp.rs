use std::fmt;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::score::{kind_label, score, EvalReport, MatchMode};
use crate::align::{align, apply_script, filter_script, EditKind};
use crate::error::{Error, Result};
use crate::textcore::{ParallelInstance, Sentence};

/// The two kinds that are scored when `featured` is pre-corrected.
pub fn non_featured(featured: EditKind) -> Vec<EditKind> {
    EditKind::ALL
        .into_iter()
        .filter(|&k| k != featured)
        .collect()
}

/// Splits out the instances containing `kind` errors, and a copy of them
/// whose sources have exactly those errors corrected.
///
/// Both lists keep the original ids and references.
pub fn build_action_subsets(
    corpus: &[ParallelInstance],
    kind: EditKind,
) -> (Vec<ParallelInstance>, Vec<ParallelInstance>) {
    corpus
        .iter()
        .filter_map(|inst| {
            let script = align(&inst.source, &inst.reference);
            if !script.error_units().any(|op| op.kind() == Some(kind)) {
                return None;
            }
            let featured_only = filter_script(&script, |_, op| op.kind() == Some(kind));
            let checked = apply_script(&inst.source, &featured_only)
                .expect("filtered script applies to its source");
            Some((
                inst.clone(),
                ParallelInstance::new(inst.id, checked, inst.reference.clone()),
            ))
        })
        .unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindDelta<T> {
    pub kind: EditKind,
    pub f_before: T,
    pub f_after: T,
    pub delta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantReport<T> {
    pub featured: EditKind,
    pub subset_size: usize,
    /// Predictions on the raw subset.
    pub before: EvalReport<T>,
    /// Predictions on the subset with `featured` errors pre-corrected.
    pub after: EvalReport<T>,
    pub deltas: Vec<KindDelta<T>>,
}

fn sources(instances: &[ParallelInstance]) -> Vec<Sentence> {
    instances.iter().map(|i| i.source.clone()).collect()
}

fn references(instances: &[ParallelInstance]) -> Vec<Sentence> {
    instances.iter().map(|i| i.reference.clone()).collect()
}

/// Scores single-pass predictions on the raw and checked subsets of `corpus`
/// for the two kinds other than `featured`.
pub fn quantexp<T: Float>(
    corpus: &[ParallelInstance],
    predictions_raw: &[Sentence],
    predictions_checked: &[Sentence],
    featured: EditKind,
    beta: T,
    mode: MatchMode,
) -> Result<QuantReport<T>> {
    let (raw, checked) = build_action_subsets(corpus, featured);
    for (what, found) in [
        ("raw-subset predictions", predictions_raw.len()),
        ("checked-subset predictions", predictions_checked.len()),
    ] {
        if found != raw.len() {
            return Err(Error::CorpusLengthMismatch {
                what: what.to_owned(),
                expected: raw.len(),
                found,
            });
        }
    }
    let kinds = non_featured(featured);
    let before = score(
        &sources(&raw),
        predictions_raw,
        &references(&raw),
        &kinds,
        beta,
        mode,
    )?;
    let after = score(
        &sources(&checked),
        predictions_checked,
        &references(&checked),
        &kinds,
        beta,
        mode,
    )?;
    let deltas = before
        .kinds
        .iter()
        .zip(&after.kinds)
        .map(|(b, a)| KindDelta {
            kind: b.kind,
            f_before: b.f_beta,
            f_after: a.f_beta,
            delta: a.f_beta - b.f_beta,
        })
        .collect();
    Ok(QuantReport {
        featured,
        subset_size: raw.len(),
        before,
        after,
        deltas,
    })
}

impl<T: Float> fmt::Display for QuantReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.featured.name().to_uppercase();
        let pct = |x: T| x.to_f64().unwrap_or(f64::NAN) * 100.0;
        writeln!(
            f,
            "{:<14} {:<14} {:>7} {:>7} {:>7} {:>16}",
            "Dataset", "Evaluation", "Num.", "Prec.", "Rec.", "F"
        )?;
        let rows = [
            (format!("D({name})"), &self.before, false),
            (format!("D({name}-checked)"), &self.after, true),
        ];
        for (label, report, with_delta) in rows {
            for (k, d) in report.kinds.iter().zip(&self.deltas) {
                let f_cell = if with_delta {
                    format!("{:.2} ({:+.2})", pct(k.f_beta), pct(d.delta))
                } else {
                    format!("{:.2}", pct(k.f_beta))
                };
                writeln!(
                    f,
                    "{:<14} {:<14} {:>7} {:>7.2} {:>7.2} {:>16}",
                    label,
                    kind_label(k.kind),
                    k.num_gold,
                    pct(k.precision),
                    pct(k.recall),
                    f_cell
                )?;
            }
        }
        Ok(())
    }
}
