use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::ORIGINAL_TAG;
use crate::labels::EditLabel;
use crate::textcore::TurnRecord;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub keep: usize,
    pub delete: usize,
    pub append: usize,
    pub replace: usize,
}

impl LabelCounts {
    fn add(&mut self, label: &EditLabel) {
        match label {
            EditLabel::Keep => self.keep += 1,
            EditLabel::Delete => self.delete += 1,
            EditLabel::Append(_) => self.append += 1,
            EditLabel::Replace(_) => self.replace += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.keep + self.delete + self.append + self.replace
    }
}

/// Summary counts over an emitted corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub records: usize,
    /// Records whose strategy is not `original`: one per chain hop.
    pub additional_instances: usize,
    /// Distinct originals that produced at least one additional record.
    pub expanded_originals: usize,
    pub original_records: usize,
    pub by_strategy: BTreeMap<String, usize>,
    pub by_turn: BTreeMap<usize, usize>,
    pub labels: LabelCounts,
    pub mask_slots: usize,
    pub mask_zeros: usize,
    pub mask_zero_rate: f64,
}

pub fn corpus_stats<'a, I>(records: I) -> CorpusStats
where
    I: IntoIterator<Item = &'a TurnRecord>,
{
    let mut stats = CorpusStats::default();
    let mut expanded = BTreeSet::new();
    for r in records {
        stats.records += 1;
        *stats.by_strategy.entry(r.strategy.clone()).or_default() += 1;
        *stats.by_turn.entry(r.turn).or_default() += 1;
        if r.strategy == ORIGINAL_TAG {
            stats.original_records += 1;
        } else {
            stats.additional_instances += 1;
            expanded.insert(r.origin_id);
        }
        r.labels.iter().for_each(|l| stats.labels.add(l));
        stats.mask_slots += r.mask.len();
        stats.mask_zeros += r.mask.iter().filter(|&&m| m == 0).count();
    }
    stats.expanded_originals = expanded.len();
    if stats.mask_slots > 0 {
        stats.mask_zero_rate = stats.mask_zeros as f64 / stats.mask_slots as f64;
    }
    stats
}

impl fmt::Display for CorpusStats {
    /// Aligned two-column text table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows: Vec<(String, String)> = vec![
            ("records".into(), self.records.to_string()),
            (
                "additional instances".into(),
                self.additional_instances.to_string(),
            ),
            (
                "expanded originals".into(),
                self.expanded_originals.to_string(),
            ),
            ("original records".into(), self.original_records.to_string()),
        ];
        for (tag, n) in &self.by_strategy {
            rows.push((format!("strategy {tag}"), n.to_string()));
        }
        for (turn, n) in &self.by_turn {
            rows.push((format!("turn {turn}"), n.to_string()));
        }
        rows.extend([
            ("$KEEP".into(), self.labels.keep.to_string()),
            ("$DELETE".into(), self.labels.delete.to_string()),
            ("$APPEND_{t}".into(), self.labels.append.to_string()),
            ("$REPLACE_{t}".into(), self.labels.replace.to_string()),
            ("mask slots".into(), self.mask_slots.to_string()),
            ("mask zeros".into(), self.mask_zeros.to_string()),
            (
                "mask zero rate".into(),
                format!("{:.4}", self.mask_zero_rate),
            ),
        ]);
        let key_w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let val_w = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            writeln!(out, "{k:<key_w$}  {v:>val_w$}")?;
        }
        f.write_str(&out)
    }
}
