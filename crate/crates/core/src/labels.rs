//! Editing-action labels: one label per source token plus an optional
//! sentinel slot for insertions before the first token.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::align::{align, EditKind, EditOp};
use crate::error::{Error, Result};
use crate::textcore::Sentence;

pub const DEFAULT_MAX_ITERS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EditLabel {
    Keep,
    Delete,
    Append(String),
    Replace(String),
}

impl EditLabel {
    pub fn kind(&self) -> Option<EditKind> {
        match self {
            EditLabel::Keep => None,
            EditLabel::Delete => Some(EditKind::Delete),
            EditLabel::Append(_) => Some(EditKind::Append),
            EditLabel::Replace(_) => Some(EditKind::Replace),
        }
    }

    pub fn is_keep(&self) -> bool {
        matches!(self, EditLabel::Keep)
    }
}

impl fmt::Display for EditLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditLabel::Keep => f.write_str("$KEEP"),
            EditLabel::Delete => f.write_str("$DELETE"),
            EditLabel::Append(t) => write!(f, "$APPEND_{t}"),
            EditLabel::Replace(t) => write!(f, "$REPLACE_{t}"),
        }
    }
}

impl FromStr for EditLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let arg = |rest: &str| {
            if rest.is_empty() || rest.chars().any(char::is_whitespace) {
                Err(Error::UnknownLabel(s.to_owned()))
            } else {
                Ok(rest.to_owned())
            }
        };
        match s {
            "$KEEP" => Ok(EditLabel::Keep),
            "$DELETE" => Ok(EditLabel::Delete),
            _ => {
                if let Some(rest) = s.strip_prefix("$APPEND_") {
                    arg(rest).map(EditLabel::Append)
                } else if let Some(rest) = s.strip_prefix("$REPLACE_") {
                    arg(rest).map(EditLabel::Replace)
                } else {
                    Err(Error::UnknownLabel(s.to_owned()))
                }
            }
        }
    }
}

impl Serialize for EditLabel {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EditLabel {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-token labels. `sentinel` sits before the first token and is only ever `Keep` or `Append`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelSequence {
    pub sentinel: EditLabel,
    pub labels: Vec<EditLabel>,
}

impl LabelSequence {
    pub fn keep_all(len: usize) -> Self {
        Self {
            sentinel: EditLabel::Keep,
            labels: vec![EditLabel::Keep; len],
        }
    }

    pub fn new(sentinel: EditLabel, labels: Vec<EditLabel>) -> Result<Self> {
        if !matches!(sentinel, EditLabel::Keep | EditLabel::Append(_)) {
            return Err(Error::InvalidSentinel {
                label: sentinel.to_string(),
            });
        }
        Ok(Self { sentinel, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn has_sentinel(&self) -> bool {
        !self.sentinel.is_keep()
    }

    /// All slots, sentinel first.
    pub fn slots(&self) -> impl Iterator<Item = &EditLabel> + '_ {
        std::iter::once(&self.sentinel).chain(&self.labels)
    }

    pub fn is_all_keep(&self) -> bool {
        self.slots().all(EditLabel::is_keep)
    }
}

/// Binary detection labels: `true` where the correction label is not `$KEEP`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GedLabelSequence(pub Vec<bool>);

impl GedLabelSequence {
    pub fn as_bits(&self) -> Vec<u8> {
        self.0.iter().map(|&b| u8::from(b)).collect()
    }
}

/// Single-pass labels for `source -> target`.
///
/// Every error unit of the minimal script maps onto one label. An insert run
/// contributes only its first token as an `$APPEND`; the rest is left for
/// later passes, as is an append whose anchor already carries a replace or
/// delete.
pub fn derive_labels(source: &Sentence, target: &Sentence) -> LabelSequence {
    let script = align(source, target);
    let mut out = LabelSequence::keep_all(source.len());
    for op in &script.ops {
        match op {
            EditOp::Equal { .. } => {}
            EditOp::Replace { pos, to, .. } => out.labels[*pos] = EditLabel::Replace(to.clone()),
            EditOp::Delete { pos, .. } => out.labels[*pos] = EditLabel::Delete,
            EditOp::InsertRun { after, tokens } => {
                let slot = match after {
                    Some(p) => &mut out.labels[*p],
                    None => &mut out.sentinel,
                };
                if slot.is_keep() {
                    *slot = EditLabel::Append(tokens[0].clone());
                }
            }
        }
    }
    out
}

pub fn apply_labels(source: &Sentence, labels: &LabelSequence) -> Result<Sentence> {
    if labels.len() != source.len() {
        return Err(Error::LabelLengthMismatch {
            expected: source.len(),
            found: labels.len(),
        });
    }
    let mut out = Vec::with_capacity(source.len() + 1);
    match &labels.sentinel {
        EditLabel::Keep => {}
        EditLabel::Append(t) => out.push(t.clone()),
        other => {
            return Err(Error::InvalidSentinel {
                label: other.to_string(),
            })
        }
    }
    for (token, label) in source.iter().zip(&labels.labels) {
        match label {
            EditLabel::Keep => out.push(token.clone()),
            EditLabel::Delete => {}
            EditLabel::Replace(t) => out.push(t.clone()),
            EditLabel::Append(t) => {
                out.push(token.clone());
                out.push(t.clone());
            }
        }
    }
    Ok(Sentence::from_tokens_unchecked(out))
}

/// Derives and applies labels repeatedly, like multi-pass inference.
///
/// Returns the last sentence and the number of passes run; the caller
/// detects non-convergence by comparing the sentence against `target`.
pub fn iterate_derive(source: &Sentence, target: &Sentence, max_iters: usize) -> (Sentence, usize) {
    let max_iters = max_iters.max(1);
    let mut current = source.clone();
    for pass in 1..=max_iters {
        let labels = derive_labels(&current, target);
        current = apply_labels(&current, &labels).expect("derived labels match their source");
        if &current == target {
            return (current, pass);
        }
    }
    (current, max_iters)
}

pub fn ged_labels(labels: &LabelSequence) -> GedLabelSequence {
    GedLabelSequence(labels.labels.iter().map(|l| !l.is_keep()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> Sentence {
        Sentence::parse(text)
    }

    fn rep(t: &str) -> EditLabel {
        EditLabel::Replace(t.into())
    }

    #[test]
    fn oldest_pair_labels() {
        let labels = derive_labels(&s("How oldest are you !"), &s("How old are you ?"));
        use EditLabel::Keep;
        assert_eq!(labels.labels, vec![Keep, rep("old"), Keep, Keep, rep("?")]);
        assert!(!labels.has_sentinel());
        assert_eq!(
            apply_labels(&s("How oldest are you !"), &labels).unwrap(),
            s("How old are you ?")
        );
        assert_eq!(ged_labels(&labels).as_bits(), vec![0, 1, 0, 0, 1]);
    }

    #[test]
    fn interdependence_fragment() {
        let labels = derive_labels(
            &s("there are little job because"),
            &s("there are few jobs because"),
        );
        use EditLabel::Keep;
        assert_eq!(
            labels.labels,
            vec![Keep, Keep, rep("few"), rep("jobs"), Keep]
        );
    }

    #[test]
    fn single_insertion_becomes_append() {
        let labels = derive_labels(&s("we go"), &s("we will go"));
        assert_eq!(
            labels.labels,
            vec![EditLabel::Append("will".into()), EditLabel::Keep]
        );
    }

    #[test]
    fn leading_insertion_uses_sentinel() {
        let labels = derive_labels(&s("go home"), &s("we go home"));
        assert_eq!(labels.sentinel, EditLabel::Append("we".into()));
        assert!(labels.labels.iter().all(EditLabel::is_keep));
        assert_eq!(
            apply_labels(&s("go home"), &labels).unwrap(),
            s("we go home")
        );
        assert!(ged_labels(&labels).0.iter().all(|b| !b));
    }

    #[test]
    fn apply_basics() {
        let a = s("a b");
        assert_eq!(apply_labels(&a, &LabelSequence::keep_all(2)).unwrap(), a);
        let del = LabelSequence::new(EditLabel::Keep, vec![EditLabel::Delete; 2]).unwrap();
        assert!(apply_labels(&a, &del).unwrap().is_empty());
        assert!(matches!(
            apply_labels(&a, &LabelSequence::keep_all(3)),
            Err(Error::LabelLengthMismatch {
                expected: 2,
                found: 3
            })
        ));
        assert!(LabelSequence::new(EditLabel::Delete, vec![]).is_err());
    }

    #[test]
    fn iterate_counts() {
        let (out, n) = iterate_derive(&s("How oldest are you !"), &s("How old are you ?"), 5);
        assert_eq!((out, n), (s("How old are you ?"), 1));
        let (out, n) = iterate_derive(&s("a b"), &s("a b"), 5);
        assert_eq!((out, n), (s("a b"), 1));
        let (out, n) = iterate_derive(&s("a"), &s("a x y z"), 5);
        assert_eq!((out, n), (s("a x y z"), 3));
    }

    #[test]
    fn iterate_reports_non_convergence() {
        let (out, n) = iterate_derive(&s("a"), &s("a x y z"), 2);
        assert_eq!(n, 2);
        assert_eq!(out, s("a x y"));
    }

    #[test]
    fn ged_definition() {
        let labels = LabelSequence::new(
            EditLabel::Keep,
            vec![
                EditLabel::Delete,
                EditLabel::Keep,
                EditLabel::Append("x".into()),
            ],
        )
        .unwrap();
        assert_eq!(ged_labels(&labels).as_bits(), vec![1, 0, 1]);
        assert!(ged_labels(&LabelSequence::keep_all(4)).0.iter().all(|b| !b));
    }

    #[test]
    fn label_strings_round_trip() {
        for text in [
            "$KEEP",
            "$DELETE",
            "$APPEND_the",
            "$REPLACE_$KEEP",
            "$APPEND__",
        ] {
            let label: EditLabel = text.parse().unwrap();
            assert_eq!(label.to_string(), text);
        }
        for bad in ["KEEP", "$APPEND_", "$REPLACE", "$TRANSFORM_CASE_LOWER"] {
            assert!(bad.parse::<EditLabel>().is_err(), "{bad}");
        }
    }

    fn sentence(max: usize) -> impl Strategy<Value = Sentence> {
        prop::collection::vec(0u8..5, 0..=max)
            .prop_map(|ids| Sentence::new(ids.into_iter().map(|i| format!("w{i}"))).unwrap())
    }

    fn longest_run(a: &Sentence, b: &Sentence) -> usize {
        align(a, b)
            .ops
            .iter()
            .map(|op| match op {
                EditOp::InsertRun { tokens, .. } => tokens.len(),
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }

    proptest! {
        #[test]
        fn single_pass_soundness(a in sentence(8), b in sentence(8)) {
            prop_assume!(longest_run(&a, &b) <= 1);
            prop_assert_eq!(apply_labels(&a, &derive_labels(&a, &b)).unwrap(), b);
        }

        #[test]
        fn iterated_completeness(a in sentence(8), b in sentence(10)) {
            let k = longest_run(&a, &b).max(1);
            let (out, n) = iterate_derive(&a, &b, k);
            prop_assert_eq!(out, b);
            prop_assert!(n <= k);
        }

        #[test]
        fn one_label_per_unit(a in sentence(8), b in sentence(8)) {
            let labels = derive_labels(&a, &b);
            let non_keep = labels.slots().filter(|l| !l.is_keep()).count();
            prop_assert_eq!(non_keep, align(&a, &b).num_error_units());
        }

        #[test]
        fn ged_stable(a in sentence(8), b in sentence(8)) {
            prop_assert_eq!(ged_labels(&derive_labels(&a, &b)), ged_labels(&derive_labels(&a, &b)));
        }
    }
}
