//! Negative log-likelihood values of the detection and correction heads,
//! computed from externally supplied log-probabilities (natural log).

use std::collections::BTreeMap;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{ged_labels, EditLabel, LabelSequence};

const NORMALIZATION_TOL: f64 = 1e-6;

/// Log-probabilities of the second-turn pair `(X', X_c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct SecondTurnInput<T> {
    pub log_probs: Vec<BTreeMap<String, T>>,
    pub gold: Vec<EditLabel>,
}

/// One line of the loss JSONL input.
///
/// `log_probs[i]` maps label strings to log-probabilities at position `i`;
/// labels left out have probability 0. `ged_log_probs[i]` is
/// `[log p(correct), log p(incorrect)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct LossInput<T> {
    pub log_probs: Vec<BTreeMap<String, T>>,
    pub gold: Vec<EditLabel>,
    #[serde(default)]
    pub mask: Option<Vec<u8>>,
    #[serde(default)]
    pub ged_log_probs: Option<Vec<[T; 2]>>,
    #[serde(default)]
    pub ged_gold: Option<Vec<u8>>,
    #[serde(default)]
    pub second: Option<SecondTurnInput<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport<T> {
    pub l_d: T,
    pub l_c: T,
    pub l_c1: T,
    pub l_c2: T,
    /// `l_c1 + l_c2 + l_d + l_c`.
    pub l_total: T,
}

impl<T: Float> LossReport<T> {
    pub fn new(l_d: T, l_c: T, l_c1: T, l_c2: T) -> Self {
        Self {
            l_d,
            l_c,
            l_c1,
            l_c2,
            l_total: l_c1 + l_c2 + l_d + l_c,
        }
    }
}

fn check_distribution<T: Float>(position: usize, values: impl Iterator<Item = T>) -> Result<()> {
    let mut sum = T::zero();
    for v in values {
        if v.is_nan() || v > T::zero() {
            return Err(Error::InvalidDistribution {
                position,
                message: format!(
                    "log-probability {} is not <= 0",
                    v.to_f64().unwrap_or(f64::NAN)
                ),
            });
        }
        sum = sum + v.exp();
    }
    let sum = sum.to_f64().unwrap_or(f64::NAN);
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidDistribution {
            position,
            message: format!("probabilities sum to {sum}, not 1"),
        });
    }
    Ok(())
}

/// `-sum_i mask_i * log p(gold_i)`; no mask means every position counts.
pub fn correction_loss<T: Float>(
    log_probs: &[BTreeMap<String, T>],
    gold: &[EditLabel],
    mask: Option<&[bool]>,
) -> Result<T> {
    if log_probs.len() != gold.len() {
        return Err(Error::LabelLengthMismatch {
            expected: gold.len(),
            found: log_probs.len(),
        });
    }
    if let Some(m) = mask {
        if m.len() != gold.len() {
            return Err(Error::LabelLengthMismatch {
                expected: gold.len(),
                found: m.len(),
            });
        }
    }
    let mut total = T::zero();
    for (i, (table, label)) in log_probs.iter().zip(gold).enumerate() {
        check_distribution(i, table.values().copied())?;
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let key = label.to_string();
        let lp = table.get(&key).ok_or_else(|| Error::InvalidDistribution {
            position: i,
            message: format!("gold label {key} has probability 0"),
        })?;
        total = total - *lp;
    }
    Ok(total)
}

/// `-sum_i log p(y_i)` over binary detection labels.
pub fn detection_loss<T: Float>(log_probs: &[[T; 2]], gold: &[bool]) -> Result<T> {
    if log_probs.len() != gold.len() {
        return Err(Error::LabelLengthMismatch {
            expected: gold.len(),
            found: log_probs.len(),
        });
    }
    let mut total = T::zero();
    for (i, (pair, &y)) in log_probs.iter().zip(gold).enumerate() {
        check_distribution(i, pair.iter().copied())?;
        total = total - pair[usize::from(y)];
    }
    Ok(total)
}

fn bits(v: &[u8], what: &str) -> Result<Vec<bool>> {
    v.iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::InvalidDistribution {
                position: i,
                message: format!("{what} entries must be 0 or 1, got {b}"),
            }),
        })
        .collect()
}

/// Computes all loss components for one record. Missing detection inputs
/// give `l_d = 0`; a missing second turn gives `l_c2 = 0`.
pub fn losses<T: Float>(input: &LossInput<T>) -> Result<LossReport<T>> {
    let mask = input.mask.as_deref().map(|m| bits(m, "mask")).transpose()?;
    let l_c = correction_loss(&input.log_probs, &input.gold, None)?;
    let l_c1 = correction_loss(&input.log_probs, &input.gold, mask.as_deref())?;
    let l_d = match &input.ged_log_probs {
        Some(tables) => {
            let gold = match &input.ged_gold {
                Some(g) => bits(g, "ged_gold")?,
                None => {
                    let seq = LabelSequence {
                        sentinel: EditLabel::Keep,
                        labels: input.gold.clone(),
                    };
                    ged_labels(&seq).0
                }
            };
            detection_loss(tables, &gold)?
        }
        None => T::zero(),
    };
    let l_c2 = match &input.second {
        Some(second) => correction_loss(&second.log_probs, &second.gold, None)?,
        None => T::zero(),
    };
    Ok(LossReport::new(l_d, l_c, l_c1, l_c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab() -> Vec<EditLabel> {
        ["$KEEP", "$DELETE", "$APPEND_a", "$REPLACE_b"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    }

    fn uniform<T: Float>(n: usize, v: &[EditLabel]) -> Vec<BTreeMap<String, T>> {
        let lp = -T::from(v.len()).unwrap().ln();
        (0..n)
            .map(|_| v.iter().map(|l| (l.to_string(), lp)).collect())
            .collect()
    }

    fn one_hot(gold: &[EditLabel]) -> Vec<BTreeMap<String, f64>> {
        gold.iter()
            .map(|l| BTreeMap::from([(l.to_string(), 0.0)]))
            .collect()
    }

    #[test]
    fn one_hot_is_zero() {
        let gold = vocab();
        let input = LossInput {
            log_probs: one_hot(&gold),
            gold: gold.clone(),
            mask: Some(vec![1, 0, 1, 1]),
            ged_log_probs: Some(Vec::new()),
            ged_gold: None,
            second: Some(SecondTurnInput {
                log_probs: one_hot(&gold),
                gold,
            }),
        };
        // ged tables of the wrong length are rejected
        assert!(losses(&input).is_err());
        let input = LossInput {
            ged_log_probs: None,
            ..input
        };
        let r = losses(&input).unwrap();
        assert_eq!(
            (r.l_c, r.l_c1, r.l_c2, r.l_d, r.l_total),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn uniform_is_n_log_v() {
        let v = vocab();
        let gold = vec![v[0].clone(); 5];
        let l_c = correction_loss::<f64>(&uniform(5, &v), &gold, None).unwrap();
        assert!((l_c - 5.0 * 4f64.ln()).abs() < 1e-9);
        let masked = [true, false, true, true, true];
        let l_c1 = correction_loss::<f64>(&uniform(5, &v), &gold, Some(&masked)).unwrap();
        // four unmasked positions, each ln 4
        assert!((l_c1 - 5.545177444479562).abs() < 1e-9, "{l_c1}");
        let l_c32 = correction_loss::<f32>(&uniform(5, &v), &gold, None).unwrap();
        assert!((l_c32 - 5.0 * 4f32.ln()).abs() < 1e-4);
    }

    #[test]
    fn detection_from_labels() {
        let gold: Vec<EditLabel> = vec!["$KEEP".parse().unwrap(), "$DELETE".parse().unwrap()];
        let half = 0.5f64.ln();
        let input = LossInput {
            log_probs: one_hot(&gold),
            gold,
            mask: None,
            ged_log_probs: Some(vec![[0.0, -1e9], [half, half]]),
            ged_gold: None,
            second: None,
        };
        let r = losses(&input).unwrap();
        assert!((r.l_d - 2f64.ln()).abs() < 1e-12);
        assert_eq!(r.l_total, r.l_d);
    }

    #[test]
    fn rejects_bad_tables() {
        let gold: Vec<EditLabel> = vec!["$KEEP".parse().unwrap()];
        let unnormalized = vec![BTreeMap::from([("$KEEP".to_owned(), -0.1f64)])];
        match correction_loss(&unnormalized, &gold, None).unwrap_err() {
            Error::InvalidDistribution { position, .. } => assert_eq!(position, 0),
            e => panic!("unexpected {e}"),
        }
        let missing_gold = vec![BTreeMap::from([("$DELETE".to_owned(), 0.0f64)])];
        assert!(correction_loss(&missing_gold, &gold, None).is_err());
        let nan = vec![BTreeMap::from([("$KEEP".to_owned(), f64::NAN)])];
        assert!(correction_loss(&nan, &gold, None).is_err());
        assert!(correction_loss::<f64>(&[], &gold, None).is_err());
        let bad_mask = LossInput {
            log_probs: one_hot(&gold),
            gold,
            mask: Some(vec![2]),
            ged_log_probs: None,
            ged_gold: None,
            second: None,
        };
        assert!(losses(&bad_mask).is_err());
    }

    #[test]
    fn json_input() {
        let line = r#"{"log_probs":[{"$KEEP":-0.6931471805599453,"$DELETE":-0.6931471805599453}],"gold":["$DELETE"],"mask":[0]}"#;
        let input: LossInput<f64> = serde_json::from_str(line).unwrap();
        let r = losses(&input).unwrap();
        assert!((r.l_c - 2f64.ln()).abs() < 1e-12);
        assert_eq!(r.l_c1, 0.0);
    }

    proptest! {
        #[test]
        fn masked_loss_bounded(
            rows in prop::collection::vec((prop::collection::vec(0.01f64..1.0, 4), 0usize..4, any::<bool>()), 1..12)
        ) {
            let v = vocab();
            let mut tables = Vec::new();
            let mut gold = Vec::new();
            let mut mask = Vec::new();
            for (weights, g, m) in &rows {
                let z: f64 = weights.iter().sum();
                tables.push(v.iter().zip(weights).map(|(l, w)| (l.to_string(), (w / z).ln())).collect());
                gold.push(v[*g].clone());
                mask.push(*m);
            }
            let l_c = correction_loss(&tables, &gold, None).unwrap();
            let l_c1 = correction_loss(&tables, &gold, Some(&mask)).unwrap();
            prop_assert!(l_c1 <= l_c + 1e-12);
            if mask.iter().all(|&m| m) {
                prop_assert!((l_c1 - l_c).abs() < 1e-12);
            }
        }
    }
}
