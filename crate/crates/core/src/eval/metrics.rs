use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn lit<T: Float>(x: f64) -> T {
    T::from(x).expect("literal fits the scalar type")
}

/// Weighted harmonic mean `(1 + b^2) P R / (b^2 P + R)`, 0 when the denominator is 0.
///
/// Inputs may be fractions or percentages: if either exceeds 1 both are read
/// as percentages. The formula is scale-free, so the result comes back on the
/// scale it went in on.
pub fn f_beta<T: Float>(precision: T, recall: T, beta: T) -> Result<T> {
    for (name, v) in [("precision", precision), ("recall", recall)] {
        if !v.is_finite() || v < T::zero() {
            return Err(Error::InvalidMetric(format!(
                "{name} must be a finite non-negative number, got {}",
                v.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    if !beta.is_finite() || beta <= T::zero() {
        return Err(Error::InvalidMetric(format!(
            "beta must be positive, got {}",
            beta.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let one = T::one();
    let limit = if precision > one || recall > one {
        lit(100.0)
    } else {
        one
    };
    if precision > limit || recall > limit {
        return Err(Error::InvalidMetric(
            "percentages must not exceed 100".to_owned(),
        ));
    }
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == T::zero() {
        return Ok(T::zero());
    }
    Ok((one + b2) * precision * recall / denom)
}

/// True positive, false positive and false negative counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn num_gold(&self) -> usize {
        self.tp + self.fn_
    }

    fn ratio<T: Float>(num: usize, den: usize) -> T {
        if den == 0 {
            T::zero()
        } else {
            lit::<T>(num as f64) / lit(den as f64)
        }
    }

    /// `tp / (tp + fp)`, 0 when nothing was predicted.
    pub fn precision<T: Float>(&self) -> T {
        Self::ratio(self.tp, self.tp + self.fp)
    }

    /// `tp / (tp + fn)`, 0 when there is no gold edit.
    pub fn recall<T: Float>(&self) -> T {
        Self::ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f_beta<T: Float>(&self, beta: T) -> T {
        f_beta(self.precision(), self.recall(), beta).expect("ratios are in [0, 1]")
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, rhs: Counts) -> Counts {
        Counts {
            tp: self.tp + rhs.tp,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
        }
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        *self = *self + rhs;
    }
}
