use std::fmt;
use std::str::FromStr;

use crate::align::EditKind;
use crate::error::{Error, Result};

pub const DEFAULT_RATIO: f64 = 0.5;

/// How the corrections of one training pair are split over turns.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Correct a random `ratio` share of the error units first.
    Random { ratio: f64 },
    /// Correct every unit of `kind` first and the rest afterwards. With
    /// `inverted`, the intermediate instead corrects everything except `kind`.
    TypeFirst { kind: EditKind, inverted: bool },
    /// One turn per listed kind, accumulating, then a final turn for the rest.
    Ordered(Vec<EditKind>),
    /// Shuffle the units into `k` near-equal groups corrected cumulatively.
    KTurn { k: usize },
}

impl Strategy {
    pub fn random(ratio: f64) -> Result<Self> {
        let s = Strategy::Random { ratio };
        s.validate()?;
        Ok(s)
    }

    pub fn type_first(kind: EditKind) -> Self {
        Strategy::TypeFirst {
            kind,
            inverted: false,
        }
    }

    pub fn ordered(kinds: Vec<EditKind>) -> Result<Self> {
        let s = Strategy::Ordered(kinds);
        s.validate()?;
        Ok(s)
    }

    pub fn k_turn(k: usize) -> Result<Self> {
        let s = Strategy::KTurn { k };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Strategy::Random { ratio } if !(0.0..=1.0).contains(ratio) => Err(
                Error::InvalidStrategy(format!("ratio {ratio} is outside [0, 1]")),
            ),
            Strategy::Ordered(kinds) => {
                if !(2..=3).contains(&kinds.len()) {
                    return Err(Error::InvalidStrategy(format!(
                        "ordered strategies take 2 or 3 kinds, got {}",
                        kinds.len()
                    )));
                }
                for (i, k) in kinds.iter().enumerate() {
                    if kinds[..i].contains(k) {
                        return Err(Error::InvalidStrategy(format!("kind {k} listed twice")));
                    }
                }
                Ok(())
            }
            Strategy::KTurn { k } if *k < 2 => Err(Error::InvalidStrategy(format!(
                "k-turn needs k >= 2, got {k}"
            ))),
            _ => Ok(()),
        }
    }

    /// Tag written into the `strategy` field of emitted records.
    pub fn tag(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Random { ratio } => write!(f, "random:{ratio}"),
            Strategy::TypeFirst { kind, .. } => write!(f, "{}-first", kind.name()),
            Strategy::Ordered(kinds) => {
                let parts: Vec<_> = kinds.iter().map(|k| k.abbrev()).collect();
                write!(f, "ordered:{}", parts.join("+"))
            }
            Strategy::KTurn { k } => write!(f, "kturn:{k}"),
        }
    }
}

pub(crate) fn parse_order(spec: &str) -> Result<Vec<EditKind>> {
    spec.split(['+', ','])
        .map(|p| {
            EditKind::parse(p).ok_or_else(|| Error::InvalidStrategy(format!("unknown kind {p:?}")))
        })
        .collect()
}

impl FromStr for Strategy {
    type Err = Error;

    /// Parses record tags: `random[:r]`, `append-first`, `ordered:app+rep+del`, `kturn:k`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let bad = || Error::InvalidStrategy(format!("cannot parse {s:?}"));
        let strategy = match (head, arg) {
            ("random", None) => Strategy::Random {
                ratio: DEFAULT_RATIO,
            },
            ("random", Some(r)) => Strategy::Random {
                ratio: r.parse().map_err(|_| bad())?,
            },
            ("ordered", Some(order)) => Strategy::Ordered(parse_order(order)?),
            ("kturn", Some(k)) => Strategy::KTurn {
                k: k.parse().map_err(|_| bad())?,
            },
            (name, None) => {
                let kind = name
                    .strip_suffix("-first")
                    .and_then(EditKind::parse)
                    .ok_or_else(bad)?;
                Strategy::type_first(kind)
            }
            _ => return Err(bad()),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}
