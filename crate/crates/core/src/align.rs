//! Minimal token-level edit scripts.
//!
//! Alignment is plain Levenshtein over tokens with unit costs. When several
//! minimal scripts exist, backtracking from the bottom-right cell picks
//! `Equal`, then `Replace`, then `Delete`, then `Insert`. Consecutive inserts
//! that share an anchor are merged into one [`EditOp::InsertRun`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textcore::Sentence;

/// The three correction families an error unit can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Append,
    Delete,
    Replace,
}

impl EditKind {
    pub const ALL: [EditKind; 3] = [EditKind::Append, EditKind::Delete, EditKind::Replace];

    /// Short form used in ordered strategy tags (`app`, `del`, `rep`).
    pub fn abbrev(self) -> &'static str {
        match self {
            EditKind::Append => "app",
            EditKind::Delete => "del",
            EditKind::Replace => "rep",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EditKind::Append => "append",
            EditKind::Delete => "delete",
            EditKind::Replace => "replace",
        }
    }

    /// Accepts the full name, the abbreviation, or the label spelling (`$DELETE`, `$APPEND_{t}`).
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().trim_start_matches('$').to_ascii_lowercase();
        let s = s.split('_').next().unwrap_or_default();
        match s {
            "append" | "app" | "a" => Some(EditKind::Append),
            "delete" | "del" | "d" => Some(EditKind::Delete),
            "replace" | "rep" | "r" => Some(EditKind::Replace),
            _ => None,
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EditOp {
    Equal {
        pos: usize,
        token: String,
    },
    Replace {
        pos: usize,
        from: String,
        to: String,
    },
    Delete {
        pos: usize,
        token: String,
    },
    /// Tokens inserted after source position `after`; `None` inserts before the first token.
    InsertRun {
        after: Option<usize>,
        tokens: Vec<String>,
    },
}

impl EditOp {
    /// `None` for `Equal`, otherwise the kind of error unit this op is.
    pub fn kind(&self) -> Option<EditKind> {
        match self {
            EditOp::Equal { .. } => None,
            EditOp::Replace { .. } => Some(EditKind::Replace),
            EditOp::Delete { .. } => Some(EditKind::Delete),
            EditOp::InsertRun { .. } => Some(EditKind::Append),
        }
    }

    pub fn is_equal(&self) -> bool {
        matches!(self, EditOp::Equal { .. })
    }

    /// Source anchor with -1 standing for "before the first token".
    pub fn anchor(&self) -> i64 {
        match self {
            EditOp::Equal { pos, .. }
            | EditOp::Replace { pos, .. }
            | EditOp::Delete { pos, .. } => *pos as i64,
            EditOp::InsertRun { after, .. } => after.map_or(-1, |p| p as i64),
        }
    }

    /// Token-level cost of this op under unit costs.
    pub fn cost(&self) -> usize {
        match self {
            EditOp::Equal { .. } => 0,
            EditOp::Replace { .. } | EditOp::Delete { .. } => 1,
            EditOp::InsertRun { tokens, .. } => tokens.len(),
        }
    }

    /// Target-side tokens this op produces.
    pub fn new_tokens(&self) -> &[String] {
        match self {
            EditOp::Replace { to, .. } => std::slice::from_ref(to),
            EditOp::InsertRun { tokens, .. } => tokens,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
    pub src_len: usize,
    pub tgt_len: usize,
}

impl EditScript {
    /// Non-`Equal` ops in order, each one an error unit.
    pub fn error_units(&self) -> impl Iterator<Item = &EditOp> + '_ {
        self.ops.iter().filter(|op| !op.is_equal())
    }

    pub fn num_error_units(&self) -> usize {
        self.error_units().count()
    }

    pub fn cost(&self) -> usize {
        self.ops.iter().map(EditOp::cost).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(EditOp::is_equal)
    }
}

/// Computes the minimal edit script turning `source` into `target`.
pub fn align(source: &Sentence, target: &Sentence) -> EditScript {
    let src = source.tokens();
    let tgt = target.tokens();
    let (n, m) = (src.len(), tgt.len());
    let width = m + 1;
    let mut cost = vec![0usize; (n + 1) * width];
    for (j, c) in cost.iter_mut().take(width).enumerate() {
        *c = j;
    }
    for i in 1..=n {
        cost[i * width] = i;
        for j in 1..=m {
            let diag = cost[(i - 1) * width + j - 1] + usize::from(src[i - 1] != tgt[j - 1]);
            let del = cost[(i - 1) * width + j] + 1;
            let ins = cost[i * width + j - 1] + 1;
            cost[i * width + j] = diag.min(del).min(ins);
        }
    }

    // Backtrack, collecting primitive steps in reverse.
    enum Step {
        Equal(usize),
        Replace(usize, usize),
        Delete(usize),
        Insert(usize, usize),
    }
    let at = |i: usize, j: usize| cost[i * width + j];
    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = at(i, j);
        if i > 0 && j > 0 && src[i - 1] == tgt[j - 1] && at(i - 1, j - 1) == here {
            steps.push(Step::Equal(i - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && at(i - 1, j - 1) + 1 == here {
            steps.push(Step::Replace(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && at(i - 1, j) + 1 == here {
            steps.push(Step::Delete(i - 1));
            i -= 1;
        } else {
            // Inserting target token j-1 after source position i-1.
            steps.push(Step::Insert(i, j - 1));
            j -= 1;
        }
    }
    steps.reverse();

    let mut ops: Vec<EditOp> = Vec::with_capacity(steps.len());
    for step in steps {
        match step {
            Step::Equal(p) => ops.push(EditOp::Equal {
                pos: p,
                token: src[p].clone(),
            }),
            Step::Replace(p, q) => ops.push(EditOp::Replace {
                pos: p,
                from: src[p].clone(),
                to: tgt[q].clone(),
            }),
            Step::Delete(p) => ops.push(EditOp::Delete {
                pos: p,
                token: src[p].clone(),
            }),
            Step::Insert(consumed, q) => {
                let after = consumed.checked_sub(1);
                match ops.last_mut() {
                    Some(EditOp::InsertRun { after: a, tokens }) if *a == after => {
                        tokens.push(tgt[q].clone())
                    }
                    _ => ops.push(EditOp::InsertRun {
                        after,
                        tokens: vec![tgt[q].clone()],
                    }),
                }
            }
        }
    }

    EditScript {
        ops,
        src_len: n,
        tgt_len: m,
    }
}

/// Replays `script` on `source`, checking every source-side token it claims.
pub fn apply_script(source: &Sentence, script: &EditScript) -> Result<Sentence> {
    if script.src_len != source.len() {
        return Err(Error::ScriptMismatch {
            position: source.len().min(script.src_len),
            message: format!(
                "script expects {} source tokens, sentence has {}",
                script.src_len,
                source.len()
            ),
        });
    }
    let src = source.tokens();
    let mut out = Vec::with_capacity(script.tgt_len);
    let mut next = 0usize;
    for op in &script.ops {
        match op {
            EditOp::Equal { pos, token }
            | EditOp::Replace {
                pos, from: token, ..
            }
            | EditOp::Delete { pos, token } => {
                if *pos != next {
                    return Err(Error::ScriptMismatch {
                        position: *pos,
                        message: format!("expected an op for position {next}"),
                    });
                }
                if src.get(*pos) != Some(token) {
                    return Err(Error::ScriptMismatch {
                        position: *pos,
                        message: format!("script token {token:?} differs from source"),
                    });
                }
                next += 1;
                match op {
                    EditOp::Equal { .. } => out.push(token.clone()),
                    EditOp::Replace { to, .. } => out.push(to.clone()),
                    _ => {}
                }
            }
            EditOp::InsertRun { after, tokens } => {
                let expected_after = next.checked_sub(1);
                if *after != expected_after || tokens.is_empty() {
                    return Err(Error::ScriptMismatch {
                        position: next,
                        message: "insert run is not anchored at the current position".into(),
                    });
                }
                out.extend(tokens.iter().cloned());
            }
        }
    }
    if next != src.len() {
        return Err(Error::ScriptMismatch {
            position: next,
            message: "script ends before the source does".into(),
        });
    }
    Ok(Sentence::from_tokens_unchecked(out))
}

/// Keeps the error units for which `keep(unit_index, op)` holds and reverts the rest.
///
/// Rejected replaces and deletes become `Equal` on the source token; rejected
/// insert runs are dropped. The result maps the same source to an
/// intermediate target.
pub fn filter_script<F>(script: &EditScript, mut keep: F) -> EditScript
where
    F: FnMut(usize, &EditOp) -> bool,
{
    let mut unit = 0usize;
    let mut ops = Vec::with_capacity(script.ops.len());
    for op in &script.ops {
        if op.is_equal() {
            ops.push(op.clone());
            continue;
        }
        let kept = keep(unit, op);
        unit += 1;
        if kept {
            ops.push(op.clone());
            continue;
        }
        match op {
            EditOp::Replace { pos, from, .. } => ops.push(EditOp::Equal {
                pos: *pos,
                token: from.clone(),
            }),
            EditOp::Delete { pos, token } => ops.push(EditOp::Equal {
                pos: *pos,
                token: token.clone(),
            }),
            _ => {}
        }
    }
    let tgt_len = ops
        .iter()
        .map(|op| match op {
            EditOp::Equal { .. } | EditOp::Replace { .. } => 1,
            EditOp::Delete { .. } => 0,
            EditOp::InsertRun { tokens, .. } => tokens.len(),
        })
        .sum();
    EditScript {
        ops,
        src_len: script.src_len,
        tgt_len,
    }
}
