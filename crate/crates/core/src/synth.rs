//! Synthetic corpora with planted errors, and a scripted predictor that
//! stands in for a trained model in the interdependence experiment.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::align::{align, apply_script, filter_script, EditKind, EditOp};
use crate::textcore::{ParallelInstance, Sentence};

/// One planted error and the source-side anchor it was planted at
/// (-1 for an insertion before the first token).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantedError {
    pub kind: EditKind,
    pub anchor: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedInstance {
    pub instance: ParallelInstance,
    /// In source order.
    pub errors: Vec<PlantedError>,
}

impl PlantedInstance {
    pub fn count(&self, kind: EditKind) -> usize {
        self.errors.iter().filter(|e| e.kind == kind).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    /// Each kind gets `Binomial(max_per_kind, p_error)` errors.
    pub max_per_kind: usize,
    pub p_error: f64,
    /// Clean tokens between consecutive errors; at least 2 keeps every
    /// planted error recoverable as its own unit by the aligner.
    pub min_gap: usize,
    pub max_gap: usize,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            max_per_kind: 2,
            p_error: 0.4,
            min_gap: 2,
            max_gap: 3,
        }
    }
}

/// Builds one instance whose errors are exactly `kinds`, in that order.
///
/// Reference tokens are unique within the sentence and erroneous tokens are
/// drawn from a disjoint vocabulary.
pub fn plant<R: Rng + ?Sized>(
    rng: &mut R,
    id: usize,
    kinds: &[EditKind],
    config: &PlantConfig,
) -> PlantedInstance {
    let mut source: Vec<String> = Vec::new();
    let mut reference: Vec<String> = Vec::new();
    let mut errors = Vec::with_capacity(kinds.len());
    let mut fresh = 0usize;
    let mut clean = |n: usize, source: &mut Vec<String>, reference: &mut Vec<String>| {
        for _ in 0..n {
            let w = format!("w{fresh}");
            fresh += 1;
            source.push(w.clone());
            reference.push(w);
        }
    };
    clean(
        rng.gen_range(0..=config.min_gap),
        &mut source,
        &mut reference,
    );
    for (i, &kind) in kinds.iter().enumerate() {
        if i > 0 {
            clean(
                rng.gen_range(config.min_gap..=config.max_gap),
                &mut source,
                &mut reference,
            );
        }
        let anchor = match kind {
            EditKind::Append => {
                reference.push(format!("ins{i}"));
                source.len() as i64 - 1
            }
            EditKind::Delete => {
                source.push(format!("del{i}"));
                source.len() as i64 - 1
            }
            EditKind::Replace => {
                source.push(format!("bad{i}"));
                reference.push(format!("good{i}"));
                source.len() as i64 - 1
            }
        };
        errors.push(PlantedError { kind, anchor });
    }
    clean(
        rng.gen_range(0..=config.min_gap),
        &mut source,
        &mut reference,
    );
    PlantedInstance {
        instance: ParallelInstance::new(
            id,
            Sentence::from_tokens_unchecked(source),
            Sentence::from_tokens_unchecked(reference),
        ),
        errors,
    }
}

/// A corpus of `n` instances with independently planted errors per kind.
pub fn planted_corpus<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    config: &PlantConfig,
) -> Vec<PlantedInstance> {
    (0..n)
        .map(|id| {
            let mut kinds = Vec::new();
            for kind in EditKind::ALL {
                let count = (0..config.max_per_kind)
                    .filter(|_| rng.gen_bool(config.p_error))
                    .count();
                kinds.extend(std::iter::repeat_n(kind, count));
            }
            kinds.shuffle(rng);
            plant(rng, id, &kinds, config)
        })
        .collect()
}

/// Random token sequences over `w0..w{alphabet}` and a target reached by
/// random replaces, deletes and insert runs of at most `max_run` tokens.
pub fn random_pair<R: Rng + ?Sized>(
    rng: &mut R,
    alphabet: usize,
    max_len: usize,
    max_run: usize,
) -> (Sentence, Sentence) {
    let word = |rng: &mut R| format!("w{}", rng.gen_range(0..alphabet));
    let len = rng.gen_range(0..=max_len);
    let source: Vec<String> = (0..len).map(|_| word(rng)).collect();
    let mut target = Vec::new();
    let insert = |rng: &mut R, target: &mut Vec<String>| {
        if max_run > 0 && rng.gen_bool(0.15) {
            for _ in 0..rng.gen_range(1..=max_run) {
                target.push(word(rng));
            }
        }
    };
    insert(rng, &mut target);
    for tok in &source {
        match rng.gen_range(0..20) {
            0..=2 => target.push(word(rng)),
            3..=4 => {}
            _ => target.push(tok.clone()),
        }
        insert(rng, &mut target);
    }
    (
        Sentence::from_tokens_unchecked(source),
        Sentence::from_tokens_unchecked(target),
    )
}

/// Stand-in for a single inference pass of a trained model.
///
/// Each `featured` error in the input is fixed with probability `q`. The
/// other errors are only reachable once no featured error is left after
/// that step, and are then fixed with probability `unlocked_rate` each. It
/// never proposes an edit the reference does not contain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptedPredictor {
    pub featured: EditKind,
    pub q: f64,
    pub unlocked_rate: f64,
}

impl ScriptedPredictor {
    pub fn predict<R: Rng + ?Sized>(
        &self,
        input: &Sentence,
        reference: &Sentence,
        rng: &mut R,
    ) -> Sentence {
        let script = align(input, reference);
        let units: Vec<&EditOp> = script.error_units().collect();
        let mut fix = vec![false; units.len()];
        let mut all_featured_fixed = true;
        for (i, op) in units.iter().enumerate() {
            if op.kind() == Some(self.featured) {
                fix[i] = rng.gen_bool(self.q);
                all_featured_fixed &= fix[i];
            }
        }
        for (i, op) in units.iter().enumerate() {
            if op.kind() != Some(self.featured) {
                fix[i] = all_featured_fixed && rng.gen_bool(self.unlocked_rate);
            }
        }
        let partial = filter_script(&script, |i, _| fix[i]);
        apply_script(input, &partial).expect("filtered script applies to its source")
    }
}
