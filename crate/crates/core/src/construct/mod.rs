//! Intermediate-sentence construction and multi-turn instance emission.
//!
//! A training pair `(X_e, X_c)` is expanded into a chain
//! `X_e = X^(0), X^(1), ..., X^(m) = X_c` where every intermediate corrects a
//! growing subset of the error units of `align(X_e, X_c)`. Each hop becomes
//! one turn. Turn labels that disagree with the labels towards the final
//! reference are masked out of the loss.

mod stats;
mod strategy;

pub use stats::{corpus_stats, CorpusStats, LabelCounts};
pub use strategy::{Strategy, DEFAULT_RATIO};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{align, apply_script, filter_script, EditKind};
use crate::error::{Error, Result};
use crate::labels::{derive_labels, LabelSequence};
use crate::textcore::{ParallelInstance, Sentence};

pub const ORIGINAL_TAG: &str = "original";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnInstance {
    pub origin_id: usize,
    /// 0 for an original pair emitted on its own, otherwise 1-based.
    pub turn: usize,
    pub strategy: String,
    pub source: Sentence,
    pub target: Sentence,
    pub labels: LabelSequence,
    pub mask: Vec<bool>,
    pub sentinel_mask: bool,
}

impl TurnInstance {
    pub fn is_original(&self) -> bool {
        self.strategy == ORIGINAL_TAG
    }

    pub fn mask_zeros(&self) -> usize {
        self.mask.iter().filter(|&&m| !m).count() + usize::from(!self.sentinel_mask)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructOptions {
    pub seed: u64,
    pub include_original: bool,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            include_original: true,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Per-instance RNG stream, independent of processing order.
pub fn instance_rng(seed: u64, origin_id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(origin_id as u64)))
}

/// Number of units corrected by `Random(ratio)`, rounding halves up.
pub fn selection_count(ratio: f64, units: usize) -> usize {
    ((ratio * units as f64) + 0.5).floor().min(units as f64) as usize
}

/// Sizes of `k` near-equal groups over `n` items, larger groups first.
pub fn group_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|g| n / k + usize::from(g < n % k)).collect()
}

/// Builds the correction chain for one instance.
///
/// Degenerate hops are removed, so a chain of length 2 means the instance
/// yields no additional turns under `strategy`. An error-free pair gives
/// `[source, reference]` with both ends equal.
pub fn build_intermediate(
    inst: &ParallelInstance,
    strategy: &Strategy,
    seed: u64,
) -> Vec<Sentence> {
    let script = align(&inst.source, &inst.reference);
    let kinds: Vec<EditKind> = script.error_units().filter_map(|op| op.kind()).collect();
    let n = kinds.len();

    // Each stage is the set of units corrected in that intermediate.
    let stages: Vec<Vec<bool>> = match strategy {
        Strategy::Random { ratio } => {
            if n < 2 {
                Vec::new()
            } else {
                let mut rng = instance_rng(seed, inst.id);
                let picked = rand::seq::index::sample(&mut rng, n, selection_count(*ratio, n));
                let mut stage = vec![false; n];
                for i in picked {
                    stage[i] = true;
                }
                vec![stage]
            }
        }
        Strategy::TypeFirst { kind, inverted } => {
            vec![kinds.iter().map(|k| (k == kind) != *inverted).collect()]
        }
        Strategy::Ordered(order) => (1..=order.len())
            .map(|j| kinds.iter().map(|k| order[..j].contains(k)).collect())
            .collect(),
        Strategy::KTurn { k } => {
            if n < 2 {
                Vec::new()
            } else {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut instance_rng(seed, inst.id));
                let mut stages = Vec::with_capacity(k - 1);
                let mut stage = vec![false; n];
                let mut next = 0;
                for size in group_sizes(n, *k).into_iter().take(k - 1) {
                    for &unit in &order[next..next + size] {
                        stage[unit] = true;
                    }
                    next += size;
                    stages.push(stage.clone());
                }
                stages
            }
        }
    };

    let mut chain = Vec::with_capacity(stages.len() + 2);
    chain.push(inst.source.clone());
    for stage in stages {
        let partial = filter_script(&script, |i, _| stage[i]);
        chain.push(
            apply_script(&inst.source, &partial).expect("filtered script applies to its source"),
        );
    }
    chain.dedup();
    while chain.len() > 1 && chain.last() == Some(&inst.reference) {
        chain.pop();
    }
    chain.push(inst.reference.clone());
    chain
}

fn original(inst: &ParallelInstance, turn: usize) -> TurnInstance {
    TurnInstance {
        origin_id: inst.id,
        turn,
        strategy: ORIGINAL_TAG.to_owned(),
        source: inst.source.clone(),
        target: inst.reference.clone(),
        labels: derive_labels(&inst.source, &inst.reference),
        mask: vec![true; inst.source.len()],
        sentinel_mask: true,
    }
}

/// Turns a chain into training records, one per hop.
///
/// The mask bit of a slot is 1 iff its hop label equals the label the same
/// slot would get towards the final reference.
pub fn emit_turns(
    inst: &ParallelInstance,
    chain: &[Sentence],
    strategy: &Strategy,
) -> Result<Vec<TurnInstance>> {
    match (chain.first(), chain.last()) {
        (Some(first), Some(last)) if chain.len() >= 2 => {
            if first != &inst.source {
                return Err(Error::ChainMismatch(format!(
                    "instance {}: chain starts at {first:?}, not the source",
                    inst.id
                )));
            }
            if last != &inst.reference {
                return Err(Error::ChainMismatch(format!(
                    "instance {}: chain ends at {last:?}, not the reference",
                    inst.id
                )));
            }
        }
        _ => {
            return Err(Error::ChainMismatch(format!(
                "instance {}: chain has {} element(s), need at least 2",
                inst.id,
                chain.len()
            )))
        }
    }
    if chain.len() == 2 {
        return Ok(vec![original(inst, 0)]);
    }
    let tag = strategy.tag();
    Ok(chain
        .windows(2)
        .enumerate()
        .map(|(j, hop)| {
            let labels = derive_labels(&hop[0], &hop[1]);
            let full = derive_labels(&hop[0], &inst.reference);
            let mask = labels
                .labels
                .iter()
                .zip(&full.labels)
                .map(|(a, b)| a == b)
                .collect();
            TurnInstance {
                origin_id: inst.id,
                turn: j + 1,
                strategy: tag.clone(),
                source: hop[0].clone(),
                target: hop[1].clone(),
                sentinel_mask: labels.sentinel == full.sentinel,
                labels,
                mask,
            }
        })
        .collect())
}

/// Expands one instance: its turns, then the original as a final pass when requested.
pub fn expand_instance(
    inst: &ParallelInstance,
    strategy: &Strategy,
    options: &ConstructOptions,
) -> Result<Vec<TurnInstance>> {
    let chain = build_intermediate(inst, strategy, options.seed);
    let mut turns = emit_turns(inst, &chain, strategy)?;
    if chain.len() > 2 && options.include_original {
        turns.push(original(inst, chain.len()));
    }
    Ok(turns)
}

/// Expands a corpus, in parallel on the current rayon pool. Output is ordered by `(origin_id, turn)`.
pub fn construct_corpus(
    instances: &[ParallelInstance],
    strategy: &Strategy,
    options: &ConstructOptions,
) -> Result<Vec<TurnInstance>> {
    strategy.validate()?;
    let nested = instances
        .par_iter()
        .map(|inst| expand_instance(inst, strategy, options))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<TurnInstance> = nested.into_iter().flatten().collect();
    out.sort_by_key(|t| (t.origin_id, t.turn));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::EditLabel::{self, Append, Delete, Keep, Replace};

    fn s(text: &str) -> Sentence {
        Sentence::parse(text)
    }

    fn pair(id: usize, src: &str, reference: &str) -> ParallelInstance {
        ParallelInstance::new(id, s(src), s(reference))
    }

    fn oldest_pair() -> ParallelInstance {
        pair(0, "How oldest are you !", "How old are you ?")
    }

    #[test]
    fn selection_rounds_half_up() {
        assert_eq!(selection_count(0.5, 2), 1);
        assert_eq!(selection_count(0.5, 3), 2);
        assert_eq!(selection_count(0.25, 2), 1);
        assert_eq!(selection_count(0.0, 5), 0);
        assert_eq!(selection_count(1.0, 5), 5);
        assert_eq!(group_sizes(7, 3), vec![3, 2, 2]);
        assert_eq!(group_sizes(2, 3), vec![1, 1, 0]);
    }

    #[test]
    fn oldest_chain_for_some_seed() {
        let inst = oldest_pair();
        let strategy = Strategy::random(0.5).unwrap();
        let wanted = vec![
            s("How oldest are you !"),
            s("How oldest are you ?"),
            s("How old are you ?"),
        ];
        let seed = (0..64)
            .find(|&seed| build_intermediate(&inst, &strategy, seed) == wanted)
            .expect("some seed selects the punctuation unit");
        let turns = emit_turns(&inst, &wanted, &strategy).unwrap();
        assert_eq!(turns.len(), 2);
        assert_eq!(
            turns[0].labels.labels,
            vec![Keep, Keep, Keep, Keep, Replace("?".into())]
        );
        assert_eq!(turns[0].mask, vec![true, false, true, true, true]);
        assert_eq!(
            turns[1].labels.labels,
            vec![Keep, Replace("old".into()), Keep, Keep, Keep]
        );
        assert!(turns[1].mask.iter().all(|&m| m));
        assert_eq!(turns[0].strategy, "random:0.5");
        // seeded: same seed, same chain
        assert_eq!(build_intermediate(&inst, &strategy, seed), wanted);
    }

    #[test]
    fn random_extremes_collapse() {
        let inst = oldest_pair();
        let all = build_intermediate(&inst, &Strategy::random(1.0).unwrap(), 7);
        assert_eq!(all, vec![inst.source.clone(), inst.reference.clone()]);
        let none = build_intermediate(&inst, &Strategy::random(0.0).unwrap(), 7);
        assert_eq!(none.len(), 2);
    }

    #[test]
    fn replace_first_on_all_replace_pair_collapses() {
        let inst = pair(
            0,
            "there are little job because",
            "there are few jobs because",
        );
        let chain = build_intermediate(&inst, &Strategy::type_first(EditKind::Replace), 1);
        assert_eq!(chain.len(), 2);
        let turns = expand_instance(
            &inst,
            &Strategy::type_first(EditKind::Replace),
            &ConstructOptions::default(),
        )
        .unwrap();
        assert_eq!(turns.len(), 1);
        assert_eq!((turns[0].turn, turns[0].is_original()), (0, true));
        assert!(turns[0].mask.iter().all(|&m| m));
    }

    #[test]
    fn type_first_and_inverted() {
        // one append (after "we"), one replace (ran -> run), far apart
        let inst = pair(
            0,
            "we go to the park and ran",
            "we will go to the park and run",
        );
        let forward = build_intermediate(&inst, &Strategy::type_first(EditKind::Append), 0);
        assert_eq!(forward[1], s("we will go to the park and ran"));
        let inverted = Strategy::TypeFirst {
            kind: EditKind::Append,
            inverted: true,
        };
        let backward = build_intermediate(&inst, &inverted, 0);
        assert_eq!(backward[1], s("we go to the park and run"));

        let turns = expand_instance(
            &inst,
            &Strategy::type_first(EditKind::Append),
            &ConstructOptions::default(),
        )
        .unwrap();
        let summary: Vec<_> = turns
            .iter()
            .map(|t| (t.turn, t.strategy.as_str()))
            .collect();
        assert_eq!(
            summary,
            vec![(1, "append-first"), (2, "append-first"), (3, "original")]
        );
    }

    #[test]
    fn ordered_collapses_missing_kinds() {
        let inst = pair(
            0,
            "we go to the park and ran",
            "we will go to the park and run",
        );
        let strategy =
            Strategy::ordered(vec![EditKind::Delete, EditKind::Append, EditKind::Replace]).unwrap();
        let chain = build_intermediate(&inst, &strategy, 0);
        assert_eq!(
            chain,
            vec![
                inst.source.clone(),
                s("we will go to the park and ran"),
                inst.reference.clone()
            ]
        );
    }

    #[test]
    fn k_turn_three_units() {
        // Delete "junk", replace "wrong", append "new" after "d".
        let inst = pair(5, "junk a b wrong c d", "a b right c d new");
        let strategy = Strategy::k_turn(3).unwrap();
        let x1 = s("junk a b right c d");
        let x2 = s("a b right c d");
        let seed = (0..256)
            .find(|&seed| {
                let chain = build_intermediate(&inst, &strategy, seed);
                chain.len() == 4 && chain[1] == x1 && chain[2] == x2
            })
            .expect("some seed orders the units replace, delete, append");
        let chain = build_intermediate(&inst, &strategy, seed);
        let turns = emit_turns(&inst, &chain, &strategy).unwrap();
        let rep = |t: &str| EditLabel::Replace(t.into());
        assert_eq!(turns.len(), 3);
        assert_eq!(
            turns[0].labels.labels,
            vec![Keep, Keep, Keep, rep("right"), Keep, Keep]
        );
        assert_eq!(turns[0].mask, vec![false, true, true, true, true, false]);
        assert_eq!(
            turns[1].labels.labels,
            vec![Delete, Keep, Keep, Keep, Keep, Keep]
        );
        assert_eq!(turns[1].mask, vec![true, true, true, true, true, false]);
        assert_eq!(
            turns[2].labels.labels,
            vec![Keep, Keep, Keep, Keep, Append("new".into())]
        );
        assert!(turns[2].mask.iter().all(|&m| m));
        assert!(turns.iter().all(|t| t.strategy == "kturn:3"));
    }

    #[test]
    fn k_turn_groups_cover_every_order() {
        let inst = pair(5, "junk a b wrong c d", "a b right c d new");
        for seed in 0..32 {
            let chain = build_intermediate(&inst, &Strategy::k_turn(3).unwrap(), seed);
            assert_eq!(chain.len(), 4);
            for hop in chain.windows(2) {
                assert_eq!(align(&hop[0], &hop[1]).num_error_units(), 1);
            }
        }
    }

    #[test]
    fn emit_rejects_foreign_chain() {
        let inst = oldest_pair();
        let strategy = Strategy::random(0.5).unwrap();
        assert!(emit_turns(&inst, &[s("x"), inst.reference.clone()], &strategy).is_err());
        assert!(emit_turns(&inst, &[inst.source.clone(), s("x")], &strategy).is_err());
        assert!(emit_turns(&inst, std::slice::from_ref(&inst.source), &strategy).is_err());
    }

    #[test]
    fn two_element_chain_is_original() {
        let inst = oldest_pair();
        let turns = emit_turns(
            &inst,
            &[inst.source.clone(), inst.reference.clone()],
            &Strategy::random(0.5).unwrap(),
        )
        .unwrap();
        assert_eq!(turns.len(), 1);
        assert_eq!(turns[0].turn, 0);
        assert_eq!(turns[0].strategy, "original");
        assert_eq!(turns[0].mask_zeros(), 0);
    }

    #[test]
    fn sentinel_mask_tracks_leading_insert() {
        // leading insert "we" plus a later replace
        let inst = pair(0, "go to the park and ran", "we go to the park and run");
        let chain = build_intermediate(&inst, &Strategy::type_first(EditKind::Replace), 0);
        let turns = emit_turns(&inst, &chain, &Strategy::type_first(EditKind::Replace)).unwrap();
        assert!(!turns[0].sentinel_mask);
        assert_eq!(turns[1].labels.sentinel, Append("we".into()));
        assert!(turns[1].sentinel_mask);
    }

    #[test]
    fn corpus_is_ordered_and_include_original_respected() {
        let corpus = vec![
            oldest_pair(),
            pair(1, "a b", "a b"),
            pair(
                2,
                "we go to the park and ran",
                "we will go to the park and run",
            ),
        ];
        let strategy = Strategy::type_first(EditKind::Append);
        let with = construct_corpus(&corpus, &strategy, &ConstructOptions::default()).unwrap();
        let keys: Vec<_> = with.iter().map(|t| (t.origin_id, t.turn)).collect();
        assert_eq!(keys, vec![(0, 0), (1, 0), (2, 1), (2, 2), (2, 3)]);
        let without = construct_corpus(
            &corpus,
            &strategy,
            &ConstructOptions {
                include_original: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(without.len(), 4);
    }

    #[test]
    fn rng_streams_depend_on_seed_and_id() {
        use rand::RngCore;
        let a = instance_rng(1, 0).next_u64();
        assert_eq!(a, instance_rng(1, 0).next_u64());
        assert_ne!(a, instance_rng(2, 0).next_u64());
        assert_ne!(a, instance_rng(1, 1).next_u64());
    }
}
