//! Item Battle: pairwise "which is more personal" comparisons rated with Elo.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::ItemId;

pub const INITIAL_RATING: f64 = 1000.0;
pub const K_FACTOR: f64 = 32.0;
pub const BATTLE_ROUNDS: usize = 10;
/// Items needed downstream by the five game rounds.
pub const MIN_BATTLE_ITEMS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankingError {
    #[error("item battle needs at least {MIN_BATTLE_ITEMS} items, got {0}")]
    TooFewItems(usize),
    #[error("duplicate item {0} in battle")]
    DuplicateItem(ItemId),
    #[error("{0} is not part of the current pair")]
    NotInCurrentPair(ItemId),
    #[error("all battles have been played")]
    BattleFinished,
    #[error("battle still has {0} pairs to play")]
    BattleUnfinished(usize),
    #[error("only {available} eligible items ranked, {needed} needed")]
    NotEnoughEligible { available: usize, needed: usize },
}

/// Probability that an item rated `ra` beats one rated `rb`.
pub fn expected_score(ra: f64, rb: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((rb - ra) / 400.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattlePair {
    pub a: ItemId,
    pub b: ItemId,
}

impl BattlePair {
    pub fn contains(&self, item: &ItemId) -> bool {
        &self.a == item || &self.b == item
    }

    fn other(&self, item: &ItemId) -> &ItemId {
        if &self.a == item {
            &self.b
        } else {
            &self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattleOutcome {
    pub pair: BattlePair,
    pub winner: ItemId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BattlePlan {
    ratings: BTreeMap<ItemId, f64>,
    rounds: usize,
    /// Unplayed pairs in seeded random order and orientation.
    pool: Vec<BattlePair>,
    plays: BTreeMap<ItemId, usize>,
    /// Pairs drawn so far; the last one is current while the battle runs.
    schedule: Vec<BattlePair>,
    cursor: usize,
    history: Vec<BattleOutcome>,
}

impl BattlePlan {
    /// Prepares a battle of `min(10, C(n, 2))` distinct pairs.
    ///
    /// Pairs are drawn one at a time, Swiss style: among the unplayed pairs the
    /// next one minimises the larger appearance count, then the summed count,
    /// then the rating gap. Every item plays at least once whenever
    /// `2 * rounds >= n`. The remaining ties fall to the seeded shuffle, so the
    /// plan is a pure function of the seed and the choices made.
    pub fn new(items: &[ItemId], seed: u64) -> Result<Self, RankingError> {
        if items.len() < MIN_BATTLE_ITEMS {
            return Err(RankingError::TooFewItems(items.len()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = items.iter().find(|i| !seen.insert(*i)) {
            return Err(RankingError::DuplicateItem(dup.clone()));
        }

        let n = items.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool: Vec<BattlePair> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (a, b) = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
                BattlePair {
                    a: items[a].clone(),
                    b: items[b].clone(),
                }
            })
            .collect();
        pool.shuffle(&mut rng);

        let mut plan = Self {
            ratings: items.iter().map(|i| (i.clone(), INITIAL_RATING)).collect(),
            rounds: BATTLE_ROUNDS.min(n * (n - 1) / 2),
            pool,
            plays: items.iter().map(|i| (i.clone(), 0)).collect(),
            schedule: Vec::new(),
            cursor: 0,
            history: Vec::new(),
        };
        plan.draw_next();
        Ok(plan)
    }

    fn draw_next(&mut self) {
        if self.schedule.len() == self.rounds {
            return;
        }
        let pos = self
            .pool
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (pa, pb) = (self.plays[&p.a], self.plays[&p.b]);
                let gap = (self.ratings[&p.a] - self.ratings[&p.b]).abs();
                (pa.max(pb), pa + pb, gap, i)
            })
            .min_by(|x, y| {
                x.0.cmp(&y.0)
                    .then(x.1.cmp(&y.1))
                    .then(x.2.total_cmp(&y.2))
                    .then(x.3.cmp(&y.3))
            })
            .map(|k| k.3)
            .expect("rounds never exceed the number of distinct pairs");
        let pair = self.pool.remove(pos);
        *self.plays.get_mut(&pair.a).unwrap() += 1;
        *self.plays.get_mut(&pair.b).unwrap() += 1;
        self.schedule.push(pair);
    }

    /// Total number of battles.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn schedule(&self) -> &[BattlePair] {
        &self.schedule
    }

    pub fn ratings(&self) -> &BTreeMap<ItemId, f64> {
        &self.ratings
    }

    pub fn rating(&self, item: &ItemId) -> Option<f64> {
        self.ratings.get(item).copied()
    }

    pub fn history(&self) -> &[BattleOutcome] {
        &self.history
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn current_pair(&self) -> Option<&BattlePair> {
        self.schedule.get(self.cursor)
    }

    pub fn is_finished(&self) -> bool {
        self.cursor == self.rounds
    }

    /// Applies one Elo update. Returns a new plan; `self` is left untouched.
    pub fn record_choice(&self, winner: &ItemId) -> Result<BattlePlan, RankingError> {
        let pair = self.current_pair().ok_or(RankingError::BattleFinished)?;
        if !pair.contains(winner) {
            return Err(RankingError::NotInCurrentPair(winner.clone()));
        }
        let loser = pair.other(winner);
        let (rw, rl) = (self.ratings[winner], self.ratings[loser]);
        let delta = K_FACTOR * (1.0 - expected_score(rw, rl));

        let mut next = self.clone();
        // The loser's update K * (0 - E_loser) equals -delta since E_w + E_l = 1.
        next.ratings.insert(winner.clone(), rw + delta);
        next.ratings.insert(loser.clone(), rl - delta);
        next.history.push(BattleOutcome {
            pair: pair.clone(),
            winner: winner.clone(),
        });
        next.cursor += 1;
        next.draw_next();
        Ok(next)
    }

    pub fn final_ranking(&self) -> Result<SensitivityRanking, RankingError> {
        if !self.is_finished() {
            return Err(RankingError::BattleUnfinished(self.rounds - self.cursor));
        }
        let last_win = |item: &ItemId| self.history.iter().rposition(|o| &o.winner == item);
        let mut ordered: Vec<ItemId> = self.ratings.keys().cloned().collect();
        ordered.sort_by(|x, y| {
            self.ratings[y]
                .total_cmp(&self.ratings[x])
                .then_with(|| match (last_win(x), last_win(y)) {
                    (Some(a), Some(b)) => b.cmp(&a),
                    (Some(_), None) => Ordering::Less,
                    (None, Some(_)) => Ordering::Greater,
                    (None, None) => Ordering::Equal,
                })
                .then_with(|| x.cmp(y))
        });
        Ok(SensitivityRanking {
            ordered,
            ratings: self.ratings.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRanking {
    /// Most sensitive first.
    pub ordered: Vec<ItemId>,
    pub ratings: BTreeMap<ItemId, f64>,
}

impl SensitivityRanking {
    /// The `k` highest-ranked items that are also game-eligible, in rank order.
    pub fn select_game_items(
        &self,
        eligible: &[ItemId],
        k: usize,
    ) -> Result<Vec<ItemId>, RankingError> {
        let picked: Vec<ItemId> = self
            .ordered
            .iter()
            .filter(|i| eligible.contains(i))
            .take(k)
            .cloned()
            .collect();
        if picked.len() < k {
            return Err(RankingError::NotEnoughEligible {
                available: picked.len(),
                needed: k,
            });
        }
        Ok(picked)
    }
}
