//! Monte-Carlo players driven through the real session service.
//!
//! Each simulated session gets its own [`SessionService`] with a
//! [`MockClock`], so time passes only when the player acts. A player with
//! perception error `ε` flips each gallery entry's true viewer status with
//! probability `ε` and then picks every entry it believes is a viewer, one
//! pick every `reaction_seconds_per_pick`.

use std::sync::Arc;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{Clock, MockClock};
use crate::feedback::{GameReport, Smiley};
use crate::graph::{ItemId, PersonId, ProfileSnapshot};
use crate::session::{
    sub_seed, BattleChoiceView, ServiceOptions, SessionError, SessionService, Step, Token,
    Transcript,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BattlePolicy {
    /// Items listed earlier in the snapshot are treated as more sensitive.
    TrueOrder,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerPolicy {
    pub perception_error: f64,
    pub reaction_seconds_per_pick: f64,
    pub battle_policy: BattlePolicy,
}

impl PlayerPolicy {
    pub fn perfect(reaction_seconds_per_pick: f64) -> Self {
        Self {
            perception_error: 0.0,
            reaction_seconds_per_pick,
            battle_policy: BattlePolicy::TrueOrder,
        }
    }

    fn check(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.perception_error) {
            return Err(SimError::InvalidPolicy(format!(
                "perception_error {} is outside [0, 1]",
                self.perception_error
            )));
        }
        if !self.reaction_seconds_per_pick.is_finite() || self.reaction_seconds_per_pick < 0.0 {
            return Err(SimError::InvalidPolicy(format!(
                "reaction_seconds_per_pick {} must be a finite value >= 0",
                self.reaction_seconds_per_pick
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid player policy: {0}")]
    InvalidPolicy(String),
    #[error("session {index}: {source}")]
    Session {
        index: usize,
        #[source]
        source: SessionError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub p50: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// Nearest-rank percentiles. `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |p: f64| {
            let r = (p * sorted.len() as f64).ceil() as usize;
            sorted[r.clamp(1, sorted.len()) - 1]
        };
        Some(Self {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p50: rank(0.50),
            p95: rank(0.95),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SmileyCounts {
    pub sad: usize,
    pub neutral: usize,
    pub happy: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub sessions: usize,
    pub seed: u64,
    pub policy: PlayerPolicy,
    pub score: Stats,
    pub awareness_index: Stats,
    pub smileys: SmileyCounts,
    pub rounds_won: usize,
    pub rounds_lost: usize,
}

#[derive(Debug, Clone)]
pub struct SimulatedSession {
    pub session_seed: u64,
    pub report: GameReport,
    pub transcript: Transcript,
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub summary: SimulationSummary,
    pub sessions: Vec<SimulatedSession>,
}

/// Plays `sessions` full games in parallel. Session `i` uses seeds derived
/// from `seed` and `i` alone, so the outcome does not depend on scheduling.
pub fn simulate(
    snapshot: Arc<ProfileSnapshot>,
    policy: PlayerPolicy,
    sessions: usize,
    seed: u64,
    opts: &ServiceOptions,
) -> Result<SimulationRun, SimError> {
    policy.check()?;
    let played = (0..sessions)
        .into_par_iter()
        .map(|index| {
            play_one(snapshot.clone(), policy, seed, index, opts)
                .map_err(|source| SimError::Session { index, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimulationRun {
        summary: summarize(&played, seed, policy),
        sessions: played,
    })
}

fn summarize(played: &[SimulatedSession], seed: u64, policy: PlayerPolicy) -> SimulationSummary {
    let scores: Vec<f64> = played.iter().map(|s| s.report.total as f64).collect();
    let indices: Vec<f64> = played.iter().map(|s| s.report.awareness_index).collect();
    let empty = Stats {
        mean: 0.0,
        p50: 0.0,
        p95: 0.0,
        min: 0.0,
        max: 0.0,
    };
    let mut smileys = SmileyCounts::default();
    let (mut rounds_won, mut rounds_lost) = (0, 0);
    for s in played {
        match s.report.smiley {
            Smiley::Sad => smileys.sad += 1,
            Smiley::Neutral => smileys.neutral += 1,
            Smiley::Happy => smileys.happy += 1,
        }
        let won = s.report.round_results.iter().filter(|r| r.won).count();
        rounds_won += won;
        rounds_lost += s.report.round_results.len() - won;
    }
    SimulationSummary {
        sessions: played.len(),
        seed,
        policy,
        score: Stats::of(&scores).unwrap_or(empty),
        awareness_index: Stats::of(&indices).unwrap_or(empty),
        smileys,
        rounds_won,
        rounds_lost,
    }
}

fn play_one(
    snapshot: Arc<ProfileSnapshot>,
    policy: PlayerPolicy,
    seed: u64,
    index: usize,
    opts: &ServiceOptions,
) -> Result<SimulatedSession, SessionError> {
    let session_seed = sub_seed(seed, 2 * index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 2 * index as u64 + 1));
    let clock = Arc::new(MockClock::new());
    let service = SessionService::new(
        clock.clone(),
        ServiceOptions {
            journal_path: None,
            max_sessions: 1,
            ..opts.clone()
        },
    )
    .map_err(|e| SessionError::Internal(e.to_string()))?;
    let (token, _) = service.create_session(snapshot.clone(), Some(session_seed))?;

    // Motivation and the battle briefing.
    service.advance(&token)?;
    service.advance(&token)?;
    let rank = |id: &ItemId| snapshot.item_ids().iter().position(|i| i == id);
    let mut pair = service.battle_pair(&token)?;
    loop {
        let (a, b) = (pair.item_a.id, pair.item_b.id);
        let winner = match policy.battle_policy {
            BattlePolicy::TrueOrder if rank(&a) <= rank(&b) => a,
            BattlePolicy::TrueOrder => b,
            BattlePolicy::Random if rng.gen_bool(0.5) => a,
            BattlePolicy::Random => b,
        };
        match service.battle_choice(&token, winner)? {
            BattleChoiceView::Next(next) => pair = next,
            BattleChoiceView::Done { .. } => break,
        }
    }

    let reaction = Duration::from_secs_f64(policy.reaction_seconds_per_pick);
    let limit = Duration::from_secs(opts.params.round_time_limit_secs());
    let mut step = service.advance(&token)?;
    while let Step::Game(round_no) = step {
        let started = clock.now();
        let picks = perceived_viewers(&service, &token, policy.perception_error, &mut rng)?;
        let mut over = false;
        for (k, person) in picks.into_iter().enumerate() {
            clock.set(started + reaction * (k as u32 + 1));
            let selection = service.round_select(&token, person)?;
            if selection.step != Step::Game(round_no) {
                over = true;
                step = selection.step;
                break;
            }
        }
        if !over {
            // Out of picks: wait for the round to time out.
            clock.set(clock.now().max(started + limit));
            step = service.state(&token)?.step;
        }
    }

    service.advance(&token)?;
    let report = service.result(&token)?;
    let transcript = service.transcript(&token)?;
    Ok(SimulatedSession {
        session_seed,
        report,
        transcript,
    })
}

/// Gallery entries the player believes can see the item, in gallery order.
fn perceived_viewers(
    service: &SessionService,
    token: &Token,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PersonId>, SessionError> {
    let truth: Vec<(PersonId, bool)> = service.inspect(token, |s| {
        s.active_round()
            .map(|r| {
                r.gallery()
                    .iter()
                    .map(|g| (g.person.clone(), g.is_viewer))
                    .collect()
            })
            .unwrap_or_default()
    })?;
    Ok(truth
        .into_iter()
        .filter_map(|(person, is_viewer)| {
            let flipped = epsilon > 0.0 && rng.gen_bool(epsilon);
            (is_viewer != flipped).then_some(person)
        })
        .collect())
}
