use std::sync::Arc;
use std::time::Duration;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::journal::Command;
use super::{
    BattleChoiceView, BattlePairView, BriefingFor, ItemCard, Progress, RoundView, SelectionView,
    SessionError, StateView, Step,
};
use crate::feedback::{build_report, GameReport, RoundResult};
use crate::game::{
    compose_gallery_with, GalleryEntry, GameError, RoundState, RoundStatus, ScoringParams,
};
use crate::graph::{
    eligible_game_items, validate_snapshot, ItemId, Person, PersonId, ProfileSnapshot,
};
use crate::ranking::{BattlePlan, RankingError, BATTLE_ROUNDS};

const BATTLE_STREAM: u64 = 0;
const GALLERY_STREAM_BASE: u64 = 1;

/// Derives an independent seed for one part of the session.
pub(crate) fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Result of one command.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    State(StateView),
    Step(Step),
    BattlePair(BattlePairView),
    BattleChoice(BattleChoiceView),
    Round(RoundView),
    Selection(SelectionView),
    Report(Box<GameReport>),
}

/// One player's game. Commands are applied with an explicit `now`; a
/// failed command leaves the session as it was, apart from settling a
/// round that has already timed out.
#[derive(Debug, Clone)]
pub struct Session {
    snapshot: Arc<ProfileSnapshot>,
    seed: u64,
    params: ScoringParams,
    pool: Arc<[Person]>,
    step: Step,
    battle: Option<BattlePlan>,
    game_items: Vec<ItemId>,
    galleries: Vec<Vec<GalleryEntry>>,
    rounds_done: Vec<RoundResult>,
    active_round: Option<RoundState>,
    report: Option<GameReport>,
}

impl Session {
    pub fn new(
        snapshot: Arc<ProfileSnapshot>,
        seed: u64,
        params: ScoringParams,
        pool: Arc<[Person]>,
    ) -> Result<Self, SessionError> {
        let report = validate_snapshot(&snapshot);
        if !report.ok {
            return Err(SessionError::InvalidSnapshot(report));
        }
        let eligible = eligible_game_items(&snapshot).len();
        if eligible < params.rounds_per_game {
            return Err(SessionError::UnplayableSnapshot {
                eligible,
                needed: params.rounds_per_game,
            });
        }
        Ok(Self {
            snapshot,
            seed,
            params,
            pool,
            step: Step::Motivation,
            battle: None,
            game_items: Vec::new(),
            galleries: Vec::new(),
            rounds_done: Vec::new(),
            active_round: None,
            report: None,
        })
    }

    pub fn step(&self) -> Step {
        self.step
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &ScoringParams {
        &self.params
    }

    pub fn snapshot(&self) -> &Arc<ProfileSnapshot> {
        &self.snapshot
    }

    pub fn battle_plan(&self) -> Option<&BattlePlan> {
        self.battle.as_ref()
    }

    pub fn game_items(&self) -> &[ItemId] {
        &self.game_items
    }

    pub fn rounds_done(&self) -> &[RoundResult] {
        &self.rounds_done
    }

    pub fn active_round(&self) -> Option<&RoundState> {
        self.active_round.as_ref()
    }

    pub fn apply(&mut self, cmd: &Command, now: Duration) -> Result<Response, SessionError> {
        if let (Command::RoundSelect { .. }, Some(round)) = (cmd, &self.active_round) {
            if round.status_at(now, &self.params) == RoundStatus::Lost
                && round.status() == RoundStatus::InProgress
            {
                // The pick arrived after the clock ran out; it is not applied.
                let hearts = round.hearts();
                self.settle(now);
                return Ok(Response::Selection(SelectionView {
                    outcome: crate::game::SelectionOutcome::LostRound,
                    score: 0,
                    hearts,
                    frame: None,
                    step: self.step,
                }));
            }
        }
        self.settle(now);
        let mut draft = self.clone();
        let response = draft.exec(cmd, now)?;
        *self = draft;
        Ok(response)
    }

    /// Finalizes the active round if it has timed out.
    pub fn settle(&mut self, now: Duration) {
        let expired = match &self.active_round {
            Some(r) => {
                r.status() == RoundStatus::InProgress && r.status_at(now, &self.params).is_over()
            }
            None => false,
        };
        if expired {
            let round = self.active_round.take().expect("checked above");
            self.finish_round(round.settle(now, &self.params), now);
        }
    }

    fn exec(&mut self, cmd: &Command, now: Duration) -> Result<Response, SessionError> {
        match cmd {
            Command::State => Ok(Response::State(self.state_view(now))),
            Command::Advance => self.advance(now).map(Response::Step),
            Command::BattlePair => self.battle_pair().map(Response::BattlePair),
            Command::BattleChoice { winner } => {
                self.battle_choice(winner).map(Response::BattleChoice)
            }
            Command::RoundView => self.round_view(now).map(Response::Round),
            Command::RoundSelect { person } => {
                self.round_select(person, now).map(Response::Selection)
            }
            Command::Result => self.result().map(|r| Response::Report(Box::new(r))),
        }
    }

    fn state_view(&self, now: Duration) -> StateView {
        let mut round_points: Vec<u32> = self.rounds_done.iter().map(|r| r.points).collect();
        if let Some(r) = &self.active_round {
            if let Ok(score) = r.current_score(now, &self.params) {
                round_points.push(score);
            }
        }
        StateView {
            step: self.step,
            progress: Progress {
                battle_round: match (&self.step, &self.battle) {
                    (Step::ItemBattle, Some(plan)) => Some(plan.cursor() + 1),
                    _ => None,
                },
                battles_total: self
                    .battle
                    .as_ref()
                    .map_or(BATTLE_ROUNDS, BattlePlan::rounds),
                rounds_completed: self.rounds_done.len(),
                rounds_total: self.params.rounds_per_game,
                round_points,
            },
        }
    }

    fn advance(&mut self, now: Duration) -> Result<Step, SessionError> {
        self.step = match self.step {
            Step::Motivation => Step::Briefing(BriefingFor::ItemBattle),
            Step::Briefing(BriefingFor::ItemBattle) => {
                let plan = BattlePlan::new(
                    &self.snapshot.item_ids(),
                    sub_seed(self.seed, BATTLE_STREAM),
                )
                .map_err(|e| SessionError::Internal(e.to_string()))?;
                self.battle = Some(plan);
                Step::ItemBattle
            }
            Step::Briefing(BriefingFor::Game) => {
                self.start_round(0, now);
                self.step
            }
            Step::Briefing(BriefingFor::ScoreFeedback) => Step::ScoreFeedback,
            Step::ScoreFeedback => Step::Finished,
            step => return Err(SessionError::IllegalTransition(step)),
        };
        Ok(self.step)
    }

    fn card(&self, id: &ItemId) -> ItemCard {
        let item = self
            .snapshot
            .item(id)
            .expect("session items come from its snapshot");
        ItemCard {
            id: item.id.clone(),
            kind: item.kind,
            content_ref: item.content_ref.clone(),
        }
    }

    fn battle(&self) -> Result<&BattlePlan, SessionError> {
        match (&self.step, &self.battle) {
            (Step::ItemBattle, Some(plan)) => Ok(plan),
            _ => Err(SessionError::WrongStep {
                expected: "item_battle",
                actual: self.step,
            }),
        }
    }

    fn battle_pair(&self) -> Result<BattlePairView, SessionError> {
        let plan = self.battle()?;
        let pair = plan
            .current_pair()
            .ok_or_else(|| SessionError::Internal("battle finished without advancing".into()))?;
        Ok(BattlePairView {
            round_no: plan.cursor() + 1,
            item_a: self.card(&pair.a),
            item_b: self.card(&pair.b),
        })
    }

    fn battle_choice(&mut self, winner: &ItemId) -> Result<BattleChoiceView, SessionError> {
        let plan = self.battle()?.record_choice(winner).map_err(|e| match e {
            RankingError::NotInCurrentPair(item) => SessionError::NotInCurrentPair(item),
            other => SessionError::Internal(other.to_string()),
        })?;
        let finished = plan.is_finished();
        self.battle = Some(plan);
        if !finished {
            return self.battle_pair().map(BattleChoiceView::Next);
        }

        let plan = self.battle.as_ref().expect("just stored");
        let ranking = plan
            .final_ranking()
            .map_err(|e| SessionError::Internal(e.to_string()))?;
        let eligible = eligible_game_items(&self.snapshot);
        let items = ranking
            .select_game_items(&eligible, self.params.rounds_per_game)
            .map_err(|e| SessionError::Internal(e.to_string()))?;
        let galleries = items
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let item = self
                    .snapshot
                    .item(id)
                    .expect("ranked items come from the snapshot");
                compose_gallery_with(
                    item,
                    &self.snapshot,
                    sub_seed(self.seed, GALLERY_STREAM_BASE + i as u64),
                    &self.params,
                    &self.pool,
                )
            })
            .collect::<Result<Vec<_>, GameError>>()
            .map_err(|e| SessionError::Internal(e.to_string()))?;

        self.game_items = items.clone();
        self.galleries = galleries;
        self.step = Step::Briefing(BriefingFor::Game);
        Ok(BattleChoiceView::Done {
            step: self.step,
            game_items: items,
        })
    }

    fn start_round(&mut self, index: usize, now: Duration) {
        self.active_round = Some(RoundState::new(
            self.game_items[index].clone(),
            self.galleries[index].clone(),
            now,
            &self.params,
        ));
        self.step = Step::Game(index as u8 + 1);
    }

    fn finish_round(&mut self, round: RoundState, now: Duration) {
        let result = round.result().expect("finished rounds have a result");
        self.rounds_done.push(result);
        self.active_round = None;
        if self.rounds_done.len() < self.params.rounds_per_game {
            self.start_round(self.rounds_done.len(), now);
        } else {
            self.step = Step::Briefing(BriefingFor::ScoreFeedback);
        }
    }

    fn round(&self) -> Result<(u8, &RoundState), SessionError> {
        match (self.step, &self.active_round) {
            (Step::Game(i), Some(round)) => Ok((i, round)),
            _ => Err(SessionError::WrongStep {
                expected: "game",
                actual: self.step,
            }),
        }
    }

    fn round_view(&self, now: Duration) -> Result<RoundView, SessionError> {
        let (round_no, round) = self.round()?;
        let payload = round.client_view(now, &self.params);
        Ok(RoundView {
            round_no,
            item: self.card(round.item()),
            gallery: payload.gallery,
            score: payload.score,
            hearts: payload.hearts,
            marks: payload.marks,
        })
    }

    fn round_select(
        &mut self,
        person: &PersonId,
        now: Duration,
    ) -> Result<SelectionView, SessionError> {
        let (_, round) = self.round()?;
        let (next, outcome) =
            round
                .select_person(person, now, &self.params)
                .map_err(|e| match e {
                    GameError::NotInGallery(p) => SessionError::NotInGallery(p),
                    GameError::AlreadySelected(p) => SessionError::AlreadySelected(p),
                    other => SessionError::Internal(other.to_string()),
                })?;
        let frame = next.frame_of(person);
        let hearts = next.hearts();
        let score = match next.status() {
            RoundStatus::InProgress => next.current_score(now, &self.params).unwrap_or(0),
            RoundStatus::Won { points } => points,
            RoundStatus::Lost => 0,
        };
        if next.status().is_over() {
            self.finish_round(next, now);
        } else {
            self.active_round = Some(next);
        }
        Ok(SelectionView {
            outcome,
            score,
            hearts,
            frame,
            step: self.step,
        })
    }

    fn result(&mut self) -> Result<GameReport, SessionError> {
        if !matches!(self.step, Step::ScoreFeedback | Step::Finished) {
            return Err(SessionError::WrongStep {
                expected: "score_feedback",
                actual: self.step,
            });
        }
        if self.report.is_none() {
            let report = build_report(
                &self.snapshot,
                self.rounds_done.clone(),
                self.params.rounds_per_game,
            )
            .map_err(|e| SessionError::Internal(e.to_string()))?;
            self.report = Some(report);
        }
        self.step = Step::Finished;
        Ok(self.report.clone().expect("just built"))
    }
}
