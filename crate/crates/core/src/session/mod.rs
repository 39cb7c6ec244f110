//! The four-step game flow as a session state machine, plus the session
//! store shared by the HTTP service, the CLI and the simulator.

mod engine;
mod journal;
mod service;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::game::{Frame, GalleryTile, SelectionMark, SelectionOutcome};
use crate::graph::{ItemId, ItemKind, PersonId, ValidationReport};

pub(crate) use engine::sub_seed;
pub use engine::{Response, Session};
pub use journal::{Command, ReplayError, ReplayMismatch, Transcript, TranscriptEntry};
pub use service::{ServiceOptions, SessionService, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BriefingFor {
    ItemBattle,
    Game,
    ScoreFeedback,
}

/// Position in the game flow:
/// motivation, briefing, item battle, briefing, five game rounds, briefing,
/// score & feedback, finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Motivation,
    Briefing(BriefingFor),
    ItemBattle,
    /// Game round, numbered from 1.
    Game(u8),
    ScoreFeedback,
    Finished,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Motivation => f.write_str("motivation"),
            Step::Briefing(BriefingFor::ItemBattle) => f.write_str("briefing:item_battle"),
            Step::Briefing(BriefingFor::Game) => f.write_str("briefing:game"),
            Step::Briefing(BriefingFor::ScoreFeedback) => f.write_str("briefing:score_feedback"),
            Step::ItemBattle => f.write_str("item_battle"),
            Step::Game(i) => write!(f, "game:{i}"),
            Step::ScoreFeedback => f.write_str("score_feedback"),
            Step::Finished => f.write_str("finished"),
        }
    }
}

impl FromStr for Step {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "motivation" => Step::Motivation,
            "briefing:item_battle" => Step::Briefing(BriefingFor::ItemBattle),
            "briefing:game" => Step::Briefing(BriefingFor::Game),
            "briefing:score_feedback" => Step::Briefing(BriefingFor::ScoreFeedback),
            "item_battle" => Step::ItemBattle,
            "score_feedback" => Step::ScoreFeedback,
            "finished" => Step::Finished,
            other => match other.strip_prefix("game:").map(str::parse::<u8>) {
                Some(Ok(i)) if i >= 1 => Step::Game(i),
                _ => return Err(format!("unknown step {other:?}")),
            },
        })
    }
}

impl Serialize for Step {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Step {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("unknown or expired session")]
    UnknownSession,
    #[error("snapshot failed validation")]
    InvalidSnapshot(ValidationReport),
    #[error("snapshot has only {eligible} items visible to at least one contact; {needed} needed")]
    UnplayableSnapshot { eligible: usize, needed: usize },
    #[error("cannot advance from step {0}")]
    IllegalTransition(Step),
    #[error("command needs step {expected}, session is at {actual}")]
    WrongStep {
        expected: &'static str,
        actual: Step,
    },
    #[error("{0} is not part of the current pair")]
    NotInCurrentPair(ItemId),
    #[error("{0} is not in the gallery")]
    NotInGallery(PersonId),
    #[error("{0} was already selected")]
    AlreadySelected(PersonId),
    #[error("session store is full")]
    StoreFull,
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl SessionError {
    /// Machine-readable error code used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownSession => "unknown_session",
            Self::InvalidSnapshot(_) => "invalid_snapshot",
            Self::UnplayableSnapshot { .. } => "unplayable_snapshot",
            Self::IllegalTransition(_) => "illegal_transition",
            Self::WrongStep { .. } => "wrong_step",
            Self::NotInCurrentPair(_) => "not_in_current_pair",
            Self::NotInGallery(_) => "not_in_gallery",
            Self::AlreadySelected(_) => "already_selected",
            Self::StoreFull => "store_full",
            Self::BadRequest(_) => "bad_request",
            Self::Internal(_) => "internal",
        }
    }

    /// Variant name, used in transcript diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Self::UnknownSession => "UnknownSession",
            Self::InvalidSnapshot(_) => "InvalidSnapshot",
            Self::UnplayableSnapshot { .. } => "UnplayableSnapshot",
            Self::IllegalTransition(_) => "IllegalTransition",
            Self::WrongStep { .. } => "WrongStep",
            Self::NotInCurrentPair(_) => "NotInCurrentPair",
            Self::NotInGallery(_) => "NotInGallery",
            Self::AlreadySelected(_) => "AlreadySelected",
            Self::StoreFull => "StoreFull",
            Self::BadRequest(_) => "BadRequest",
            Self::Internal(_) => "Internal",
        }
    }

    pub fn details(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Self::InvalidSnapshot(report) => json!({ "report": report }),
            Self::UnplayableSnapshot { eligible, needed } => {
                json!({ "eligible": eligible, "needed": needed })
            }
            Self::IllegalTransition(step) => json!({ "step": step }),
            Self::WrongStep { expected, actual } => {
                json!({ "expected": expected, "actual": actual })
            }
            Self::NotInCurrentPair(item) => json!({ "item": item }),
            Self::NotInGallery(p) | Self::AlreadySelected(p) => json!({ "person": p }),
            _ => serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemCard {
    pub id: ItemId,
    pub kind: ItemKind,
    pub content_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    /// Next battle number (1..=10) while the item battle runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub battle_round: Option<usize>,
    pub battles_total: usize,
    pub rounds_completed: usize,
    pub rounds_total: usize,
    pub round_points: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateView {
    pub step: Step,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattlePairView {
    pub round_no: usize,
    pub item_a: ItemCard,
    pub item_b: ItemCard,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BattleChoiceView {
    Next(BattlePairView),
    Done { step: Step, game_items: Vec<ItemId> },
}

/// Client payload for an active round. Deliberately has no visibility fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundView {
    pub round_no: u8,
    pub item: ItemCard,
    pub gallery: Vec<GalleryTile>,
    pub score: u32,
    pub hearts: u32,
    pub marks: Vec<SelectionMark>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionView {
    pub outcome: SelectionOutcome,
    pub score: u32,
    pub hearts: u32,
    /// Absent when the round had already timed out and the pick was ignored.
    pub frame: Option<Frame>,
    pub step: Step,
}
