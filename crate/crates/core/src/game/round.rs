use std::collections::BTreeSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{GalleryEntry, GameError, ScoringParams};
use crate::feedback::RoundResult;
use crate::graph::{ItemId, PersonId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RoundStatus {
    InProgress,
    Won { points: u32 },
    Lost,
}

impl RoundStatus {
    pub fn is_over(self) -> bool {
        !matches!(self, Self::InProgress)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionOutcome {
    Correct,
    Wrong,
    WonRound,
    LostRound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Green,
    Red,
}

/// State of one Find Your Friends round.
///
/// Every transition returns a new value. `started_at` and all `now`
/// arguments are offsets on the same monotonic clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundState {
    item: ItemId,
    gallery: Vec<GalleryEntry>,
    selected: Vec<PersonId>,
    wrong_count: u32,
    hearts: u32,
    started_at: Duration,
    status: RoundStatus,
}

impl RoundState {
    pub fn new(
        item: ItemId,
        gallery: Vec<GalleryEntry>,
        started_at: Duration,
        params: &ScoringParams,
    ) -> Self {
        debug_assert!(gallery.iter().any(|e| e.is_viewer));
        Self {
            item,
            gallery,
            selected: Vec::new(),
            wrong_count: 0,
            hearts: params.hearts,
            started_at,
            status: RoundStatus::InProgress,
        }
    }

    pub fn item(&self) -> &ItemId {
        &self.item
    }

    pub fn gallery(&self) -> &[GalleryEntry] {
        &self.gallery
    }

    pub fn selected(&self) -> &[PersonId] {
        &self.selected
    }

    pub fn wrong_count(&self) -> u32 {
        self.wrong_count
    }

    pub fn hearts(&self) -> u32 {
        self.hearts
    }

    pub fn started_at(&self) -> Duration {
        self.started_at
    }

    /// Stored status, without applying the clock. See [`Self::status_at`].
    pub fn status(&self) -> RoundStatus {
        self.status
    }

    fn score_unchecked(&self, now: Duration, p: &ScoringParams) -> u32 {
        let seconds = now.saturating_sub(self.started_at).as_secs();
        let score = i128::from(p.start_score)
            - i128::from(p.time_decay_per_second) * i128::from(seconds)
            - i128::from(p.wrong_penalty) * i128::from(self.wrong_count);
        score.max(0) as u32
    }

    /// Live score: start score minus whole-second decay and wrong-pick penalties, floored at 0.
    pub fn current_score(&self, now: Duration, p: &ScoringParams) -> Result<u32, GameError> {
        match self.status {
            RoundStatus::InProgress => Ok(self.score_unchecked(now, p)),
            _ => Err(GameError::RoundOver),
        }
    }

    /// Status with time-out applied: an unfinished round whose score has
    /// decayed to zero is lost.
    pub fn status_at(&self, now: Duration, p: &ScoringParams) -> RoundStatus {
        match self.status {
            RoundStatus::InProgress if self.score_unchecked(now, p) == 0 => RoundStatus::Lost,
            status => status,
        }
    }

    /// Persists a time-out loss into the stored status.
    pub fn settle(&self, now: Duration, p: &ScoringParams) -> RoundState {
        RoundState {
            status: self.status_at(now, p),
            ..self.clone()
        }
    }

    pub fn select_person(
        &self,
        person: &PersonId,
        now: Duration,
        p: &ScoringParams,
    ) -> Result<(RoundState, SelectionOutcome), GameError> {
        if self.status_at(now, p).is_over() {
            return Err(GameError::RoundOver);
        }
        let entry = self
            .gallery
            .iter()
            .find(|e| &e.person == person)
            .ok_or_else(|| GameError::NotInGallery(person.clone()))?;
        if self.selected.contains(person) {
            return Err(GameError::AlreadySelected(person.clone()));
        }

        let mut next = self.clone();
        next.selected.push(person.clone());
        let outcome = if entry.is_viewer {
            let all_found = next
                .gallery
                .iter()
                .filter(|e| e.is_viewer)
                .all(|e| next.selected.contains(&e.person));
            if all_found {
                next.status = RoundStatus::Won {
                    points: next.score_unchecked(now, p),
                };
                SelectionOutcome::WonRound
            } else {
                SelectionOutcome::Correct
            }
        } else {
            next.wrong_count += 1;
            next.hearts = next.hearts.saturating_sub(1);
            if next.hearts == 0 || next.score_unchecked(now, p) == 0 {
                next.status = RoundStatus::Lost;
                SelectionOutcome::LostRound
            } else {
                SelectionOutcome::Wrong
            }
        };
        Ok((next, outcome))
    }

    pub fn is_viewer(&self, person: &PersonId) -> Option<bool> {
        self.gallery
            .iter()
            .find(|e| &e.person == person)
            .map(|e| e.is_viewer)
    }

    pub fn frame_of(&self, person: &PersonId) -> Option<Frame> {
        if !self.selected.contains(person) {
            return None;
        }
        self.is_viewer(person)
            .map(|v| if v { Frame::Green } else { Frame::Red })
    }

    /// Client payload. Carries no viewer flags, only the frames of tiles
    /// the player has already clicked.
    pub fn client_view(&self, now: Duration, p: &ScoringParams) -> RoundPayload {
        RoundPayload {
            item: self.item.clone(),
            gallery: self
                .gallery
                .iter()
                .map(|e| GalleryTile {
                    person_id: e.person.clone(),
                    display_name: e.display_name.clone(),
                    avatar_ref: e.avatar_ref.clone(),
                })
                .collect(),
            score: match self.status_at(now, p) {
                RoundStatus::InProgress => self.score_unchecked(now, p),
                RoundStatus::Won { points } => points,
                RoundStatus::Lost => 0,
            },
            hearts: self.hearts,
            marks: self
                .selected
                .iter()
                .filter_map(|id| {
                    self.frame_of(id).map(|frame| SelectionMark {
                        person_id: id.clone(),
                        frame,
                    })
                })
                .collect(),
        }
    }

    /// Result of a finished round, `None` while it is still running.
    pub fn result(&self) -> Option<RoundResult> {
        let points = match self.status {
            RoundStatus::InProgress => return None,
            RoundStatus::Won { points } => points,
            RoundStatus::Lost => 0,
        };
        let displayed_viewers: BTreeSet<PersonId> = self
            .gallery
            .iter()
            .filter(|e| e.is_viewer)
            .map(|e| e.person.clone())
            .collect();
        Some(RoundResult {
            item: self.item.clone(),
            points,
            won: matches!(self.status, RoundStatus::Won { .. }),
            wrong_picks: self
                .selected
                .iter()
                .filter(|id| !displayed_viewers.contains(*id))
                .cloned()
                .collect(),
            missed_viewers: displayed_viewers
                .iter()
                .filter(|id| !self.selected.contains(id))
                .cloned()
                .collect(),
            selected: self.selected.iter().cloned().collect(),
            displayed_viewers,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GalleryTile {
    pub person_id: PersonId,
    pub display_name: String,
    pub avatar_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionMark {
    pub person_id: PersonId,
    pub frame: Frame,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundPayload {
    pub item: ItemId,
    pub gallery: Vec<GalleryTile>,
    pub score: u32,
    pub hearts: u32,
    pub marks: Vec<SelectionMark>,
}
