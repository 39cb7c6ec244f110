//! Find Your Friends: gallery composition, timed scoring and hearts.

mod gallery;
mod round;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ItemId, PersonId};

pub use gallery::{compose_gallery, compose_gallery_with, Composition, GalleryEntry};
pub use round::{
    Frame, GalleryTile, RoundPayload, RoundState, RoundStatus, SelectionMark, SelectionOutcome,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("item {0} has no contact among its viewers")]
    IneligibleItem(ItemId),
    #[error("gallery needs {needed} persons but only {available} are available")]
    NotEnoughPersons { needed: usize, available: usize },
    #[error("the round is over")]
    RoundOver,
    #[error("{0} is not in the gallery")]
    NotInGallery(PersonId),
    #[error("{0} was already selected")]
    AlreadySelected(PersonId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringParams {
    pub start_score: u32,
    pub time_decay_per_second: u32,
    pub wrong_penalty: u32,
    pub hearts: u32,
    pub rounds_per_game: usize,
    pub gallery_size: usize,
}

impl ScoringParams {
    pub const DEFAULT: ScoringParams = ScoringParams {
        start_score: 10_000,
        time_decay_per_second: 200,
        wrong_penalty: 1000,
        hearts: 5,
        rounds_per_game: 5,
        gallery_size: 20,
    };

    /// Seconds until an untouched round decays to zero.
    pub fn round_time_limit_secs(&self) -> u64 {
        u64::from(self.start_score).div_ceil(u64::from(self.time_decay_per_second))
    }
}

impl Default for ScoringParams {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = ScoringParams::default();
        assert_eq!(p.start_score, 10_000);
        assert_eq!(p.time_decay_per_second, 200);
        assert_eq!(p.wrong_penalty, 1000);
        assert_eq!(p.hearts, 5);
        assert_eq!(p.rounds_per_game, 5);
        assert_eq!(p.gallery_size, 20);
        assert_eq!(p.round_time_limit_secs(), 50);
    }
}
