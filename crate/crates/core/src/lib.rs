//! Privacy-awareness game over social-graph profile snapshots.
//!
//! A player ranks their own shared items by sensitivity in ten pairwise
//! battles, then plays five timed rounds guessing who can see each of the
//! most sensitive items. The gap between the guesses and the real audience
//! drives the score, the awareness index and the recommendations.

pub mod cli;
pub mod clock;
pub mod config;
pub mod feedback;
pub mod game;
pub mod graph;
pub mod http;
pub mod ranking;
pub mod session;
pub mod sim;
pub mod synth;
