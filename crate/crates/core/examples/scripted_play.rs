//! Plays a perfect game through the session service on a fake clock,
//! prints the transcript, then replays it and checks the report matches.
//!
//!     cargo run --example scripted_play [SECONDS_PER_PICK] > demo_transcript.json
//!     cargo run -- play --demo --transcript demo_transcript.json

use std::sync::Arc;
use std::time::Duration;

use privcheck::cli::scripted_session;
use privcheck::game::ScoringParams;
use privcheck::graph::{default_stranger_pool, demo_snapshot};
use privcheck::session::{Response, Session};

fn main() {
    let snapshot = Arc::new(demo_snapshot());
    let per_pick: f64 = std::env::args()
        .nth(1)
        .map_or(0.5, |a| a.parse().expect("seconds"));
    let transcript = scripted_session(snapshot.clone(), 42, per_pick).unwrap();
    println!("{}", serde_json::to_string_pretty(&transcript).unwrap());

    let mut session = Session::new(
        snapshot,
        transcript.seed,
        ScoringParams::default(),
        default_stranger_pool().into(),
    )
    .unwrap();
    let responses = transcript.replay(&mut session, Duration::ZERO).unwrap();
    if let Some(Response::Report(report)) = responses.last() {
        eprintln!("replayed total: {} ({:?})", report.total, report.smiley);
    }
}
