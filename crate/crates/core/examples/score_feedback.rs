//! Builds the score-and-feedback report from five hand-written rounds.

use std::collections::BTreeSet;

use privcheck::feedback::{build_report, RoundResult};
use privcheck::graph::{demo_snapshot, PersonId};

fn people(ids: &[&str]) -> BTreeSet<PersonId> {
    ids.iter().map(|&id| PersonId::from(id)).collect()
}

fn main() {
    let snapshot = demo_snapshot();
    let rounds: Vec<RoundResult> = ["i01", "i02", "i03", "i04", "i06"]
        .iter()
        .enumerate()
        .map(|(i, item)| RoundResult {
            item: (*item).into(),
            points: 9_000 - 1_000 * i as u32,
            won: i < 4,
            wrong_picks: vec![],
            missed_viewers: if i < 4 { vec![] } else { vec!["p10".into()] },
            selected: people(&["p01", "p02"]),
            displayed_viewers: if i < 4 {
                people(&["p01", "p02"])
            } else {
                people(&["p01", "p02", "p10"])
            },
        })
        .collect();

    let report = build_report(&snapshot, rounds, 5).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}
