//! Mean score and awareness for simulated players of increasing sloppiness.

use std::sync::Arc;

use privcheck::graph::demo_snapshot;
use privcheck::session::ServiceOptions;
use privcheck::sim::{simulate, BattlePolicy, PlayerPolicy};

fn main() {
    let snapshot = Arc::new(demo_snapshot());
    println!("epsilon  mean score  awareness  won/lost");
    for epsilon in [0.0, 0.05, 0.1, 0.2, 0.4, 1.0] {
        let policy = PlayerPolicy {
            perception_error: epsilon,
            reaction_seconds_per_pick: 0.8,
            battle_policy: BattlePolicy::TrueOrder,
        };
        let run = simulate(snapshot.clone(), policy, 200, 1, &ServiceOptions::default()).unwrap();
        let s = run.summary;
        println!(
            "{epsilon:>7.2}  {:>10.1}  {:>9.3}  {}/{}",
            s.score.mean, s.awareness_index.mean, s.rounds_won, s.rounds_lost
        );
    }
}
