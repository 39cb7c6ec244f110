//! One "Find Your Friends" round on the demo profile, played on a fake
//! clock: two wrong guesses first, then every real viewer.

use std::time::Duration;

use privcheck::game::{compose_gallery, RoundState, ScoringParams};
use privcheck::graph::{demo_snapshot, ItemId};

fn main() {
    let snapshot = demo_snapshot();
    let params = ScoringParams::default();
    let item = snapshot.item(&ItemId::from("i02")).unwrap();
    let gallery = compose_gallery(item, &snapshot, 11).unwrap();

    for entry in &gallery {
        let tag = if entry.is_viewer { "viewer" } else { "" };
        println!("{:<12} {:<22} {tag}", entry.person, entry.display_name);
    }

    let wrong = gallery.iter().filter(|e| !e.is_viewer).take(2);
    let right = gallery.iter().filter(|e| e.is_viewer);
    let mut round = RoundState::new(item.id.clone(), gallery.clone(), Duration::ZERO, &params);
    let mut now = Duration::ZERO;
    for entry in wrong.chain(right) {
        now += Duration::from_millis(1500);
        let (next, outcome) = round.select_person(&entry.person, now, &params).unwrap();
        round = next;
        println!(
            "{:>5.1}s {:<12} {:?}  hearts {}",
            now.as_secs_f64(),
            entry.person,
            outcome,
            round.hearts()
        );
        if round.status().is_over() {
            break;
        }
    }
    println!("{:?}", round.status());
}
