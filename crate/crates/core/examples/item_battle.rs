//! Ten Elo battles over the demo profile's items, decided by a player who
//! finds earlier items more personal. Prints the ratings and the five items
//! chosen for the game.

use privcheck::graph::{demo_snapshot, eligible_game_items};
use privcheck::ranking::BattlePlan;

fn main() {
    let snapshot = demo_snapshot();
    let items = snapshot.item_ids();
    let mut plan = BattlePlan::new(&items, 2024).expect("demo has enough items");

    while let Some(pair) = plan.current_pair().cloned() {
        let pos = |id| items.iter().position(|i| i == id);
        let winner = if pos(&pair.a) < pos(&pair.b) {
            pair.a.clone()
        } else {
            pair.b.clone()
        };
        println!(
            "battle {:>2}: {} vs {} -> {}",
            plan.cursor() + 1,
            pair.a,
            pair.b,
            winner
        );
        plan = plan.record_choice(&winner).unwrap();
    }

    let ranking = plan.final_ranking().unwrap();
    for id in &ranking.ordered {
        println!("{id}  {:7.2}", ranking.ratings[id]);
    }
    let picked = ranking
        .select_game_items(&eligible_game_items(&snapshot), 5)
        .unwrap();
    println!("game items: {picked:?}");
}
