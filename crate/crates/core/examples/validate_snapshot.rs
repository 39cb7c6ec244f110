//! Validate a snapshot file, or the bundled demo profile when no path is given.
//!
//!     cargo run --example validate_snapshot -- path/to/snapshot.json

use privcheck::graph::{demo_snapshot, load_snapshot, validate_snapshot};

fn main() {
    let snapshot = match std::env::args().nth(1) {
        Some(path) => {
            let bytes = std::fs::read(&path).expect("readable snapshot file");
            load_snapshot(&bytes).unwrap_or_else(|e| {
                eprintln!("{path}: {e}");
                std::process::exit(2);
            })
        }
        None => demo_snapshot(),
    };

    let report = validate_snapshot(&snapshot);
    println!("non-public items: {}", report.non_public_item_count);
    for finding in &report.violations {
        println!("  {finding}");
    }
    println!("{}", if report.ok { "valid" } else { "invalid" });
    std::process::exit(if report.ok { 0 } else { 1 });
}
