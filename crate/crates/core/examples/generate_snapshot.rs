//! Generates a synthetic profile and checks it against the validator.

use privcheck::graph::{snapshot_to_json, validate_snapshot};
use privcheck::synth::{gen_snapshot, GenParams};

fn main() {
    let params = GenParams {
        contacts: 30,
        items: 15,
        lists: 4,
        public_fraction: 0.3,
        strangers: 25,
    };
    let snapshot = gen_snapshot(&params, 7).expect("feasible parameters");
    let report = validate_snapshot(&snapshot);
    eprintln!(
        "valid: {}, non-public items: {}",
        report.ok, report.non_public_item_count
    );
    print!("{}", snapshot_to_json(&snapshot));
}
