//! One line per acceptance criterion, at full scale.

use peeling_core::checks::{run_all, AcceptanceOptions};

#[test]
fn acceptance() {
    let results = run_all(&AcceptanceOptions::default());
    for r in &results {
        println!(
            "criterion {:>2} {:<28} {} ({:.1}s) {}",
            r.id,
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.seconds,
            r.detail
        );
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
