//! Criteria 1–12, one line each. Time ceilings are enforced only in
//! optimized builds; debug builds print them for reference.

use std::time::Instant;

use clonelab::report::Verdict;
use clonelab::verify::{criteria, Settings};

#[test]
fn acceptance() {
    let settings = Settings::default();
    let enforce_time = !cfg!(debug_assertions);
    let mut failed = Vec::new();
    for c in criteria() {
        let start = Instant::now();
        let check = (c.run)(&settings);
        let secs = start.elapsed().as_secs_f64();
        let over = secs > c.budget_secs as f64;
        let ok = check.verdict == Verdict::Pass && !(enforce_time && over);
        println!(
            "{} criterion {:>2} {}: {} [{:.2}s / {}s{}]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            check.detail,
            secs,
            c.budget_secs,
            if over { ", over budget" } else { "" },
        );
        if let Some(cx) = &check.counterexample {
            println!("    counterexample: {cx}");
        }
        if !ok {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
