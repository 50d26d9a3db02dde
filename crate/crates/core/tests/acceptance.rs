//! The full acceptance suite. Criteria run one after another so that their
//! runtime budgets are measured without contention; one verdict line per
//! criterion is written to stderr even when test output is captured.

use std::io::Write;

use kuramoto_wave::harness::acceptance::{run_criterion, AcceptanceOptions, Suite};

#[test]
fn acceptance_criteria() {
    let opts = AcceptanceOptions::default();
    let mut failed = Vec::new();
    for id in Suite::Full.criteria() {
        let result = run_criterion(id, &opts);
        let _ = writeln!(std::io::stderr(), "{}", result);
        if !result.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {:?}", failed);
}
