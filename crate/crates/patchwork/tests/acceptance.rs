//! The release acceptance suite: one test per numbered criterion, each
//! printing exactly one pass/fail line (run with `-- --nocapture` to see the
//! lines for passing criteria too).  The bodies live in
//! `patchwork::selftest`, so the CLI `selftest` subcommand runs the same
//! checks.

use patchwork::selftest::run_criterion;

fn run(number: usize) {
    let out = run_criterion(number);
    let verdict = if out.passed { "pass" } else { "FAIL" };
    println!(
        "criterion {:02} {verdict} — {}: {}",
        out.number, out.name, out.detail
    );
    assert!(
        out.passed,
        "criterion {number} ({}) failed: {}",
        out.name, out.detail
    );
}

#[test]
fn criterion_01_field_axioms_and_dimension_formula() {
    run(1);
}

#[test]
fn criterion_02_lambda_kappa_tutte_linking() {
    run(2);
}

#[test]
fn criterion_03_branch_decompositions() {
    run(3);
}

#[test]
fn criterion_04_decomposition_clause_checkers() {
    run(4);
}

#[test]
fn criterion_05_patch_algebra() {
    run(5);
}

#[test]
fn criterion_06_greedy_pruning() {
    run(6);
}

#[test]
fn criterion_07_zero_sum_windows() {
    run(7);
}

#[test]
fn criterion_08_periodic_fit_recovery() {
    run(8);
}

#[test]
fn criterion_09_extremal_tables_and_families() {
    run(9);
}

#[test]
fn criterion_10_bounded_gap() {
    run(10);
}
