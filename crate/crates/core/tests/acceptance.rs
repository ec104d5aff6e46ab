//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line (visible with `cargo test -- --nocapture`).

use retroalign_core::verify::{checks, CriterionResult};
use std::time::Instant;

fn assert_criterion(result: CriterionResult, budget: Option<f64>, elapsed: f64) {
    println!("{}", result.line());
    if let Some(limit) = budget {
        println!("        ({elapsed:.2}s elapsed, budget {limit:.0}s)",);
        assert!(
            elapsed < limit,
            "criterion {} exceeded its {limit}s budget: {elapsed:.2}s",
            result.id
        );
    }
    assert!(result.passed, "{}", result.detail);
}

#[test]
fn criterion_1_golden_fractions() {
    let t0 = Instant::now();
    let result = checks::golden_fractions();
    assert_criterion(result, Some(1.0), t0.elapsed().as_secs_f64());
}

#[test]
fn criterion_2_appendix_consistency() {
    let t0 = Instant::now();
    let result = checks::appendix_consistency();
    assert_criterion(result, Some(10.0), t0.elapsed().as_secs_f64());
}

#[test]
fn criterion_3_asymptotics() {
    let result = checks::asymptotics();
    assert_criterion(result, None, 0.0);
}

#[test]
fn criterion_4_ordering() {
    let result = checks::ordering();
    assert_criterion(result, None, 0.0);
}

#[test]
fn criterion_5_optimizer_oracle() {
    let result = checks::optimizer_oracle();
    assert_criterion(result, None, 0.0);
}

#[test]
fn criterion_6_simulation_equality() {
    let t0 = Instant::now();
    let result = checks::simulation_equality();
    assert_criterion(result, Some(60.0), t0.elapsed().as_secs_f64());
}

#[test]
fn criterion_7_phase_ledgers() {
    let result = checks::phase_ledgers();
    assert_criterion(result, None, 0.0);
}

#[test]
fn criterion_8_genericity() {
    let result = checks::genericity();
    assert_criterion(result, None, 0.0);
}
