//! Full-resolution run of the ten acceptance criteria, one test each so
//! failures are attributable and every criterion prints its own line.

use restriction_lab::acceptance::run_criterion;

fn check(index: usize) {
    let result = run_criterion(index, false);
    println!(
        "criterion {:>2} ({}): {} — expected {}; actual {}; tolerance {}; {:.2}s",
        result.index,
        result.name,
        if result.passed { "PASS" } else { "FAIL" },
        result.expected,
        result.actual,
        result.tolerance,
        result.seconds
    );
    assert!(
        result.passed,
        "criterion {} ({}) failed: expected {}; actual {}; tolerance {}",
        result.index, result.name, result.expected, result.actual, result.tolerance
    );
}

#[test]
fn criterion_01_constant_density_law() {
    check(1);
}

#[test]
fn criterion_02_constant_critical_point() {
    check(2);
}

#[test]
fn criterion_03_constant_functional_values() {
    check(3);
}

#[test]
fn criterion_04_symmetry_invariance() {
    check(4);
}

#[test]
fn criterion_05_pointwise_domination() {
    check(5);
}

#[test]
fn criterion_06_solver_convergence() {
    check(6);
}

#[test]
fn criterion_07_contraction_illustration() {
    check(7);
}

#[test]
fn criterion_08_phase_factorization() {
    check(8);
}

#[test]
fn criterion_09_oracle_equivalence() {
    check(9);
}

#[test]
fn criterion_10_trilinear_regression() {
    check(10);
}
