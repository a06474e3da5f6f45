//! The acceptance gate as an integration suite: one test per criterion, each
//! printing its pass/fail line (visible with `--nocapture`; `heavytail
//! verify` prints the same lines).

use heavytail_cli::verify::{self, CriterionResult};

const THREADS: usize = 2;

fn assert_criterion(r: CriterionResult) {
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_analytic_moments() {
    assert_criterion(verify::criterion_1_analytic_moments());
}

#[test]
fn criterion_02_delta_exactness() {
    assert_criterion(verify::criterion_2_delta_exactness());
}

#[test]
fn criterion_03_zo_bias_bound() {
    assert_criterion(verify::criterion_3_zo_bias());
}

#[test]
fn criterion_04_zo_variance_bound() {
    assert_criterion(verify::criterion_4_zo_variance());
}

#[test]
fn criterion_05_moment_difference_bound() {
    assert_criterion(verify::criterion_5_moment_difference());
}

#[test]
fn criterion_06_bias_floor_scaling() {
    assert_criterion(verify::criterion_6_bias_floor_scaling(THREADS));
}

#[test]
fn criterion_07_complexity_orders() {
    assert_criterion(verify::criterion_7_complexity_orders());
}

#[test]
fn criterion_08_gamma_ratio_inequality() {
    assert_criterion(verify::criterion_8_gamma_ratio_grid());
}

#[test]
fn criterion_09_wpi_constants() {
    assert_criterion(verify::criterion_9_wpi_constants());
}

#[test]
fn criterion_10_oracle_validity_and_ula_control() {
    assert_criterion(verify::criterion_10_oracle_and_ula_control(THREADS));
}

#[test]
fn criterion_11_thread_determinism() {
    assert_criterion(verify::criterion_11_determinism());
}
