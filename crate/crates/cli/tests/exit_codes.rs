use cqexp::{render_reports, Format};
use cqexp_core::verifier::{run_suite, Suite, SuiteConfig};

fn report() -> cqexp_core::verifier::InequalityReport {
    let cfg = SuiteConfig {
        trials: 5,
        ..SuiteConfig::default()
    };
    run_suite(Suite::Holder, &cfg).unwrap()
}

#[test]
fn clean_reports_exit_0() {
    for format in [Format::Json, Format::Csv] {
        assert_eq!(render_reports(&[report(), report()], format).exit_code, 0);
    }
}

#[test]
fn any_violation_exits_1() {
    let mut bad = report();
    bad.violations = 1;
    for format in [Format::Json, Format::Csv] {
        assert_eq!(
            render_reports(&[report(), bad.clone()], format).exit_code,
            1
        );
    }
}

#[test]
fn trial_errors_exit_1() {
    let mut bad = report();
    bad.errors = 2;
    assert_eq!(render_reports(&[bad], Format::Json).exit_code, 1);
}
