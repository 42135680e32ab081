use cqexp_core::verifier::{
    check_core_lemma, check_geomean_properties, parse_selector, replay_trial, run_suite,
    trial_seed, Suite, SuiteConfig,
};

fn cfg(trials: usize, seed: u64) -> SuiteConfig {
    SuiteConfig {
        trials,
        seed,
        ..SuiteConfig::default()
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for suite in Suite::all() {
        let a = serde_json::to_string(&run_suite(suite, &cfg(15, 5)).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(suite, &cfg(15, 5)).unwrap()).unwrap();
        assert_eq!(a, b, "{}", suite.name());
    }
}

#[test]
fn seeds_change_the_trials() {
    let a = run_suite(Suite::Holder, &cfg(10, 1)).unwrap();
    let b = run_suite(Suite::Holder, &cfg(10, 2)).unwrap();
    assert_ne!(a.worst_seed, b.worst_seed);
    assert_ne!(
        trial_seed(Suite::Holder, &cfg(1, 1), 0),
        trial_seed(Suite::Holder, &cfg(1, 2), 0)
    );
    assert_ne!(
        trial_seed(Suite::Holder, &cfg(1, 1), 0),
        trial_seed(Suite::LogMajor, &cfg(1, 1), 0)
    );
}

#[test]
fn worst_trial_replays_bit_for_bit_with_inputs() {
    for suite in Suite::all() {
        let c = cfg(25, 13);
        let r = run_suite(suite, &c).unwrap();
        let replay = replay_trial(suite, &c, r.worst_seed).unwrap();
        assert_eq!(
            replay.margin.to_bits(),
            r.worst_margin.to_bits(),
            "{}",
            r.suite_name
        );
        assert_eq!(replay.inputs, r.worst_trial_inputs, "{}", r.suite_name);
        assert!(!r.worst_trial_inputs.is_empty(), "{}", r.suite_name);
    }
}

#[test]
fn wrappers_cover_their_suites() {
    let c = cfg(10, 0);
    let props = check_geomean_properties(&c).unwrap();
    let names: Vec<_> = props.iter().map(|r| r.suite_name.clone()).collect();
    assert_eq!(names.len(), 8);
    assert!(names.iter().all(|n| n.starts_with("geomean-props/")));
    let core = check_core_lemma(&c).unwrap();
    assert!(core.passed());
    let singular = core.check("singular").unwrap();
    assert!(!singular.asserted);
}

#[test]
fn selectors() {
    assert_eq!(parse_selector("all").unwrap().len(), 16);
    assert_eq!(parse_selector("geomean-props").unwrap().len(), 8);
    assert_eq!(
        parse_selector("proof-chain").unwrap(),
        vec![Suite::ProofChain]
    );
    assert!(parse_selector("bogus").is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_suite(Suite::Holder, &cfg(0, 0)).is_err());
    let mut c = cfg(5, 0);
    c.d_min = 4;
    c.d_max = 3;
    assert!(run_suite(Suite::Holder, &c).is_err());
    let mut c = cfg(5, 0);
    c.workers = 0;
    assert!(run_suite(Suite::Holder, &c).is_err());
}

#[test]
fn report_json_shape() {
    let value = serde_json::to_value(run_suite(Suite::Holder, &cfg(3, 0)).unwrap()).unwrap();
    assert!(value["worst_margin"].is_number());
    assert!(value["params"].is_object());
}
