//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use cqexp_core::channel::{
    e0_classical, e0_derivatives, e0_quantum, embed_classical, CQChannel, ClassicalChannel,
    DensityOperator, ExponentSolver, OptimizerConfig, ProbabilityDistribution,
    DEFAULT_DERIVATIVE_STEP,
};
use cqexp_core::matops::random::{random_density, random_simplex, rng_from_seed, stream_seed};
use cqexp_core::verifier::{
    replay_trial, run_suite, run_suites, InequalityReport, Suite, SuiteConfig,
};
use rand::Rng;

/// Failure detail; any displayable error converts into one.
struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

type Outcome = Result<String, Fail>;
type Criterion = (&'static str, fn() -> Outcome);

fn cfg(trials: usize) -> SuiteConfig {
    SuiteConfig {
        trials,
        ..SuiteConfig::default()
    }
}

fn describe(r: &InequalityReport) -> String {
    format!(
        "{}: {} trials, {} violations, {} errors, worst margin {:.3e}",
        r.suite_name, r.trials, r.violations, r.errors, r.worst_margin
    )
}

fn require_clean(r: &InequalityReport) -> Result<(), String> {
    if r.passed() {
        Ok(())
    } else {
        Err(format!(
            "{} (first error: {:?})",
            describe(r),
            r.first_error
        ))
    }
}

fn require_check(r: &InequalityReport, name: &str) -> Result<String, String> {
    let c = r
        .check(name)
        .ok_or_else(|| format!("{}: no check named {name:?}", r.suite_name))?;
    if c.violations > 0 || c.evaluated == 0 {
        return Err(format!(
            "check {name:?}: {} of {} evaluated trials violated, worst margin {:.3e}",
            c.violations, c.evaluated, c.worst_margin
        ));
    }
    Ok(format!(
        "check {name:?}: {} trials, 0 violations, worst margin {:.3e}",
        c.evaluated, c.worst_margin
    ))
}

fn concavity_full() -> Outcome {
    let start = Instant::now();
    let r = run_suite(Suite::Concavity, &cfg(1000))?;
    let elapsed = start.elapsed().as_secs_f64();
    require_clean(&r)?;
    let line = require_check(&r, "full")?;
    if elapsed > 120.0 {
        return Err(format!("{line}; took {elapsed:.1}s, limit 120s").into());
    }
    Ok(format!("{line}; {elapsed:.1}s single worker"))
}

fn concavity_unit_interval() -> Outcome {
    let r = run_suite(Suite::Concavity, &cfg(1000))?;
    Ok(require_check(&r, "unit interval")?)
}

fn proof_chain() -> Outcome {
    let r = run_suite(Suite::ProofChain, &cfg(500))?;
    require_clean(&r)?;
    let identity = r
        .check("(i) exponent identity")
        .ok_or("missing identity check")?;
    if identity.worst_margin < -1e-12 {
        return Err(format!("identity residual {:.3e} > 1e-12", -identity.worst_margin).into());
    }
    for c in &r.checks {
        if c.asserted && c.evaluated != r.trials {
            return Err(format!(
                "check {:?} evaluated in {} of {} trials",
                c.name, c.evaluated, r.trials
            )
            .into());
        }
    }
    Ok(format!(
        "{}; identity residual {:.1e}",
        describe(&r),
        (-identity.worst_margin).max(0.0)
    ))
}

fn lemmas() -> Outcome {
    let cfg = cfg(1000);
    let mut lines = Vec::new();
    for suite in Suite::LEMMAS {
        let r = run_suite(suite, &cfg)?;
        require_clean(&r)?;
        let replay = replay_trial(suite, &cfg, r.worst_seed)?;
        if replay.margin.to_bits() != r.worst_margin.to_bits() {
            return Err(format!(
                "{}: replay of seed {} gave {:e}, report has {:e}",
                r.suite_name, r.worst_seed, replay.margin, r.worst_margin
            )
            .into());
        }
        lines.push(format!("{} {:.2e}", r.suite_name, r.worst_margin));
    }
    Ok(format!(
        "0 violations in 6 x 1000 trials, worst margins replayed: {}",
        lines.join(", ")
    ))
}

fn geomean_properties() -> Outcome {
    let reports = run_suites(&Suite::geomean_properties(), &cfg(1000))?;
    if reports.len() != 8 {
        return Err(format!("expected 8 property suites, got {}", reports.len()).into());
    }
    for r in &reports {
        require_clean(r)?;
    }
    let worst = reports
        .iter()
        .map(|r| r.worst_margin)
        .fold(f64::INFINITY, f64::min);
    Ok(format!(
        "8 x 1000 trials, 0 violations, worst margin {worst:.3e}"
    ))
}

fn classical_reduction() -> Outcome {
    let mut worst = 0f64;
    for k in 0..50u64 {
        let mut rng = rng_from_seed(stream_seed(0, "classical-reduction", k));
        let nx = rng.random_range(1..=6);
        let ny = rng.random_range(1..=6);
        let q = ClassicalChannel::new((0..nx).map(|_| random_simplex(&mut rng, ny)).collect())?;
        let w = embed_classical(&q);
        for _ in 0..20 {
            let p = ProbabilityDistribution::new(random_simplex(&mut rng, nx))?;
            let s = 8.0 * rng.random::<f64>();
            let gap = (e0_quantum(&w, &p, s)? - e0_classical(&q, &p, s)?).abs();
            worst = worst.max(gap);
        }
    }
    if worst > 1e-12 {
        return Err(format!("max gap {worst:.3e} > 1e-12").into());
    }
    Ok(format!("50 channels x 20 points, max gap {worst:.1e}"))
}

fn noiseless_oracle() -> Outcome {
    let w = embed_classical(&ClassicalChannel::new(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
    ])?);
    let uniform = ProbabilityDistribution::uniform(2)?;
    let mut e0_err = 0f64;
    for i in 0..=80 {
        let s = i as f64 * 0.1;
        e0_err = e0_err.max((e0_quantum(&w, &uniform, s)? - s).abs());
    }
    if e0_err > 1e-9 {
        return Err(format!("E0 deviates from s by {e0_err:.3e}").into());
    }
    let solver = ExponentSolver::new(&w, OptimizerConfig::default(), 64.0)?;
    let mut er_err = 0f64;
    for i in 0..=20 {
        let rate = i as f64 * 0.05;
        let er = solver.random_coding(rate)?;
        er_err = er_err.max((er.value - (1.0 - rate)).abs());
        if rate < 1.0 {
            let esp = solver.sphere_packing(rate)?;
            if !esp.divergent {
                return Err(format!("E_sp({rate}) = {} not flagged divergent", esp.value).into());
            }
        }
    }
    if er_err > 1e-4 {
        return Err(format!("E_r deviates from 1 - R by {er_err:.3e}").into());
    }
    Ok(format!(
        "E0 error {e0_err:.1e} on [0,8], E_r error {er_err:.1e} on [0,1], E_sp divergent below 1"
    ))
}

fn derivative_signs() -> Outcome {
    let (mut min_d1, mut max_d2, mut min_e0) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..500u64 {
        let mut rng = rng_from_seed(stream_seed(0, "derivative-signs", k));
        let d = rng.random_range(2..=6);
        let n = rng.random_range(1..=6);
        let outputs = (0..n)
            .map(|_| {
                let rank = rng.random_range(1..=d);
                DensityOperator::new(random_density(&mut rng, d, rank, 1e6))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let w = CQChannel::new(outputs)?;
        let p = ProbabilityDistribution::new(random_simplex(&mut rng, n))?;
        let s = 0.1 + 7.9 * rng.random::<f64>();
        let (d1, d2) = e0_derivatives(&w, &p, s, DEFAULT_DERIVATIVE_STEP)?;
        min_d1 = min_d1.min(d1);
        max_d2 = max_d2.max(d2);
        min_e0 = min_e0.min(e0_quantum(&w, &p, s)?);
    }
    let summary =
        format!("min dE0/ds {min_d1:.3e}, max d2E0/ds2 {max_d2:.3e}, min E0 {min_e0:.3e}");
    if min_d1 < -1e-6 || max_d2 > 1e-6 || min_e0 < -1e-10 {
        return Err(summary.into());
    }
    Ok(format!("500 points, {summary}"))
}

fn determinism() -> Outcome {
    let render = |workers: usize| -> Outcome {
        let cfg = SuiteConfig {
            trials: 60,
            workers,
            seed: 2024,
            ..SuiteConfig::default()
        };
        let reports = run_suites(&Suite::all(), &cfg)?;
        Ok(serde_json::to_string(&reports)?)
    };
    let one = render(1)?;
    for workers in [2, 4] {
        if render(workers)? != one {
            return Err(format!("reports differ between 1 and {workers} workers").into());
        }
    }
    if render(1)? != one {
        return Err("reports differ between identical runs".into());
    }
    Ok(format!(
        "16 suites, {} report bytes identical for 1, 2, 4 workers",
        one.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("concavity of E0 on s in [0,8]", concavity_full),
        ("concavity of E0 on s in [0,1]", concavity_unit_interval),
        ("proof chain", proof_chain),
        ("lemma suites", lemmas),
        ("geometric mean properties (a)-(h)", geomean_properties),
        ("classical reduction", classical_reduction),
        ("noiseless channel closed forms", noiseless_oracle),
        ("derivative signs", derivative_signs),
        ("determinism across workers", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({detail})", i + 1),
            Err(Fail(detail)) => {
                failed += 1;
                println!("FAIL {}: {name} ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
