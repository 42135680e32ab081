//! Seeded randomized suites for the operator inequalities behind the
//! concavity of `E₀(s, P)` in `s`.
//!
//! A suite runs `trials` independent trials. Trial `i` draws everything from
//! its own stream seed `stream_seed(seed, suite_name, i)`, so the report does
//! not depend on how trials are scheduled across workers, and any single
//! trial can be rerun with [`replay_trial`].
//!
//! Each trial evaluates one or more named checks. A check yields a margin
//! (positive means the inequality holds with room to spare) normalized by
//! `max(1, magnitude of the larger side)`. A trial is a violation when any
//! asserted check has margin below `−slack`. Report-only checks are
//! summarized but never counted as violations.

mod geomean_props;
mod lemmas;
mod sample;
mod theorem;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geomean::GeomeanConfig;
use crate::matops::random::{stream_seed, TrialRng};
use crate::matops::{loewner_gap, operator_norm, CMatrix, HermitianMatrix, Tolerances};

pub use geomean_props::Property;

/// Parameters shared by every suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub d_min: usize,
    pub d_max: usize,
    pub seed: u64,
    /// Worker threads; has no effect on the report.
    pub workers: usize,
    pub tolerances: Tolerances,
    pub geomean: GeomeanConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            d_min: 2,
            d_max: 6,
            seed: 0,
            workers: 1,
            tolerances: Tolerances::default(),
            geomean: GeomeanConfig::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        if self.d_min == 0 || self.d_min > self.d_max {
            return Err(Error::input(format!(
                "invalid dimension range {}..={}",
                self.d_min, self.d_max
            )));
        }
        if self.workers == 0 {
            return Err(Error::input("workers must be at least 1"));
        }
        if !(self.tolerances.slack >= 0.0) {
            return Err(Error::input("slack must be non-negative"));
        }
        self.geomean.validate()
    }
}

/// A verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    LogMajor,
    NormPower,
    VectorPower,
    TraceConvex,
    Holder,
    CoreLemma,
    Geomean(Property),
    ProofChain,
    Concavity,
}

impl Suite {
    pub const LEMMAS: [Suite; 6] = [
        Suite::LogMajor,
        Suite::NormPower,
        Suite::VectorPower,
        Suite::TraceConvex,
        Suite::Holder,
        Suite::CoreLemma,
    ];

    pub fn geomean_properties() -> Vec<Suite> {
        Property::ALL.iter().map(|&p| Suite::Geomean(p)).collect()
    }

    /// Every suite, in reporting order.
    pub fn all() -> Vec<Suite> {
        let mut v = Self::LEMMAS.to_vec();
        v.extend(Self::geomean_properties());
        v.push(Suite::ProofChain);
        v.push(Suite::Concavity);
        v
    }

    pub fn name(&self) -> String {
        match self {
            Suite::LogMajor => "logmajor".into(),
            Suite::NormPower => "norm-power".into(),
            Suite::VectorPower => "vector-power".into(),
            Suite::TraceConvex => "trace-convex".into(),
            Suite::Holder => "holder".into(),
            Suite::CoreLemma => "core-lemma".into(),
            Suite::Geomean(p) => format!("geomean-props/{}", p.name()),
            Suite::ProofChain => "proof-chain".into(),
            Suite::Concavity => "concavity".into(),
        }
    }

    fn trial_fn(&self) -> TrialFn {
        match self {
            Suite::LogMajor => lemmas::logmajor,
            Suite::NormPower => lemmas::norm_power,
            Suite::VectorPower => lemmas::vector_power,
            Suite::TraceConvex => lemmas::trace_convex,
            Suite::Holder => lemmas::holder,
            Suite::CoreLemma => lemmas::core_lemma,
            Suite::Geomean(p) => p.trial_fn(),
            Suite::ProofChain => theorem::proof_chain,
            Suite::Concavity => theorem::concavity,
        }
    }

    fn params(&self, cfg: &SuiteConfig) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let (d_lo, d_hi) = self.dim_range(cfg);
        m.insert("d".into(), format!("{d_lo}..={d_hi}"));
        for (k, v) in match self {
            Suite::LogMajor => lemmas::LOGMAJOR_PARAMS,
            Suite::NormPower => lemmas::NORM_POWER_PARAMS,
            Suite::VectorPower => lemmas::VECTOR_POWER_PARAMS,
            Suite::TraceConvex => lemmas::TRACE_CONVEX_PARAMS,
            Suite::Holder => lemmas::HOLDER_PARAMS,
            Suite::CoreLemma => lemmas::CORE_LEMMA_PARAMS,
            Suite::Geomean(p) => p.params(),
            Suite::ProofChain => theorem::PROOF_CHAIN_PARAMS,
            Suite::Concavity => theorem::CONCAVITY_PARAMS,
        } {
            m.insert((*k).into(), (*v).into());
        }
        m
    }

    fn dim_range(&self, cfg: &SuiteConfig) -> (usize, usize) {
        match self {
            Suite::ProofChain | Suite::Concavity => {
                let hi = cfg.d_max.min(theorem::MAX_DIM);
                (cfg.d_min.min(hi), hi)
            }
            _ => (cfg.d_min, cfg.d_max),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses a suite selector: `all`, `geomean-props`, or a single suite name.
pub fn parse_selector(selector: &str) -> Result<Vec<Suite>> {
    match selector {
        "all" => Ok(Suite::all()),
        "geomean-props" => Ok(Suite::geomean_properties()),
        other => other.parse().map(|s| vec![s]),
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("geomean-props/") {
            return Property::ALL
                .iter()
                .find(|p| p.name() == rest || p.letter().to_string() == rest)
                .map(|&p| Suite::Geomean(p))
                .ok_or_else(|| Error::input(format!("unknown geometric-mean property {rest:?}")));
        }
        Suite::all()
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::input(format!("unknown suite {s:?}")))
    }
}

/// Relative margin for `lhs ≤ rhs`.
pub fn leq_margin(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / 1f64.max(lhs.abs()).max(rhs.abs())
}

/// Relative margin for `L ⪯ R`: `λ_min(R − L) / max(1, ‖L‖₂, ‖R‖₂)`.
pub fn loewner_margin(l: &HermitianMatrix, r: &HermitianMatrix) -> Result<f64> {
    let scale = 1f64.max(l.spectral_norm()).max(r.spectral_norm());
    Ok(loewner_gap(l, r)? / scale)
}

/// `−‖L − R‖₂ / max(1, ‖L‖₂, ‖R‖₂)`; zero for exact equality.
pub fn equality_margin(l: &CMatrix, r: &CMatrix) -> f64 {
    let scale = 1f64.max(operator_norm(l)).max(operator_norm(r));
    -operator_norm(&(l - r)) / scale
}

#[derive(Clone, Debug, PartialEq)]
enum Outcome {
    Margin(f64),
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq)]
struct CheckOutcome {
    name: &'static str,
    asserted: bool,
    slack: f64,
    outcome: Outcome,
}

/// Per-trial state handed to the suite implementations.
pub(crate) struct TrialCtx<'a> {
    pub rng: TrialRng,
    pub cfg: &'a SuiteConfig,
    dims: (usize, usize),
    capture: bool,
    checks: Vec<CheckOutcome>,
    inputs: BTreeMap<String, String>,
}

impl TrialCtx<'_> {
    pub fn dim(&mut self) -> usize {
        self.rng.random_range(self.dims.0..=self.dims.1)
    }

    pub fn slack(&self) -> f64 {
        self.cfg.tolerances.slack
    }

    fn push(&mut self, name: &'static str, asserted: bool, slack: f64, outcome: Outcome) {
        self.checks.push(CheckOutcome {
            name,
            asserted,
            slack,
            outcome,
        });
    }

    /// Asserted check at the configured slack.
    pub fn check(&mut self, name: &'static str, margin: f64) {
        let slack = self.slack();
        self.check_with_slack(name, margin, slack);
    }

    pub fn check_with_slack(&mut self, name: &'static str, margin: f64, slack: f64) {
        let margin = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        self.push(name, true, slack, Outcome::Margin(margin));
    }

    /// Summarized, never counted as a violation.
    pub fn report_only(&mut self, name: &'static str, margin: f64) {
        let margin = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        let slack = self.slack();
        self.push(name, false, slack, Outcome::Margin(margin));
    }

    pub fn skip(&mut self, name: &'static str, asserted: bool, reason: impl Into<String>) {
        let slack = self.slack();
        self.push(name, asserted, slack, Outcome::Skipped(reason.into()));
    }

    pub fn capturing(&self) -> bool {
        self.capture
    }

    pub fn input(&mut self, name: impl Into<String>, value: impl fmt::Debug) {
        if self.capture {
            self.inputs.insert(name.into(), format!("{value:?}"));
        }
    }

    pub fn input_matrix(&mut self, name: impl Into<String>, m: &HermitianMatrix) {
        if self.capture {
            self.inputs
                .insert(name.into(), format_matrix(m.as_matrix()));
        }
    }
}

/// Row-major `[[re, im], …]` rows with shortest round-trip float formatting.
fn format_matrix(m: &CMatrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let row: Vec<String> = (0..m.ncols())
                .map(|j| format!("[{:?}, {:?}]", m[(i, j)].re, m[(i, j)].im))
                .collect();
            format!("[{}]", row.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

pub(crate) type TrialFn = fn(&mut TrialCtx) -> Result<()>;

/// The result of one trial, as returned by [`replay_trial`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    /// Smallest margin over the asserted checks; `+∞` if none was evaluated.
    pub margin: f64,
    pub violated: bool,
    pub error: Option<String>,
    pub margins: BTreeMap<String, f64>,
    pub inputs: BTreeMap<String, String>,
}

struct RawTrial {
    seed: u64,
    checks: Vec<CheckOutcome>,
    error: Option<String>,
    inputs: BTreeMap<String, String>,
}

fn run_trial(suite: Suite, cfg: &SuiteConfig, seed: u64, capture: bool) -> RawTrial {
    let mut ctx = TrialCtx {
        rng: TrialRng::seed_from_u64(seed),
        cfg,
        dims: suite.dim_range(cfg),
        capture,
        checks: Vec::new(),
        inputs: BTreeMap::new(),
    };
    let error = (suite.trial_fn())(&mut ctx).err().map(|e| e.to_string());
    RawTrial {
        seed,
        checks: ctx.checks,
        error,
        inputs: ctx.inputs,
    }
}

impl RawTrial {
    fn asserted_margin(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.asserted)
            .filter_map(|c| match c.outcome {
                Outcome::Margin(m) => Some(m),
                Outcome::Skipped(_) => None,
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn violated(&self) -> bool {
        self.checks
            .iter()
            .any(|c| c.asserted && matches!(c.outcome, Outcome::Margin(m) if m < -c.slack))
    }
}

/// Seed of trial `index` of `suite`.
pub fn trial_seed(suite: Suite, cfg: &SuiteConfig, index: u64) -> u64 {
    stream_seed(cfg.seed, &suite.name(), index)
}

/// Reruns the single trial with the given stream seed.
pub fn replay_trial(suite: Suite, cfg: &SuiteConfig, seed: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    let raw = run_trial(suite, cfg, seed, true);
    let margins = raw
        .checks
        .iter()
        .filter_map(|c| match c.outcome {
            Outcome::Margin(m) => Some((c.name.to_string(), m)),
            Outcome::Skipped(_) => None,
        })
        .fold(BTreeMap::new(), |mut acc: BTreeMap<String, f64>, (k, m)| {
            let e = acc.entry(k).or_insert(f64::INFINITY);
            *e = e.min(m);
            acc
        });
    Ok(TrialRecord {
        seed,
        margin: raw.asserted_margin(),
        violated: raw.violated(),
        error: raw.error.clone(),
        margins,
        inputs: raw.inputs,
    })
}

/// Aggregate of one named check over all trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub asserted: bool,
    pub slack: f64,
    pub evaluated: usize,
    pub skipped: usize,
    /// Trials in which this check fell below `−slack`.
    pub violations: usize,
    pub worst_margin: f64,
    pub worst_seed: u64,
    pub first_skip_reason: Option<String>,
}

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub suite_name: String,
    pub trials: usize,
    /// Trials in which some asserted check fell below `−slack`.
    pub violations: usize,
    /// Smallest asserted margin over all trials.
    pub worst_margin: f64,
    /// Stream seed of the trial attaining `worst_margin`.
    pub worst_seed: u64,
    pub params: BTreeMap<String, String>,
    pub checks: Vec<CheckSummary>,
    /// Trials that failed with an error before finishing their checks.
    pub errors: usize,
    pub first_error: Option<String>,
    /// Inputs of the worst trial, for triage.
    pub worst_trial_inputs: BTreeMap<String, String>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.errors == 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs a suite on a pool of `cfg.workers` threads.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<InequalityReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let trials: Vec<RawTrial> = pool.install(|| {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| run_trial(suite, cfg, trial_seed(suite, cfg, i), false))
            .collect()
    });

    let mut report = InequalityReport {
        suite_name: suite.name(),
        trials: cfg.trials,
        violations: 0,
        worst_margin: f64::INFINITY,
        worst_seed: trial_seed(suite, cfg, 0),
        params: suite.params(cfg),
        checks: Vec::new(),
        errors: 0,
        first_error: None,
        worst_trial_inputs: BTreeMap::new(),
    };
    for t in &trials {
        if t.violated() {
            report.violations += 1;
        }
        if let Some(e) = &t.error {
            report.errors += 1;
            report.first_error.get_or_insert_with(|| e.clone());
        }
        let m = t.asserted_margin();
        if m < report.worst_margin {
            report.worst_margin = m;
            report.worst_seed = t.seed;
        }
        let mut violated_here: Vec<&'static str> = Vec::new();
        for c in &t.checks {
            let idx = match report.checks.iter().position(|s| s.name == c.name) {
                Some(i) => i,
                None => {
                    report.checks.push(CheckSummary {
                        name: c.name.into(),
                        asserted: c.asserted,
                        slack: c.slack,
                        evaluated: 0,
                        skipped: 0,
                        violations: 0,
                        worst_margin: f64::INFINITY,
                        worst_seed: t.seed,
                        first_skip_reason: None,
                    });
                    report.checks.len() - 1
                }
            };
            let s = &mut report.checks[idx];
            match &c.outcome {
                Outcome::Margin(m) => {
                    s.evaluated += 1;
                    if *m < s.worst_margin {
                        s.worst_margin = *m;
                        s.worst_seed = t.seed;
                    }
                    if *m < -c.slack && !violated_here.contains(&c.name) {
                        s.violations += 1;
                        violated_here.push(c.name);
                    }
                }
                Outcome::Skipped(reason) => {
                    s.skipped += 1;
                    s.first_skip_reason.get_or_insert_with(|| reason.clone());
                }
            }
        }
    }
    if report.worst_margin.is_finite() {
        report.worst_trial_inputs = run_trial(suite, cfg, report.worst_seed, true).inputs;
    }
    Ok(report)
}

/// Runs several suites in order.
pub fn run_suites(suites: &[Suite], cfg: &SuiteConfig) -> Result<Vec<InequalityReport>> {
    suites.iter().map(|&s| run_suite(s, cfg)).collect()
}

pub fn check_lemma_logmajor(cfg: &SuiteConfig) -> Result<InequalityReport> {
    run_suite(Suite::LogMajor, cfg)
}

pub fn check_lemma_norm_power(cfg: &SuiteConfig) -> Result<InequalityReport> {
    run_suite(Suite::NormPower, cfg)
}

pub fn check_lemma_vector_power(cfg: &SuiteConfig) -> Result<InequalityReport> {
    run_suite(Suite::VectorPower, cfg)
}

pub fn check_lemma_trace_convex(cfg: &SuiteConfig) -> Result<InequalityReport> {
    run_suite(Suite::TraceConvex, cfg)
}

pub fn check_lemma_holder(cfg: &SuiteConfig) -> Result<InequalityReport> {
    run_suite(Suite::Holder, cfg)
}

pub fn check_core_lemma(cfg: &SuiteConfig) -> Result<InequalityReport> {
    run_suite(Suite::CoreLemma, cfg)
}

/// One report per property, in the order (a) to (h).
pub fn check_geomean_properties(cfg: &SuiteConfig) -> Result<Vec<InequalityReport>> {
    run_suites(&Suite::geomean_properties(), cfg)
}

pub fn check_proof_chain(cfg: &SuiteConfig) -> Result<InequalityReport> {
    run_suite(Suite::ProofChain, cfg)
}

pub fn check_concavity_theorem(cfg: &SuiteConfig) -> Result<InequalityReport> {
    run_suite(Suite::Concavity, cfg)
}
