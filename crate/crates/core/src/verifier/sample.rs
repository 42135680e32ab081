//! Random inputs for the suites.

use rand::Rng;

use crate::channel::{CQChannel, ProbabilityDistribution};
use crate::matops::random::{
    random_density, random_pd_conditioned, random_rank_deficient, random_simplex,
};
use crate::matops::PsdMatrix;

pub(crate) const MAX_CONDITION: f64 = 1e6;

/// Log-uniform on `[lo, hi]`.
pub(crate) fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi / lo).ln()).exp()
}

/// Largest eigenvalue of sampled operators.
pub(crate) fn top<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    log_uniform(rng, 0.1, 10.0)
}

pub(crate) fn pd<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PsdMatrix {
    let t = top(rng);
    random_pd_conditioned(rng, d, MAX_CONDITION, t)
}

/// PSD, full rank about half the time.
pub(crate) fn psd<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PsdMatrix {
    let t = top(rng);
    let rank = if rng.random_bool(0.5) {
        d
    } else {
        rng.random_range(1..=d)
    };
    random_rank_deficient(rng, d, rank, MAX_CONDITION, t)
}

/// PSD of rank strictly below `d` (rank 1 when `d = 1`).
pub(crate) fn singular<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PsdMatrix {
    let t = top(rng);
    let rank = rng.random_range(1..d.max(2)).min(d);
    random_rank_deficient(rng, d, rank, MAX_CONDITION, t)
}

/// Channel whose outputs mix full-rank and rank-deficient states.
pub(crate) fn channel<R: Rng + ?Sized>(rng: &mut R, d: usize, inputs: usize) -> CQChannel {
    let states = (0..inputs)
        .map(|_| {
            let rank = if rng.random_bool(0.5) {
                d
            } else {
                rng.random_range(1..=d)
            };
            random_density(rng, d, rank, MAX_CONDITION)
        })
        .collect();
    CQChannel::from_states(states).expect("sampled states are density operators")
}

pub(crate) fn distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProbabilityDistribution {
    ProbabilityDistribution::normalized(random_simplex(rng, n)).expect("positive weights")
}
