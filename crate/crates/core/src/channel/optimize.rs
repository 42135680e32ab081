//! Input-distribution optimization and the error exponents
//!
//! ```text
//! E_r(R)  = max_{0 ≤ s ≤ 1} { max_P E₀(s, P) − sR }
//! E_sp(R) = sup_{s ≥ 0}     { max_P E₀(s, P) − sR }
//! ```
//!
//! The inner maximization minimizes `F(P) = Tr[M_P^t]`, `M_P = Σ_x P(x) W_x^{1/t}`,
//! which is convex in `P` because `X ↦ Tr X^t` is convex for `t ≥ 1`.
//! Exponentiated-gradient steps keep iterates inside the simplex; the
//! gradient `∂F/∂P(x) = t Tr[M_P^{t−1} W_x^{1/t}]` is exact. Convexity gives
//! the stopping bound `F(P) − F* ≤ Σ_x P(x) ∂_x F − min_x ∂_x F`.
//!
//! The outer search over `s` scans a grid and refines the best grid cell by
//! golden-section search.

use std::f64::consts::LN_2;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{output_powers, CQChannel, ProbabilityDistribution};
use crate::error::{Error, Result};
use crate::matops::random::{random_simplex, stream_seed, TrialRng};
use crate::matops::{eigh, trace_of_product, CMatrix, EigenSystem, HermitianMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Number of starting points for the input optimization.
    pub starts: usize,
    /// Optimality tolerance on `max_P E₀`, bits.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Coarse grid step for the search over `s`.
    pub s_step: f64,
    /// Golden-section bracket width at termination.
    pub s_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            tol: 1e-7,
            max_iters: 5000,
            seed: 0,
            s_step: 0.05,
            s_tol: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::input("optimizer needs at least one start"));
        }
        if !(self.tol > 0.0) || !(self.s_step > 0.0) || !(self.s_tol > 0.0) {
            return Err(Error::input(
                "optimizer tolerances and step must be positive",
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::input("max_iters must be positive"));
        }
        Ok(())
    }
}

/// Result of [`max_e0_over_inputs`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputOptimum {
    pub distribution: ProbabilityDistribution,
    /// `E₀(s, P*)` in bits.
    pub value: f64,
    /// Whether the optimality bound reached `tol` before `max_iters`.
    pub converged: bool,
    pub iterations: usize,
}

struct TraceObjective {
    powers: Vec<CMatrix>,
    t: f64,
}

impl TraceObjective {
    fn mixture(&self, p: &[f64]) -> EigenSystem {
        let d = self.powers[0].nrows();
        let mut m = CMatrix::zeros(d, d);
        for (w, &px) in self.powers.iter().zip(p) {
            if px > 0.0 {
                m += w.scale(px);
            }
        }
        eigh(&HermitianMatrix::hermitize(m))
    }

    fn trace_power(&self, es: &EigenSystem) -> f64 {
        es.eigenvalues
            .iter()
            .map(|&x| if x > 0.0 { x.powf(self.t) } else { 0.0 })
            .sum()
    }

    /// `ln F(P)`.
    fn value(&self, p: &[f64]) -> f64 {
        self.trace_power(&self.mixture(p)).ln()
    }

    /// `ln F(P)` and `∂ ln F / ∂P(x)`.
    fn value_and_gradient(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let es = self.mixture(p);
        let f = self.trace_power(&es);
        let s = self.t - 1.0;
        let m_s = es.map(|x| {
            if x > 0.0 {
                x.powf(s)
            } else if s == 0.0 {
                1.0
            } else {
                0.0
            }
        });
        let grad = self
            .powers
            .iter()
            .map(|w| self.t * trace_of_product(m_s.as_matrix(), w).re / f)
            .collect();
        (f.ln(), grad)
    }
}

fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
}

struct AscentResult {
    weights: Vec<f64>,
    ln_trace: f64,
    converged: bool,
    iterations: usize,
}

fn exponentiated_gradient(
    obj: &TraceObjective,
    start: Vec<f64>,
    opt: &OptimizerConfig,
) -> AscentResult {
    let mut p = start;
    let (mut lnf, mut grad) = obj.value_and_gradient(&p);
    let mut eta = 1.0;
    for it in 0..opt.max_iters {
        let mean: f64 = p.iter().zip(&grad).map(|(a, b)| a * b).sum();
        let gmin = grad.iter().copied().fold(f64::INFINITY, f64::min);
        let gap = mean - gmin;
        let gap_bits = if gap < 1.0 {
            -(1.0 - gap).ln() / LN_2
        } else {
            f64::INFINITY
        };
        if gap_bits <= opt.tol {
            return AscentResult {
                weights: p,
                ln_trace: lnf,
                converged: true,
                iterations: it,
            };
        }
        loop {
            let mut q: Vec<f64> = p
                .iter()
                .zip(&grad)
                .map(|(&px, &g)| px * (-eta * (g - gmin)).exp())
                .collect();
            normalize(&mut q);
            let lnq = obj.value(&q);
            if lnq <= lnf {
                p = q;
                (lnf, grad) = obj.value_and_gradient(&p);
                eta = (eta * 2.0).min(1e6);
                break;
            }
            eta *= 0.5;
            if eta < 1e-14 {
                // no descent left at working precision
                return AscentResult {
                    weights: p,
                    ln_trace: lnf,
                    converged: false,
                    iterations: it,
                };
            }
        }
    }
    AscentResult {
        weights: p,
        ln_trace: lnf,
        converged: false,
        iterations: opt.max_iters,
    }
}

const VERTEX_START_LIMIT: usize = 7;
const VERTEX_START_MASS: f64 = 0.999;

fn starting_points(n: usize, s: f64, opt: &OptimizerConfig) -> Vec<Vec<f64>> {
    let mut starts = vec![vec![1.0 / n as f64; n]];
    if n <= VERTEX_START_LIMIT {
        for x in 0..n {
            let rest = (1.0 - VERTEX_START_MASS) / (n - 1) as f64;
            let mut v = vec![rest; n];
            v[x] = VERTEX_START_MASS;
            starts.push(v);
        }
    }
    let mut k = 0;
    while starts.len() < opt.starts {
        let mut rng =
            TrialRng::seed_from_u64(stream_seed(opt.seed ^ s.to_bits(), "input-start", k));
        starts.push(random_simplex(&mut rng, n));
        k += 1;
    }
    starts.truncate(opt.starts);
    starts
}

/// `max_P E₀(s, P)` by multistart exponentiated-gradient ascent.
///
/// Deterministic given `opt.seed`. Non-convergence is reported through
/// [`InputOptimum::converged`], with the best point found.
pub fn max_e0_over_inputs(w: &CQChannel, s: f64, opt: &OptimizerConfig) -> Result<InputOptimum> {
    opt.validate()?;
    if !s.is_finite() || s < 0.0 {
        return Err(Error::input(format!("s must be finite and ≥ 0, got {s}")));
    }
    let n = w.alphabet_size();
    if s == 0.0 || n == 1 {
        let p = if n == 1 {
            ProbabilityDistribution::new(vec![1.0])?
        } else {
            ProbabilityDistribution::uniform(n)?
        };
        let value = super::e0_quantum(w, &p, s)?;
        return Ok(InputOptimum {
            distribution: p,
            value,
            converged: true,
            iterations: 0,
        });
    }
    let t = 1.0 + s;
    let obj = TraceObjective {
        powers: output_powers(w, 1.0 / t)?
            .into_iter()
            .map(HermitianMatrix::into_inner)
            .collect(),
        t,
    };
    let mut best: Option<AscentResult> = None;
    for start in starting_points(n, s, opt) {
        let run = exponentiated_gradient(&obj, start, opt);
        if !run.ln_trace.is_finite() {
            return Err(Error::Numerical("trace objective is not finite".into()));
        }
        if best.as_ref().is_none_or(|b| run.ln_trace < b.ln_trace) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    Ok(InputOptimum {
        distribution: ProbabilityDistribution::normalized(best.weights)?,
        value: -best.ln_trace / LN_2,
        converged: best.converged,
        iterations: best.iterations,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`. Returns the best interior point visited.
pub fn golden_section_max<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// One point on an exponent curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentPoint {
    /// Rate in bits per channel use.
    pub rate: f64,
    /// Exponent in bits per channel use; `+∞` when `divergent`.
    pub value: f64,
    pub divergent: bool,
    pub arg_s: f64,
    pub arg_p: ProbabilityDistribution,
    /// The maximizing `s` sits at the search cap.
    pub s_cap_hit: bool,
    /// Every input optimization on the optimal path converged.
    pub converged: bool,
}

fn build_grid(s_max: f64, step: f64) -> Vec<f64> {
    let n = (s_max / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    if s_max >= 1.0 {
        grid.push(1.0);
    }
    grid.push(s_max);
    grid.retain(|&s| s <= s_max);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}

/// Shares `max_P E₀` on the `s`-grid between many rates.
pub struct ExponentSolver<'a> {
    channel: &'a CQChannel,
    opt: OptimizerConfig,
    s_max: f64,
    grid: Vec<f64>,
    optima: Vec<InputOptimum>,
}

impl<'a> ExponentSolver<'a> {
    /// Evaluates the inner maximization on `0, step, 2·step, …, s_max`
    /// (plus `s = 1`). Grid points are evaluated on the current rayon pool;
    /// the result does not depend on the number of workers.
    pub fn new(channel: &'a CQChannel, opt: OptimizerConfig, s_max: f64) -> Result<Self> {
        opt.validate()?;
        if !(s_max > 0.0) || !s_max.is_finite() {
            return Err(Error::input(format!("s_max must be positive, got {s_max}")));
        }
        let grid = build_grid(s_max, opt.s_step);
        let optima = grid
            .par_iter()
            .map(|&s| max_e0_over_inputs(channel, s, &opt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            channel,
            opt,
            s_max,
            grid,
            optima,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn grid_optima(&self) -> &[InputOptimum] {
        &self.optima
    }

    fn check_rate(rate: f64) -> Result<()> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::input(format!(
                "rate must be finite and ≥ 0, got {rate}"
            )));
        }
        Ok(())
    }

    /// Maximizes `max_P E₀(s, P) − s·rate` over grid points `≤ s_hi`, then
    /// refines the best cell.
    fn search(&self, rate: f64, s_hi: f64) -> Result<(f64, f64, InputOptimum)> {
        let last = self
            .grid
            .iter()
            .rposition(|&s| s <= s_hi + 1e-12)
            .expect("grid starts at 0");
        let objective = |i: usize| self.optima[i].value - self.grid[i] * rate;
        let mut k = 0;
        for i in 1..=last {
            if objective(i) > objective(k) {
                k = i;
            }
        }
        let mut best = (self.grid[k], objective(k), self.optima[k].clone());
        let lo = self.grid[k.saturating_sub(1)];
        let hi = self.grid[(k + 1).min(last)];
        if hi > lo {
            let mut refined: Option<(f64, f64, InputOptimum)> = None;
            golden_section_max(
                |s| {
                    let o = max_e0_over_inputs(self.channel, s, &self.opt)?;
                    let g = o.value - s * rate;
                    if refined.as_ref().is_none_or(|r| g > r.1) {
                        refined = Some((s, g, o));
                    }
                    Ok(g)
                },
                lo,
                hi,
                self.opt.s_tol,
            )?;
            if let Some(r) = refined {
                if r.1 > best.1 {
                    best = r;
                }
            }
        }
        Ok(best)
    }

    /// `E_r(rate)`; requires the solver grid to reach `s = 1`.
    pub fn random_coding(&self, rate: f64) -> Result<ExponentPoint> {
        Self::check_rate(rate)?;
        if self.s_max < 1.0 {
            return Err(Error::input("random-coding exponent needs s_max ≥ 1"));
        }
        let (s, g, o) = self.search(rate, 1.0)?;
        Ok(ExponentPoint {
            rate,
            value: g.max(0.0),
            divergent: false,
            arg_s: s,
            s_cap_hit: false,
            converged: o.converged,
            arg_p: o.distribution,
        })
    }

    /// `E_sp(rate)` over `s ∈ [0, s_max]`, flagged divergent when the
    /// objective still rises at `s_max` (secant slope over the last grid
    /// cell above `opt.tol`).
    pub fn sphere_packing(&self, rate: f64) -> Result<ExponentPoint> {
        Self::check_rate(rate)?;
        let n = self.grid.len();
        let g_last = self.optima[n - 1].value - self.grid[n - 1] * rate;
        let g_prev = self.optima[n - 2].value - self.grid[n - 2] * rate;
        let slope = (g_last - g_prev) / (self.grid[n - 1] - self.grid[n - 2]);
        if slope > self.opt.tol {
            let o = &self.optima[n - 1];
            return Ok(ExponentPoint {
                rate,
                value: f64::INFINITY,
                divergent: true,
                arg_s: self.s_max,
                arg_p: o.distribution.clone(),
                s_cap_hit: true,
                converged: o.converged,
            });
        }
        let (s, g, o) = self.search(rate, self.s_max)?;
        Ok(ExponentPoint {
            rate,
            value: g.max(0.0),
            divergent: false,
            arg_s: s,
            s_cap_hit: s >= self.s_max - 1e-12,
            converged: o.converged,
            arg_p: o.distribution,
        })
    }
}

/// Random-coding exponent `E_r(R)` in bits.
pub fn random_coding_exponent(
    w: &CQChannel,
    rate: f64,
    opt: &OptimizerConfig,
) -> Result<ExponentPoint> {
    ExponentSolver::new(w, opt.clone(), 1.0)?.random_coding(rate)
}

pub const DEFAULT_S_MAX: f64 = 64.0;

/// Sphere-packing exponent `E_sp(R)` in bits, searched on `[0, s_max]`.
pub fn sphere_packing_exponent(
    w: &CQChannel,
    rate: f64,
    s_max: f64,
    opt: &OptimizerConfig,
) -> Result<ExponentPoint> {
    ExponentSolver::new(w, opt.clone(), s_max)?.sphere_packing(rate)
}
