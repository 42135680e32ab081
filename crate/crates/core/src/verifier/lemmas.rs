//! Suites for the auxiliary matrix inequalities.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{leq_margin, sample, TrialCtx};
use crate::error::{Error, Result};
use crate::geomean::{weighted_geomean, weighted_geomean_limit};
use crate::majorization::{
    eigenvalue_vector, log_majorizes_with_slack, weak_majorizes, weak_majorizes_with_slack,
};
use crate::matops::random::random_hermitian;
use crate::matops::random::random_unitary;
use crate::matops::{eigh, kyfan_norms, trace_fn, trace_of_product, HermitianMatrix, PsdMatrix};

type Params = &'static [(&'static str, &'static str)];

pub(super) const LOGMAJOR_PARAMS: Params = &[("s", "[0, 1]"), ("condition", "≤ 1e6")];
pub(super) const NORM_POWER_PARAMS: Params = &[("t", "0.3, 0.7, 1, 2, 5"), ("rank", "1..=d")];
pub(super) const VECTOR_POWER_PARAMS: Params = &[("t", "1, 1.5, 2, 4, 10"), ("y", "[0, 5)^d")];
pub(super) const TRACE_CONVEX_PARAMS: Params = &[
    ("psd pairs", "x^2, x^4, x^p with p ∈ [1, 4]"),
    ("hermitian pairs", "exp, x·max(x, 0)"),
];
pub(super) const HOLDER_PARAMS: Params = &[("theta", "[0.02, 0.98]"), ("rank", "1..=d")];
pub(super) const CORE_LEMMA_PARAMS: Params = &[
    ("t", "[1, 8]"),
    ("lambda", "[0, 1]"),
    ("singular", "report only, ε-limit"),
];

fn clamp_nonneg(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x.max(0.0)).collect()
}

/// `λ(A #_s B) ≺_log λ(A^{(1−s)/2} B^s A^{(1−s)/2})`.
pub(super) fn logmajor(ctx: &mut TrialCtx) -> Result<()> {
    let d = ctx.dim();
    let a = sample::pd(&mut ctx.rng, d);
    let b = sample::pd(&mut ctx.rng, d);
    let s: f64 = ctx.rng.random();
    ctx.input_matrix("A", a.as_hermitian());
    ctx.input_matrix("B", b.as_hermitian());
    ctx.input("s", s);
    let lhs = eigenvalue_vector(weighted_geomean(&a, &b, s)?.as_hermitian());
    let rhs = eigenvalue_vector(&a.power((1.0 - s) / 2.0)?.sandwich(&b.power(s)?));
    let v = log_majorizes_with_slack(&clamp_nonneg(lhs), &clamp_nonneg(rhs), 0.0)?;
    ctx.check("log-majorization", v.relative_margin());
    Ok(())
}

const NORM_POWERS: [(&str, f64); 5] = [
    ("t=0.3", 0.3),
    ("t=0.7", 0.7),
    ("t=1", 1.0),
    ("t=2", 2.0),
    ("t=5", 5.0),
];

/// Ky Fan norms of `BᵗAᵗBᵗ` against `(BAB)ᵗ`.
pub(super) fn norm_power(ctx: &mut TrialCtx) -> Result<()> {
    let d = ctx.dim();
    let a = sample::psd(&mut ctx.rng, d);
    let b = sample::psd(&mut ctx.rng, d);
    ctx.input_matrix("A", a.as_hermitian());
    ctx.input_matrix("B", b.as_hermitian());
    // eigenvalues of BAB below its rounding level are zeros of B or A; any
    // larger one is kept, however small relative to ‖BAB‖
    let bab = eigh(&b.as_hermitian().sandwich(a.as_hermitian()));
    let noise = 16.0 * d as f64 * f64::EPSILON * b.max_eigenvalue().powi(2) * a.max_eigenvalue();
    for (name, t) in NORM_POWERS {
        let inner = b.power(t)?.sandwich(&a.power(t)?);
        let outer = bab.map(|x| if x > noise { x.powf(t) } else { 0.0 });
        let (ni, no) = (kyfan_norms(&inner), kyfan_norms(&outer));
        let margin = ni
            .iter()
            .zip(&no)
            .map(|(&x, &y)| {
                if t < 1.0 {
                    leq_margin(x, y)
                } else if t > 1.0 {
                    leq_margin(y, x)
                } else {
                    leq_margin(x, y).min(leq_margin(y, x))
                }
            })
            .fold(f64::INFINITY, f64::min);
        ctx.check(name, margin);
    }
    Ok(())
}

const VECTOR_POWERS: [(&str, f64); 5] = [
    ("t=1", 1.0),
    ("t=1.5", 1.5),
    ("t=2", 2.0),
    ("t=4", 4.0),
    ("t=10", 10.0),
];

const PAIR_ATTEMPTS: usize = 100;

/// A pair `x ≺_w y` of non-negative vectors: `x` is a shrunken mixture of
/// permutations of `y`, lowered entrywise by a random amount.
fn weakly_majorized_pair<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    for _ in 0..PAIR_ATTEMPTS {
        let y: Vec<f64> = (0..d)
            .map(|_| {
                if rng.random_bool(0.2) {
                    0.0
                } else {
                    5.0 * rng.random::<f64>()
                }
            })
            .collect();
        let c = 0.5 + 0.5 * rng.random::<f64>();
        let mut x = vec![0.0; d];
        let terms = rng.random_range(1..=3);
        let mut perm: Vec<usize> = (0..d).collect();
        for _ in 0..terms {
            perm.shuffle(rng);
            for (i, &j) in perm.iter().enumerate() {
                x[i] += c * y[j] / terms as f64;
            }
        }
        for xi in x.iter_mut() {
            *xi -= *xi * 0.3 * rng.random::<f64>();
        }
        if weak_majorizes_with_slack(&x, &y, 0.0)?.holds {
            return Ok((x, y));
        }
    }
    Err(Error::Generator(format!(
        "no weakly majorized pair after {PAIR_ATTEMPTS} attempts"
    )))
}

/// `x ≺_w y ⇒ xᵗ ≺_w yᵗ` for `t ≥ 1`.
pub(super) fn vector_power(ctx: &mut TrialCtx) -> Result<()> {
    let d = ctx.dim();
    let (x, y) = weakly_majorized_pair(&mut ctx.rng, d)?;
    ctx.input("x", &x);
    ctx.input("y", &y);
    for (name, t) in VECTOR_POWERS {
        let xt: Vec<f64> = x.iter().map(|v| v.powf(t)).collect();
        let yt: Vec<f64> = y.iter().map(|v| v.powf(t)).collect();
        ctx.check(name, weak_majorizes(&xt, &yt)?.relative_margin());
    }
    Ok(())
}

/// `A ⪯ B ⇒ Tr f(A) ≤ Tr f(B)` for monotone convex `f`.
pub(super) fn trace_convex(ctx: &mut TrialCtx) -> Result<()> {
    let d = ctx.dim();

    // x^p is monotone on [0, ∞), so the pair is kept PSD
    let a = sample::psd(&mut ctx.rng, d);
    let g = sample::psd(&mut ctx.rng, d);
    let b = a.as_hermitian() + g.as_hermitian();
    let p = 1.0 + 3.0 * ctx.rng.random::<f64>();
    ctx.input_matrix("A_psd", a.as_hermitian());
    ctx.input_matrix("G_psd", g.as_hermitian());
    ctx.input("p", p);
    let pow = |e: f64| move |x: f64| x.max(0.0).powf(e);
    for (name, e) in [("psd x^2", 2.0), ("psd x^4", 4.0), ("psd x^p", p)] {
        let lhs = trace_fn(a.as_hermitian(), pow(e))?;
        let rhs = trace_fn(&b, pow(e))?;
        ctx.check(name, leq_margin(lhs, rhs));
    }

    let scale = 0.1 + 1.9 * ctx.rng.random::<f64>();
    let h = random_hermitian(&mut ctx.rng, d, scale);
    let g = sample::psd(&mut ctx.rng, d);
    let k = &h + g.as_hermitian();
    ctx.input_matrix("A_herm", &h);
    ctx.input_matrix("G_herm", g.as_hermitian());
    let ramp = |x: f64| x * x.max(0.0);
    let lhs = trace_fn(&h, f64::exp)?;
    let rhs = trace_fn(&k, f64::exp)?;
    ctx.check("hermitian exp", leq_margin(lhs, rhs));
    let lhs = trace_fn(&h, ramp)?;
    let rhs = trace_fn(&k, ramp)?;
    ctx.check("hermitian x·max(x,0)", leq_margin(lhs, rhs));
    Ok(())
}

/// `(Tr A^{1/θ})^θ (Tr B^{1/(1−θ)})^{1−θ}`.
pub(super) fn holder_bound(a: &HermitianMatrix, b: &HermitianMatrix, theta: f64) -> Result<f64> {
    let tr = |m: &HermitianMatrix, q: f64| trace_fn(m, move |x| x.max(0.0).powf(q));
    if theta <= 0.0 {
        return Ok(a.spectral_norm() * trace_fn(b, |x| x.max(0.0))?);
    }
    if theta >= 1.0 {
        return Ok(trace_fn(a, |x| x.max(0.0))? * b.spectral_norm());
    }
    let ln = theta * tr(a, 1.0 / theta)?.ln() + (1.0 - theta) * tr(b, 1.0 / (1.0 - theta))?.ln();
    Ok(ln.exp())
}

/// `Tr[AB] ≤ (Tr A^{1/θ})^θ (Tr B^{1/(1−θ)})^{1−θ}`.
pub(super) fn holder(ctx: &mut TrialCtx) -> Result<()> {
    let d = ctx.dim();
    let a = sample::psd(&mut ctx.rng, d);
    let b = sample::psd(&mut ctx.rng, d);
    let theta = 0.02 + 0.96 * ctx.rng.random::<f64>();
    ctx.input_matrix("A", a.as_hermitian());
    ctx.input_matrix("B", b.as_hermitian());
    ctx.input("theta", theta);
    let lhs = trace_of_product(a.as_matrix(), b.as_matrix()).re;
    let rhs = holder_bound(a.as_hermitian(), b.as_hermitian(), theta)?;
    ctx.check("holder", leq_margin(lhs, rhs));
    Ok(())
}

pub(super) const IMAG_TOL: f64 = 1e-10;

/// `(Tr[(A #_λ B)ᵗ], Re Tr[A^{t(1−λ)} B^{tλ}], margin of |Im| below [`IMAG_TOL`])`.
pub(super) fn core_sides(
    mean: &PsdMatrix,
    a: &PsdMatrix,
    b: &PsdMatrix,
    t: f64,
    lambda: f64,
) -> Result<(f64, f64, f64)> {
    let lhs = mean.trace_power(t)?;
    let z = trace_of_product(
        a.power(t * (1.0 - lambda))?.as_matrix(),
        b.power(t * lambda)?.as_matrix(),
    );
    let scale = 1f64.max(z.re.abs());
    let imag_margin = (IMAG_TOL * scale - z.im.abs()) / scale;
    Ok((lhs, z.re, imag_margin))
}

/// Two singular operators with the same range and unrelated eigenbases on it.
fn shared_support_pair<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<(PsdMatrix, PsdMatrix)> {
    let rank = rng.random_range(1..d.max(2)).min(d);
    let frame = random_unitary(rng, d);
    let v = frame.columns(0, rank).into_owned();
    let build = |rng: &mut R| -> Result<PsdMatrix> {
        let inner = sample::pd(rng, rank);
        PsdMatrix::new(HermitianMatrix::hermitize(
            &v * inner.as_matrix() * v.adjoint(),
        ))
    };
    let a = build(rng)?;
    let b = build(rng)?;
    Ok((a, b))
}

/// `Tr[(A #_λ B)ᵗ] ≤ Tr[A^{t(1−λ)} B^{tλ}]` for `t ≥ 1`, `λ ∈ [0, 1]`.
pub(super) fn core_lemma(ctx: &mut TrialCtx) -> Result<()> {
    let d = ctx.dim();
    let a = sample::pd(&mut ctx.rng, d);
    let b = sample::pd(&mut ctx.rng, d);
    let t = 1.0 + 7.0 * ctx.rng.random::<f64>();
    let lambda: f64 = ctx.rng.random();
    ctx.input_matrix("A", a.as_hermitian());
    ctx.input_matrix("B", b.as_hermitian());
    ctx.input("t", t);
    ctx.input("lambda", lambda);
    let mean = weighted_geomean(&a, &b, lambda)?;
    let (lhs, rhs, imag) = core_sides(&mean, &a, &b, t, lambda)?;
    ctx.check("definite", leq_margin(lhs, rhs));
    ctx.check_with_slack("imaginary part", imag, 0.0);

    let (sa, sb) = if ctx.rng.random_bool(0.5) {
        (
            sample::singular(&mut ctx.rng, d),
            sample::singular(&mut ctx.rng, d),
        )
    } else {
        shared_support_pair(&mut ctx.rng, d)?
    };
    let ts = 1.0 + 7.0 * ctx.rng.random::<f64>();
    let ls: f64 = ctx.rng.random();
    ctx.input_matrix("A_singular", sa.as_hermitian());
    ctx.input_matrix("B_singular", sb.as_hermitian());
    ctx.input("t_singular", ts);
    ctx.input("lambda_singular", ls);
    match weighted_geomean_limit(&sa, &sb, ls, &ctx.cfg.geomean) {
        Ok(mean) => {
            let (lhs, rhs, _) = core_sides(&mean, &sa, &sb, ts, ls)?;
            ctx.report_only("singular", leq_margin(lhs, rhs));
        }
        Err(e @ Error::NonConvergence { .. }) => ctx.skip("singular", false, e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(())
}
