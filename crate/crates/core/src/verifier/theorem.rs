//! Concavity of `E₀(s, P)` in `s`, and the step-by-step inequality chain
//! that proves it.
//!
//! With `t = θl + (1−θ)r` and `λ = lθ/t`, write `A = 𝔼 W^{1/l}`,
//! `B = 𝔼 W^{1/r}` (expectations under `P`). The chain is
//!
//! ```text
//! (i)   λ/l + (1−λ)/r = 1/t
//! (ii)  𝔼 W^{1/t} ⪯ A #_{1−λ} B
//! (iii) Tr[(𝔼 W^{1/t})^t] ≤ Tr[(A #_{1−λ} B)^t]
//! (iv)  Tr[(A #_{1−λ} B)^t] ≤ Tr[A^{tλ} B^{t(1−λ)}] = Tr[A^{lθ} B^{r(1−θ)}]
//! (v)   Tr[A^{lθ} B^{r(1−θ)}] ≤ (Tr A^l)^θ (Tr B^r)^{1−θ}
//! ```
//!
//! and its conclusion is `f(t) ≤ θ f(l) + (1−θ) f(r)`.

use rand::Rng;

use super::lemmas::{core_sides, holder_bound};
use super::{equality_margin, leq_margin, loewner_margin, sample, TrialCtx};
use crate::channel::{
    e0_quantum, embed_classical, f_map, mixture_of_powers, output_powers, CQChannel,
    ClassicalChannel, DensityOperator, ProbabilityDistribution,
};
use crate::error::Result;
use crate::geomean::weighted_geomean_limit;
use crate::matops::random::random_simplex;
use crate::matops::{trace_of_product, PsdMatrix};

pub(super) const MAX_DIM: usize = 5;
const MAX_INPUTS: usize = 5;
const IDENTITY_TOL: f64 = 1e-12;

pub(super) const PROOF_CHAIN_PARAMS: &[(&str, &str)] = &[
    ("inputs", "1..=5"),
    ("l, r", "1 ≤ l ≤ r ≤ 8"),
    ("theta", "[0, 1]"),
    ("identity tolerance", "1e-12"),
];

pub(super) const CONCAVITY_PARAMS: &[(&str, &str)] = &[
    ("inputs", "1..=6"),
    ("full", "0 ≤ s₁ < s₂ ≤ 8"),
    ("unit interval", "0 ≤ s₁ < s₂ ≤ 1"),
    ("f-convexity", "1 ≤ l ≤ r ≤ 9"),
    ("channels", "random, classical embedded, useless"),
];

fn ordered_pair<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> (f64, f64) {
    let x = lo + (hi - lo) * rng.random::<f64>();
    let y = lo + (hi - lo) * rng.random::<f64>();
    (x.min(y), x.max(y))
}

pub(super) fn proof_chain(ctx: &mut TrialCtx) -> Result<()> {
    let d = ctx.dim();
    let n = ctx.rng.random_range(1..=MAX_INPUTS);
    let w = sample::channel(&mut ctx.rng, d, n);
    let p = sample::distribution(&mut ctx.rng, n);
    let (l, r) = ordered_pair(&mut ctx.rng, 1.0, 8.0);
    let theta: f64 = ctx.rng.random();
    if ctx.capturing() {
        for (x, o) in w.outputs().iter().enumerate() {
            ctx.input_matrix(format!("W{x}"), o.as_psd().as_hermitian());
        }
    }
    ctx.input("P", p.weights());
    ctx.input("l", l);
    ctx.input("r", r);
    ctx.input("theta", theta);

    let t = theta * l + (1.0 - theta) * r;
    let lambda = l * theta / t;
    let identity = (lambda / l + (1.0 - lambda) / r - 1.0 / t).abs();
    let exponents = (t * lambda - l * theta)
        .abs()
        .max((t * (1.0 - lambda) - r * (1.0 - theta)).abs());
    ctx.check_with_slack(
        "(i) exponent identity",
        -identity.max(exponents),
        IDENTITY_TOL,
    );

    let pw_t = output_powers(&w, 1.0 / t)?;
    let pw_l = output_powers(&w, 1.0 / l)?;
    let pw_r = output_powers(&w, 1.0 / r)?;
    let gm = ctx.cfg.geomean.clone();

    // W_x^{1/t} = W_x^{1/l} #_{1−λ} W_x^{1/r}: the pointwise form of (ii)
    let mut pointwise = 0f64;
    for ((wt, wl), wr) in pw_t.iter().zip(&pw_l).zip(&pw_r) {
        let (wl, wr) = (PsdMatrix::new(wl.clone())?, PsdMatrix::new(wr.clone())?);
        let mean = weighted_geomean_limit(&wl, &wr, 1.0 - lambda, &gm)?;
        pointwise = pointwise.min(equality_margin(wt.as_matrix(), mean.as_matrix()));
    }
    ctx.check("pointwise mean", pointwise);

    let m_t = PsdMatrix::new(mixture_of_powers(&pw_t, &p))?;
    let a = PsdMatrix::new(mixture_of_powers(&pw_l, &p))?;
    let b = PsdMatrix::new(mixture_of_powers(&pw_r, &p))?;
    let mean = weighted_geomean_limit(&a, &b, 1.0 - lambda, &gm)?;
    ctx.check(
        "(ii) mixture ⪯ mean",
        loewner_margin(m_t.as_hermitian(), mean.as_hermitian())?,
    );

    let tr_mix = m_t.trace_power(t)?;
    let (tr_mean, tr_product, imag) = core_sides(&mean, &a, &b, t, 1.0 - lambda)?;
    ctx.check("(iii) trace monotonicity", leq_margin(tr_mix, tr_mean));
    ctx.check("(iv) core inequality", leq_margin(tr_mean, tr_product));
    ctx.check_with_slack("(iv) imaginary part", imag, 0.0);

    let a_l = PsdMatrix::new(a.power(l * theta)?)?;
    let b_r = PsdMatrix::new(b.power(r * (1.0 - theta))?)?;
    let rewritten = trace_of_product(a_l.as_matrix(), b_r.as_matrix()).re;
    ctx.check(
        "(iv) exponent rewrite",
        -leq_margin(tr_product, rewritten).abs(),
    );
    let bound = holder_bound(a_l.as_hermitian(), b_r.as_hermitian(), theta)?;
    ctx.check("(v) holder", leq_margin(rewritten, bound));

    let ft = f_map(&w, &p, t)?;
    let rhs = theta * f_map(&w, &p, l)? + (1.0 - theta) * f_map(&w, &p, r)?;
    ctx.check("conclusion", leq_margin(ft, rhs));
    Ok(())
}

enum ChannelKind {
    Random,
    Classical,
    Useless,
}

fn concavity_channel(ctx: &mut TrialCtx) -> Result<(ChannelKind, CQChannel)> {
    let d = ctx.dim();
    let n = ctx.rng.random_range(1..=6);
    let u: f64 = ctx.rng.random();
    Ok(if u < 0.7 {
        (ChannelKind::Random, sample::channel(&mut ctx.rng, d, n))
    } else if u < 0.85 {
        let rows = (0..n).map(|_| random_simplex(&mut ctx.rng, d)).collect();
        (
            ChannelKind::Classical,
            embed_classical(&ClassicalChannel::new(rows)?),
        )
    } else {
        let state = sample::channel(&mut ctx.rng, d, 1).outputs()[0].clone();
        let outputs: Vec<DensityOperator> = vec![state; n];
        (ChannelKind::Useless, CQChannel::new(outputs)?)
    })
}

/// Midpoint-style concavity `E₀(θs₁+(1−θ)s₂) ≥ θE₀(s₁) + (1−θ)E₀(s₂)`.
fn concavity_margin(
    w: &CQChannel,
    p: &ProbabilityDistribution,
    s1: f64,
    s2: f64,
    theta: f64,
) -> Result<f64> {
    let mid = e0_quantum(w, p, theta * s1 + (1.0 - theta) * s2)?;
    let chord = theta * e0_quantum(w, p, s1)? + (1.0 - theta) * e0_quantum(w, p, s2)?;
    Ok(leq_margin(chord, mid))
}

pub(super) fn concavity(ctx: &mut TrialCtx) -> Result<()> {
    let (kind, w) = concavity_channel(ctx)?;
    let n = w.alphabet_size();
    let p = sample::distribution(&mut ctx.rng, n);
    let (s1, s2) = ordered_pair(&mut ctx.rng, 0.0, 8.0);
    let (u1, u2) = ordered_pair(&mut ctx.rng, 0.0, 1.0);
    let (l, r) = ordered_pair(&mut ctx.rng, 1.0, 9.0);
    let theta: f64 = ctx.rng.random();
    if ctx.capturing() {
        let kind = match kind {
            ChannelKind::Random => "random",
            ChannelKind::Classical => "classical",
            ChannelKind::Useless => "useless",
        };
        ctx.input("kind", kind);
        for (x, o) in w.outputs().iter().enumerate() {
            ctx.input_matrix(format!("W{x}"), o.as_psd().as_hermitian());
        }
    }
    ctx.input("P", p.weights());
    ctx.input("s", (s1, s2));
    ctx.input("s_unit", (u1, u2));
    ctx.input("l, r", (l, r));
    ctx.input("theta", theta);

    ctx.check("full", concavity_margin(&w, &p, s1, s2, theta)?);
    ctx.check("unit interval", concavity_margin(&w, &p, u1, u2, theta)?);
    let ft = f_map(&w, &p, theta * l + (1.0 - theta) * r)?;
    let chord = theta * f_map(&w, &p, l)? + (1.0 - theta) * f_map(&w, &p, r)?;
    ctx.check("f-convexity", leq_margin(ft, chord));
    if let ChannelKind::Useless = kind {
        let worst = [s1, s2, u1, u2]
            .iter()
            .map(|&s| e0_quantum(&w, &p, s).map(f64::abs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        ctx.check("useless vanishes", -worst);
    }
    Ok(())
}
