//! Suites for the algebraic and order properties of `A #_s B`.

use rand::Rng;

use super::{equality_margin, loewner_margin, sample, TrialCtx, TrialFn};
use crate::error::Result;
use crate::geomean::weighted_geomean;
use crate::matops::random::{conditioned_spectrum, psd_with_spectrum, random_unitary};
use crate::matops::{CMatrix, HermitianMatrix, PsdMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Commutativity,
    Homogeneity,
    Monotonicity,
    Congruence,
    SelfDuality,
    Concavity,
    HarmonicArithmetic,
    Continuity,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::Commutativity,
        Property::Homogeneity,
        Property::Monotonicity,
        Property::Congruence,
        Property::SelfDuality,
        Property::Concavity,
        Property::HarmonicArithmetic,
        Property::Continuity,
    ];

    pub fn letter(&self) -> char {
        (b'a' + *self as u8) as char
    }

    pub fn name(&self) -> &'static str {
        match self {
            Property::Commutativity => "a-commutativity",
            Property::Homogeneity => "b-homogeneity",
            Property::Monotonicity => "c-monotonicity",
            Property::Congruence => "d-congruence",
            Property::SelfDuality => "e-self-duality",
            Property::Concavity => "f-concavity",
            Property::HarmonicArithmetic => "g-hm-gm-am",
            Property::Continuity => "h-continuity",
        }
    }

    pub(super) fn trial_fn(&self) -> TrialFn {
        match self {
            Property::Commutativity => commutativity,
            Property::Homogeneity => homogeneity,
            Property::Monotonicity => monotonicity,
            Property::Congruence => congruence,
            Property::SelfDuality => self_duality,
            Property::Concavity => concavity,
            Property::HarmonicArithmetic => harmonic_arithmetic,
            Property::Continuity => continuity,
        }
    }

    pub(super) fn params(&self) -> &'static [(&'static str, &'static str)] {
        match self {
            Property::Homogeneity => &[("s", "[0, 1]"), ("a, b", "(0, 10]")],
            Property::Congruence => &[("s", "[0, 1]"), ("singular values of M", "[0.5, 2]")],
            Property::Concavity => &[("s", "[0, 1]"), ("lambda", "[0, 1]")],
            Property::Continuity => &[("s", "[0, 1]"), ("eps", "geomean schedule")],
            _ => &[("s", "[0, 1]")],
        }
    }
}

fn pair(ctx: &mut TrialCtx) -> (usize, PsdMatrix, PsdMatrix, f64) {
    let d = ctx.dim();
    let a = sample::pd(&mut ctx.rng, d);
    let b = sample::pd(&mut ctx.rng, d);
    let s: f64 = ctx.rng.random();
    ctx.input_matrix("A", a.as_hermitian());
    ctx.input_matrix("B", b.as_hermitian());
    ctx.input("s", s);
    (d, a, b, s)
}

fn commutativity(ctx: &mut TrialCtx) -> Result<()> {
    let d = ctx.dim();
    let u = random_unitary(&mut ctx.rng, d);
    let ta = sample::top(&mut ctx.rng);
    let tb = sample::top(&mut ctx.rng);
    let sa = conditioned_spectrum(&mut ctx.rng, d, sample::MAX_CONDITION, ta);
    let mut sb = conditioned_spectrum(&mut ctx.rng, d, sample::MAX_CONDITION, tb);
    sb.reverse();
    let s: f64 = ctx.rng.random();
    let a = psd_with_spectrum(&u, &sa)?;
    let b = psd_with_spectrum(&u, &sb)?;
    ctx.input_matrix("A", a.as_hermitian());
    ctx.input_matrix("B", b.as_hermitian());
    ctx.input("s", s);
    let mean = weighted_geomean(&a, &b, s)?;
    let product = a.power(1.0 - s)?.as_matrix() * b.power(s)?.as_matrix();
    ctx.check("commuting", equality_margin(mean.as_matrix(), &product));
    Ok(())
}

fn homogeneity(ctx: &mut TrialCtx) -> Result<()> {
    let (_, a, b, s) = pair(ctx);
    let x = 10.0 * (1.0 - ctx.rng.random::<f64>());
    let y = 10.0 * (1.0 - ctx.rng.random::<f64>());
    ctx.input("a", x);
    ctx.input("b", y);
    let lhs = weighted_geomean(&a.scale(x)?, &b.scale(y)?, s)?;
    let rhs = weighted_geomean(&a, &b, s)?
        .as_hermitian()
        .scale(x.powf(1.0 - s) * y.powf(s));
    ctx.check(
        "homogeneity",
        equality_margin(lhs.as_matrix(), rhs.as_matrix()),
    );
    Ok(())
}

fn monotonicity(ctx: &mut TrialCtx) -> Result<()> {
    let (d, a, b, s) = pair(ctx);
    let g = sample::psd(&mut ctx.rng, d);
    let h = sample::psd(&mut ctx.rng, d);
    ctx.input_matrix("G", g.as_hermitian());
    ctx.input_matrix("H", h.as_hermitian());
    let c = PsdMatrix::new(a.as_hermitian() + g.as_hermitian())?;
    let e = PsdMatrix::new(b.as_hermitian() + h.as_hermitian())?;
    let lhs = weighted_geomean(&a, &b, s)?;
    let rhs = weighted_geomean(&c, &e, s)?;
    ctx.check(
        "monotonicity",
        loewner_margin(lhs.as_hermitian(), rhs.as_hermitian())?,
    );
    Ok(())
}

/// `U diag(σ) V` with singular values log-uniform in `[0.5, 2]`.
fn nonsingular<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let u = random_unitary(rng, d);
    let v = random_unitary(rng, d);
    let sigma: Vec<f64> = (0..d).map(|_| sample::log_uniform(rng, 0.5, 2.0)).collect();
    let mut us = u;
    for (j, &x) in sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(x);
    }
    us * v
}

fn congruence(ctx: &mut TrialCtx) -> Result<()> {
    let (d, a, b, s) = pair(ctx);
    let m = nonsingular(&mut ctx.rng, d);
    if ctx.capturing() {
        ctx.input("M", &m);
    }
    let lhs = weighted_geomean(&a, &b, s)?.as_hermitian().congruence(&m);
    let ma = PsdMatrix::new(a.as_hermitian().congruence(&m))?;
    let mb = PsdMatrix::new(b.as_hermitian().congruence(&m))?;
    let rhs = weighted_geomean(&ma, &mb, s)?;
    ctx.check(
        "congruence",
        equality_margin(lhs.as_matrix(), rhs.as_matrix()),
    );
    Ok(())
}

fn self_duality(ctx: &mut TrialCtx) -> Result<()> {
    let (_, a, b, s) = pair(ctx);
    let ab = weighted_geomean(&a, &b, s)?;
    let ba = weighted_geomean(&b, &a, 1.0 - s)?;
    ctx.check("swap", equality_margin(ab.as_matrix(), ba.as_matrix()));
    let inv = weighted_geomean(&a.inverse()?, &b.inverse()?, s)?;
    ctx.check(
        "inverse",
        equality_margin(ab.inverse()?.as_matrix(), inv.as_matrix()),
    );
    Ok(())
}

fn concavity(ctx: &mut TrialCtx) -> Result<()> {
    let (d, a, b, s) = pair(ctx);
    let c = sample::pd(&mut ctx.rng, d);
    let e = sample::pd(&mut ctx.rng, d);
    let lambda: f64 = ctx.rng.random();
    ctx.input_matrix("C", c.as_hermitian());
    ctx.input_matrix("D", e.as_hermitian());
    ctx.input("lambda", lambda);
    let mix = |x: &PsdMatrix, y: &PsdMatrix| {
        PsdMatrix::new(&x.as_hermitian().scale(lambda) + &y.as_hermitian().scale(1.0 - lambda))
    };
    let rhs = weighted_geomean(&mix(&a, &b)?, &mix(&c, &e)?, s)?;
    let lhs = mix(&weighted_geomean(&a, &c, s)?, &weighted_geomean(&b, &e, s)?)?;
    ctx.check(
        "joint concavity",
        loewner_margin(lhs.as_hermitian(), rhs.as_hermitian())?,
    );
    Ok(())
}

fn harmonic_arithmetic(ctx: &mut TrialCtx) -> Result<()> {
    let (_, a, b, s) = pair(ctx);
    let mean = weighted_geomean(&a, &b, s)?;
    let harmonic_inv =
        &a.inverse()?.as_hermitian().scale(1.0 - s) + &b.inverse()?.as_hermitian().scale(s);
    let harmonic = PsdMatrix::new(harmonic_inv)?.inverse()?;
    let arithmetic = &a.as_hermitian().scale(1.0 - s) + &b.as_hermitian().scale(s);
    ctx.check(
        "harmonic ⪯ geometric",
        loewner_margin(harmonic.as_hermitian(), mean.as_hermitian())?,
    );
    ctx.check(
        "geometric ⪯ arithmetic",
        loewner_margin(mean.as_hermitian(), &arithmetic)?,
    );
    Ok(())
}

/// `‖(A+εI) #_s (B+εI) − A #_s B‖₂` shrinks along the ε schedule and stays
/// below `[(1 + ε/α)^{1−s} (1 + ε/β)^s − 1] ‖A #_s B‖₂`, where `α`, `β` are the
/// smallest eigenvalues of `A`, `B`.
fn continuity(ctx: &mut TrialCtx) -> Result<()> {
    let (_, a, b, s) = pair(ctx);
    let mean = weighted_geomean(&a, &b, s)?;
    let norm = mean.max_eigenvalue();
    let scale = norm.max(1.0);
    let (alpha, beta) = (a.min_eigenvalue(), b.min_eigenvalue());
    let schedule = ctx.cfg.geomean.eps_schedule.clone();
    let mut previous: Option<f64> = None;
    let mut bound_margin = f64::INFINITY;
    let mut monotone_margin = f64::INFINITY;
    for eps in schedule {
        let shifted = weighted_geomean(&a.add_identity(eps)?, &b.add_identity(eps)?, s)?;
        let diff: HermitianMatrix = shifted.as_hermitian() - mean.as_hermitian();
        let err = diff.spectral_norm();
        let factor = (1.0 + eps / alpha).powf(1.0 - s) * (1.0 + eps / beta).powf(s) - 1.0;
        bound_margin = bound_margin.min((factor * norm - err) / scale);
        if let Some(p) = previous {
            monotone_margin = monotone_margin.min((p - err) / scale);
        }
        previous = Some(err);
    }
    ctx.check("bound", bound_margin);
    if monotone_margin.is_finite() {
        ctx.check("monotone decrease", monotone_margin);
    }
    Ok(())
}
