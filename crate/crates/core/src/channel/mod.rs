//! Channel models and the auxiliary function.
//!
//! For a classical-quantum channel `x ↦ W_x` and input distribution `P`,
//!
//! ```text
//! E₀(s, P) = −log₂ Tr[(Σ_x P(x) W_x^{1/(1+s)})^{1+s}],   s ≥ 0,
//! ```
//!
//! and for a classical channel `Q(y|x)` the trace becomes a sum over `y`.
//! The map `f(t) = log₂ Tr[(Σ_x P(x) W_x^{1/t})^t] = −E₀(t − 1, P)` is the
//! convex form in which concavity of `E₀` is checked.
//!
//! Singular outputs use the support convention of
//! [`matrix_power`](crate::matops::matrix_power): only positive powers occur.

mod optimize;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{eigh, CMatrix, HermitianMatrix, PsdMatrix};

pub use optimize::{
    golden_section_max, max_e0_over_inputs, random_coding_exponent, sphere_packing_exponent,
    ExponentPoint, ExponentSolver, InputOptimum, OptimizerConfig, DEFAULT_S_MAX,
};

const PROB_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;

/// Input distribution `P ∈ 𝒫(𝒳)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityDistribution {
    weights: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::input("empty distribution"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::input(format!("weight {i} is {w}, expected ≥ 0")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::input(format!(
                "weights sum to {total}, expected 1 within {PROB_TOL:e}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("empty alphabet"));
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Rescales non-negative weights to unit sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::input(
                "weights must be non-negative with positive sum",
            ));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ProbabilityDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityDistribution> for Vec<f64> {
    fn from(p: ProbabilityDistribution) -> Self {
        p.weights
    }
}

/// PSD operator with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(PsdMatrix);

impl DensityOperator {
    pub fn new(m: PsdMatrix) -> Result<Self> {
        let tr = m.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::input(format!(
                "density operator has trace {tr}, expected 1"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(PsdMatrix::from_matrix(m)?)
    }

    pub fn as_psd(&self) -> &PsdMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Classical-quantum channel `x ↦ W_x` on a common Hilbert-space dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct CQChannel {
    dim: usize,
    outputs: Vec<DensityOperator>,
}

impl CQChannel {
    pub fn new(outputs: Vec<DensityOperator>) -> Result<Self> {
        let first = outputs
            .first()
            .ok_or_else(|| Error::input("channel has no inputs"))?;
        let dim = first.dim();
        if let Some((x, w)) = outputs.iter().enumerate().find(|(_, w)| w.dim() != dim) {
            return Err(Error::input(format!(
                "output {x} has dimension {}, expected {dim}",
                w.dim()
            )));
        }
        Ok(Self { dim, outputs })
    }

    pub fn from_states(states: Vec<PsdMatrix>) -> Result<Self> {
        Self::new(
            states
                .into_iter()
                .map(DensityOperator::new)
                .collect::<Result<_>>()?,
        )
    }

    pub fn alphabet_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outputs(&self) -> &[DensityOperator] {
        &self.outputs
    }

    fn check_distribution(&self, p: &ProbabilityDistribution) -> Result<()> {
        if p.len() != self.alphabet_size() {
            return Err(Error::input(format!(
                "distribution has {} entries, channel has {} inputs",
                p.len(),
                self.alphabet_size()
            )));
        }
        Ok(())
    }
}

/// Classical channel given by its stochastic matrix `Q(y|x)`, one row per input.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChannel {
    rows: Vec<Vec<f64>>,
}

impl ClassicalChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::input("channel has no inputs"))?;
        if width == 0 {
            return Err(Error::input("channel has no outputs"));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::input(format!(
                    "row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|q| !q.is_finite() || *q < 0.0) {
                return Err(Error::input(format!("row {x} has a negative entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::input(format!("row {x} sums to {total}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }
}

/// `W_x = diag(Q(·|x))`.
pub fn embed_classical(q: &ClassicalChannel) -> CQChannel {
    let outputs = q
        .rows()
        .iter()
        .map(|row| {
            let m = PsdMatrix::from_real_diagonal(row).expect("stochastic row is PSD");
            DensityOperator::new(m).expect("stochastic row has unit trace")
        })
        .collect();
    CQChannel::new(outputs).expect("rows share the output alphabet")
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::input(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

/// `Σ_x P(x) W_x^{exponent}` for `exponent > 0`.
pub(crate) fn mixture_of_powers(
    powers: &[HermitianMatrix],
    p: &ProbabilityDistribution,
) -> HermitianMatrix {
    let d = powers[0].dim();
    let mut acc = CMatrix::zeros(d, d);
    for (w, &px) in powers.iter().zip(p.weights()) {
        if px > 0.0 {
            acc += w.as_matrix().scale(px);
        }
    }
    HermitianMatrix::hermitize(acc)
}

pub(crate) fn output_powers(w: &CQChannel, exponent: f64) -> Result<Vec<HermitianMatrix>> {
    w.outputs()
        .iter()
        .map(|o| o.as_psd().power(exponent))
        .collect()
}

/// `Tr[M^t]` for PSD `M`, negative rounding noise clamped to zero.
pub(crate) fn trace_power_of(m: &HermitianMatrix, t: f64) -> f64 {
    eigh(m)
        .eigenvalues
        .iter()
        .map(|&x| if x > 0.0 { x.powf(t) } else { 0.0 })
        .sum()
}

/// `ln Tr[(Σ_x P(x) W_x^{1/t})^t]`.
fn ln_trace_mixture_power(w: &CQChannel, p: &ProbabilityDistribution, t: f64) -> Result<f64> {
    let powers = output_powers(w, 1.0 / t)?;
    let m = mixture_of_powers(&powers, p);
    let tr = trace_power_of(&m, t);
    if !(tr > 0.0) {
        return Err(Error::Numerical(format!("Tr[M^t] = {tr} is not positive")));
    }
    Ok(tr.ln())
}

/// Auxiliary function of a classical-quantum channel, in bits.
pub fn e0_quantum(w: &CQChannel, p: &ProbabilityDistribution, s: f64) -> Result<f64> {
    check_finite("s", s)?;
    if s < 0.0 {
        return Err(Error::input(format!("s must be ≥ 0, got {s}")));
    }
    w.check_distribution(p)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(-ln_trace_mixture_power(w, p, 1.0 + s)? / std::f64::consts::LN_2)
}

/// Auxiliary function of a classical channel, in bits.
pub fn e0_classical(q: &ClassicalChannel, p: &ProbabilityDistribution, s: f64) -> Result<f64> {
    check_finite("s", s)?;
    if s < 0.0 {
        return Err(Error::input(format!("s must be ≥ 0, got {s}")));
    }
    if p.len() != q.input_size() {
        return Err(Error::input(format!(
            "distribution has {} entries, channel has {} inputs",
            p.len(),
            q.input_size()
        )));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let t = 1.0 + s;
    let total: f64 = (0..q.output_size())
        .map(|y| {
            let inner: f64 = q
                .rows()
                .iter()
                .zip(p.weights())
                .map(|(row, &px)| {
                    if row[y] > 0.0 {
                        px * row[y].powf(1.0 / t)
                    } else {
                        0.0
                    }
                })
                .sum();
            inner.powf(t)
        })
        .sum();
    Ok(-total.log2())
}

/// `f(t) = log₂ Tr[(Σ_x P(x) W_x^{1/t})^t]` for `t ≥ 1`; equals `−E₀(t − 1, P)`.
pub fn f_map(w: &CQChannel, p: &ProbabilityDistribution, t: f64) -> Result<f64> {
    check_finite("t", t)?;
    if t < 1.0 {
        return Err(Error::input(format!("t must be ≥ 1, got {t}")));
    }
    w.check_distribution(p)?;
    if t == 1.0 {
        return Ok(0.0);
    }
    Ok(ln_trace_mixture_power(w, p, t)? / std::f64::consts::LN_2)
}

pub const DEFAULT_DERIVATIVE_STEP: f64 = 1e-4;

/// Central differences `(∂E₀/∂s, ∂²E₀/∂s²)` at `s` with step `h`; needs `s ≥ h > 0`.
pub fn e0_derivatives(
    w: &CQChannel,
    p: &ProbabilityDistribution,
    s: f64,
    h: f64,
) -> Result<(f64, f64)> {
    check_finite("s", s)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::input(format!("step must be positive, got {h}")));
    }
    if s - h < 0.0 {
        return Err(Error::input(format!(
            "central difference at s = {s} needs h ≤ s, got h = {h}"
        )));
    }
    let lo = e0_quantum(w, p, s - h)?;
    let mid = e0_quantum(w, p, s)?;
    let hi = e0_quantum(w, p, s + h)?;
    Ok(((hi - lo) / (2.0 * h), (hi - 2.0 * mid + lo) / (h * h)))
}

/// One-sided differences for `s` near zero, where the central stencil would
/// leave the domain.
pub fn e0_derivatives_forward(
    w: &CQChannel,
    p: &ProbabilityDistribution,
    s: f64,
    h: f64,
) -> Result<(f64, f64)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::input(format!("step must be positive, got {h}")));
    }
    let e0 = e0_quantum(w, p, s)?;
    let e1 = e0_quantum(w, p, s + h)?;
    let e2 = e0_quantum(w, p, s + 2.0 * h)?;
    Ok((
        (-3.0 * e0 + 4.0 * e1 - e2) / (2.0 * h),
        (e0 - 2.0 * e1 + e2) / (h * h),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::random::{random_density, random_simplex, rng_from_seed, stream_seed};
    use num_complex::Complex64;
    use rand::Rng;

    fn noiseless() -> ClassicalChannel {
        ClassicalChannel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    fn useless() -> ClassicalChannel {
        ClassicalChannel::new(vec![vec![0.3, 0.7], vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap()
    }

    fn bsc(p: f64) -> ClassicalChannel {
        ClassicalChannel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
    }

    pub(crate) fn pure_zero_plus() -> CQChannel {
        let h = 0.5;
        let zero = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let plus = CMatrix::from_element(2, 2, Complex64::new(h, 0.0));
        CQChannel::new(vec![
            DensityOperator::from_matrix(zero).unwrap(),
            DensityOperator::from_matrix(plus).unwrap(),
        ])
        .unwrap()
    }

    fn random_channel(seed: u64, n: usize, d: usize) -> (CQChannel, ProbabilityDistribution) {
        let mut rng = rng_from_seed(seed);
        let states = (0..n)
            .map(|_| {
                let rank = rng.random_range(1..=d);
                random_density(&mut rng, d, rank, 1e4)
            })
            .collect();
        let p = ProbabilityDistribution::normalized(random_simplex(&mut rng, n)).unwrap();
        (CQChannel::from_states(states).unwrap(), p)
    }

    #[test]
    fn distribution_validation() {
        assert!(ProbabilityDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbabilityDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(ProbabilityDistribution::new(vec![]).is_err());
        let p: ProbabilityDistribution = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(p.weights(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<ProbabilityDistribution>("[0.25, 0.7]").is_err());
    }

    #[test]
    fn channel_validation() {
        assert!(ClassicalChannel::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(ClassicalChannel::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(ClassicalChannel::new(vec![]).is_err());
        let half = PsdMatrix::from_real_diagonal(&[0.5, 0.25]).unwrap();
        assert!(DensityOperator::new(half).is_err());
        let a = DensityOperator::new(PsdMatrix::from_real_diagonal(&[1.0]).unwrap()).unwrap();
        let b = DensityOperator::new(PsdMatrix::from_real_diagonal(&[0.5, 0.5]).unwrap()).unwrap();
        assert!(CQChannel::new(vec![a, b]).is_err());
        assert!(CQChannel::new(vec![]).is_err());
    }

    #[test]
    fn e0_at_zero_vanishes() {
        let (w, p) = random_channel(1, 3, 3);
        assert_eq!(e0_quantum(&w, &p, 0.0).unwrap(), 0.0);
        // just above zero the honest evaluation is also ~0
        assert!(e0_quantum(&w, &p, 1e-12).unwrap().abs() < 1e-12);
        assert_eq!(
            e0_classical(
                &bsc(0.1),
                &ProbabilityDistribution::uniform(2).unwrap(),
                0.0
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn e0_rejects_bad_arguments() {
        let (w, p) = random_channel(2, 2, 2);
        assert!(e0_quantum(&w, &p, -0.1).is_err());
        assert!(e0_quantum(&w, &ProbabilityDistribution::uniform(3).unwrap(), 1.0).is_err());
        assert!(f_map(&w, &p, 0.5).is_err());
        assert!(e0_derivatives(&w, &p, 0.5, 0.6).is_err());
        assert!(e0_derivatives(&w, &p, 0.5, 0.0).is_err());
    }

    #[test]
    fn noiseless_closed_form() {
        let q = noiseless();
        let p = ProbabilityDistribution::uniform(2).unwrap();
        assert!((e0_classical(&q, &p, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let w = embed_classical(&q);
        for s in [0.25, 1.0, 3.5, 8.0] {
            assert!((e0_quantum(&w, &p, s).unwrap() - s).abs() < 1e-12);
            assert!((f_map(&w, &p, 1.0 + s).unwrap() + s).abs() < 1e-12);
        }
        let (d1, d2) = e0_derivatives(&w, &p, 1.0, DEFAULT_DERIVATIVE_STEP).unwrap();
        assert!((d1 - 1.0).abs() < 1e-6 && d2.abs() < 1e-6);
    }

    #[test]
    fn useless_channel_is_zero() {
        let q = useless();
        let w = embed_classical(&q);
        let mut rng = rng_from_seed(4);
        for _ in 0..10 {
            let p = ProbabilityDistribution::normalized(random_simplex(&mut rng, 3)).unwrap();
            let s = rng.random::<f64>() * 5.0;
            assert!(e0_classical(&q, &p, s).unwrap().abs() < 1e-14);
            assert!(e0_quantum(&w, &p, s).unwrap().abs() < 1e-14);
        }
        let p = ProbabilityDistribution::uniform(3).unwrap();
        let (d1, d2) = e0_derivatives(&w, &p, 1.0, DEFAULT_DERIVATIVE_STEP).unwrap();
        assert!(d1.abs() < 1e-6 && d2.abs() < 1e-6);
    }

    #[test]
    fn embedding_examples() {
        let w = embed_classical(&noiseless());
        assert_eq!(
            w.outputs()[0].as_psd().as_hermitian(),
            &HermitianMatrix::from_real_diagonal(&[1.0, 0.0])
        );
        assert_eq!(
            w.outputs()[1].as_psd().as_hermitian(),
            &HermitianMatrix::from_real_diagonal(&[0.0, 1.0])
        );
        let u = ClassicalChannel::new(vec![vec![0.25; 4]; 3]).unwrap();
        for o in embed_classical(&u).outputs() {
            assert_eq!(
                o.as_psd().as_hermitian(),
                &HermitianMatrix::identity(4).scale(0.25)
            );
        }
    }

    #[test]
    fn bsc_reduction_at_random_points() {
        let q = bsc(0.1);
        let w = embed_classical(&q);
        let mut rng = rng_from_seed(stream_seed(0, "bsc", 0));
        for _ in 0..20 {
            let p = ProbabilityDistribution::normalized(random_simplex(&mut rng, 2)).unwrap();
            let s = rng.random::<f64>() * 8.0;
            let a = e0_quantum(&w, &p, s).unwrap();
            let b = e0_classical(&q, &p, s).unwrap();
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn pure_state_channel_matches_closed_form() {
        // ½(|0⟩⟨0| + |+⟩⟨+|) has eigenvalues ½(1 ± 1/√2); pure states are
        // idempotent under fractional powers, so at s = 1 the mixture is that
        // matrix and E₀ = −log₂ Σ μ².
        let w = pure_zero_plus();
        let p = ProbabilityDistribution::uniform(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mu = [0.5 * (1.0 + r), 0.5 * (1.0 - r)];
        let expected = -(mu[0] * mu[0] + mu[1] * mu[1]).log2();
        assert!((expected - 0.415_037_499_278_843_8).abs() < 1e-12);
        let got = e0_quantum(&w, &p, 1.0).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn f_map_identity_on_random_points() {
        let mut rng = rng_from_seed(17);
        for i in 0..30 {
            let (w, p) = random_channel(stream_seed(5, "fmap", i), 3, 3);
            let s = rng.random::<f64>() * 6.0;
            let f = f_map(&w, &p, 1.0 + s).unwrap();
            let e = e0_quantum(&w, &p, s).unwrap();
            assert!((f + e).abs() <= 1e-12);
        }
        let (w, p) = random_channel(9, 2, 2);
        assert_eq!(f_map(&w, &p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn derivatives_agree_with_richardson() {
        for i in 0..20 {
            let (w, p) = random_channel(stream_seed(8, "deriv", i), 3, 3);
            let s = 0.1 + 2.9 * (i as f64 / 19.0);
            let (d1, d2) = e0_derivatives(&w, &p, s, DEFAULT_DERIVATIVE_STEP).unwrap();
            // Richardson on a coarser pair of steps removes the O(h²) term
            let h = 1e-2;
            let (a1, a2) = e0_derivatives(&w, &p, s, h).unwrap();
            let (b1, b2) = e0_derivatives(&w, &p, s, h / 2.0).unwrap();
            let r1 = (4.0 * b1 - a1) / 3.0;
            let r2 = (4.0 * b2 - a2) / 3.0;
            assert!((d1 - r1).abs() < 1e-6, "d1 {d1} vs {r1}");
            assert!((d2 - r2).abs() < 1e-4, "d2 {d2} vs {r2}");
            assert!(d1 >= -1e-6 && d2 <= 1e-6);
        }
    }

    #[test]
    fn forward_derivatives_near_zero() {
        let w = embed_classical(&noiseless());
        let p = ProbabilityDistribution::uniform(2).unwrap();
        let (d1, d2) = e0_derivatives_forward(&w, &p, 0.0, DEFAULT_DERIVATIVE_STEP).unwrap();
        assert!((d1 - 1.0).abs() < 1e-6 && d2.abs() < 1e-4);
    }
}
