//! Weighted geometric mean of positive operators.
//!
//! For positive definite `A` and PSD `B`,
//!
//! ```text
//! A #_s B = A^{1/2} (A^{-1/2} B A^{-1/2})^s A^{1/2}
//! ```
//!
//! [`weighted_geomean`] evaluates that formula and refuses a singular `A`.
//! Singular pairs go through [`weighted_geomean_limit`], which defines the
//! mean as `lim_{ε↘0} (A + εI) #_s (B + εI)`. The limit is taken in closed
//! form whenever the structure allows it (one argument invertible, commuting
//! arguments, or arguments with a common support) and along the configured
//! ε-schedule otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{eigh, matrix_power, CMatrix, HermitianMatrix, PsdMatrix};

/// ε-regularization settings for [`weighted_geomean_limit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeomeanConfig {
    /// Strictly decreasing positive shifts.
    pub eps_schedule: Vec<f64>,
    /// Cauchy tolerance on consecutive iterates, relative Frobenius norm.
    pub convergence_tol: f64,
}

impl Default for GeomeanConfig {
    fn default() -> Self {
        Self {
            eps_schedule: vec![1e-4, 1e-6, 1e-8],
            convergence_tol: 1e-7,
        }
    }
}

impl GeomeanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eps_schedule.is_empty() {
            return Err(Error::input("empty ε schedule"));
        }
        if self
            .eps_schedule
            .iter()
            .any(|&e| !(e > 0.0) || !e.is_finite())
        {
            return Err(Error::input(
                "ε schedule entries must be positive and finite",
            ));
        }
        if self.eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::input("ε schedule must be strictly decreasing"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::input("convergence tolerance must be positive"));
        }
        Ok(())
    }
}

fn check_dims(a: &PsdMatrix, b: &PsdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Accepts `h` as PSD, clamping negative eigenvalues that are within the
/// rounding error of a product of operators of norm `operand_scale`.
fn to_psd(h: HermitianMatrix, tol: f64, operand_scale: f64) -> Result<PsdMatrix> {
    let es = eigh(&h);
    let lowest = *es.eigenvalues.last().expect("non-empty matrix");
    let rounding = 16.0 * h.dim() as f64 * f64::EPSILON * operand_scale;
    let h = if lowest < 0.0 && lowest >= -rounding {
        es.map(|x| x.max(0.0))
    } else {
        h
    };
    PsdMatrix::with_tol(h, tol)
        .map_err(|e| Error::Numerical(format!("geometric mean lost positivity: {e}")))
}

/// `A #_s B` by the defining formula.
///
/// `A` must be positive definite. For `s ∉ [0, 1]` `B` must be positive
/// definite as well.
pub fn weighted_geomean(a: &PsdMatrix, b: &PsdMatrix, s: f64) -> Result<PsdMatrix> {
    check_dims(a, b)?;
    if !s.is_finite() {
        return Err(Error::input(format!("non-finite weight {s}")));
    }
    if !a.is_positive_definite() {
        return Err(Error::Singular(
            "first argument of A #_s B is singular; use the ε-limit".into(),
        ));
    }
    if !(0.0..=1.0).contains(&s) && !b.is_positive_definite() {
        return Err(Error::Singular(format!(
            "second argument is singular and s = {s} lies outside [0, 1]"
        )));
    }
    if s == 0.0 {
        return Ok(a.clone());
    }
    if s == 1.0 {
        return Ok(b.clone());
    }
    // Work in the eigenbasis of A, where A^{±1/2} are diagonal scalings; this
    // keeps the relative accuracy of small eigenvalues for graded inputs.
    let es = a.eigen();
    let u = &es.basis;
    let root: Vec<f64> = es.eigenvalues.iter().map(|x| x.sqrt()).collect();
    let b_rot = u.adjoint() * b.as_matrix() * u;
    let inner = CMatrix::from_fn(a.dim(), a.dim(), |i, j| b_rot[(i, j)] / (root[i] * root[j]));
    let inner = HermitianMatrix::hermitize(inner);
    // an eigenvalue of the inner operator is zero only if it comes from the
    // kernel of B, i.e. lies below B's zero threshold scaled by 1/λ_max(A)
    let inner_max = inner.spectral_norm().max(1.0);
    let inner_tol = (b.zero_threshold() / (a.max_eigenvalue() * inner_max)).min(a.psd_tol());
    let inner = to_psd(inner, inner_tol, b.max_eigenvalue() / a.min_eigenvalue())?;
    let inner_s = matrix_power(&inner, s)?;
    let scaled = CMatrix::from_fn(a.dim(), a.dim(), |i, j| {
        inner_s.as_matrix()[(i, j)] * (root[i] * root[j])
    });
    let outer_scale = a.max_eigenvalue() * inner.max_eigenvalue().max(0.0).powf(s);
    to_psd(
        HermitianMatrix::hermitize(u * scaled * u.adjoint()),
        a.psd_tol(),
        outer_scale,
    )
}

/// `a^{1−s} b^s` with the limit conventions for zero arguments.
fn scalar_mean(a: f64, b: f64, s: f64) -> f64 {
    if s == 0.0 {
        a
    } else if s == 1.0 {
        b
    } else if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a.powf(1.0 - s) * b.powf(s)
    }
}

/// Mean of commuting PSD operators through a common eigenbasis.
/// Returns `None` when no common basis is found.
fn commuting_geomean(a: &PsdMatrix, b: &PsdMatrix, s: f64) -> Option<HermitianMatrix> {
    let na = a.as_hermitian().frobenius_norm();
    let nb = b.as_hermitian().frobenius_norm();
    if na == 0.0 || nb == 0.0 {
        return Some(if s == 0.0 {
            a.as_hermitian().clone()
        } else if s == 1.0 {
            b.as_hermitian().clone()
        } else {
            HermitianMatrix::zeros(a.dim())
        });
    }
    // a generic combination separates joint eigenspaces
    const MIX: f64 = 0.739_085_133_215_160_6;
    let combo = a.as_hermitian() + &(b.as_hermitian() * (MIX * na / nb));
    let u = eigh(&combo).basis;
    let diag_of = |m: &CMatrix| -> Vec<f64> {
        let t = u.adjoint() * m * &u;
        (0..t.nrows()).map(|i| t[(i, i)].re).collect()
    };
    let da = diag_of(a.as_matrix());
    let db = diag_of(b.as_matrix());
    let rebuild = |v: &[f64]| {
        crate::matops::EigenSystem {
            eigenvalues: v.to_vec(),
            basis: u.clone(),
        }
        .reconstruct()
    };
    let fits = |v: &[f64], m: &PsdMatrix| {
        let err = (rebuild(v).as_matrix() - m.as_matrix())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        err <= 1e-10 * m.as_hermitian().frobenius_norm().max(1.0)
    };
    if !fits(&da, a) || !fits(&db, b) {
        return None;
    }
    let ta = a.zero_threshold();
    let tb = b.zero_threshold();
    let values: Vec<f64> = da
        .iter()
        .zip(&db)
        .map(|(&x, &y)| {
            let x = if x <= ta { 0.0 } else { x };
            let y = if y <= tb { 0.0 } else { y };
            scalar_mean(x, y, s)
        })
        .collect();
    Some(rebuild(&values))
}

/// Mean of two operators that share the same support, computed on that support.
fn common_support_geomean(a: &PsdMatrix, b: &PsdMatrix, s: f64) -> Result<Option<HermitianMatrix>> {
    let ra = a.rank();
    if ra != b.rank() {
        return Ok(None);
    }
    let va = a.support_basis();
    let vb = b.support_basis();
    let pa = &va * va.adjoint();
    let pb = &vb * vb.adjoint();
    let gap = (pa - pb).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if gap > 1e-9 {
        return Ok(None);
    }
    if ra == 0 {
        return Ok(Some(HermitianMatrix::zeros(a.dim())));
    }
    let compress = |m: &PsdMatrix| -> Result<PsdMatrix> {
        to_psd(
            HermitianMatrix::hermitize(va.adjoint() * m.as_matrix() * &va),
            m.psd_tol(),
            m.max_eigenvalue(),
        )
    };
    let ca = compress(a)?;
    let cb = compress(b)?;
    if !ca.is_positive_definite() || !cb.is_positive_definite() {
        return Ok(None);
    }
    let inner = weighted_geomean(&ca, &cb, s)?;
    Ok(Some(HermitianMatrix::hermitize(
        &va * inner.as_matrix() * va.adjoint(),
    )))
}

/// `lim_{ε↘0} (A + εI) #_s (B + εI)` for PSD `A`, `B` and `s ∈ [0, 1]`.
///
/// Agrees with [`weighted_geomean`] when `A` is positive definite. Falls back
/// to the ε-schedule in `cfg` when no closed form applies; the schedule stops
/// once two consecutive iterates differ by less than `cfg.convergence_tol`
/// relative to `max(‖X_ε‖_F, ‖A‖_F^{1−s} ‖B‖_F^s)`.
pub fn weighted_geomean_limit(
    a: &PsdMatrix,
    b: &PsdMatrix,
    s: f64,
    cfg: &GeomeanConfig,
) -> Result<PsdMatrix> {
    check_dims(a, b)?;
    cfg.validate()?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::input(format!("weight {s} outside [0, 1]")));
    }
    if a.is_positive_definite() {
        return weighted_geomean(a, b, s);
    }
    if b.is_positive_definite() {
        return weighted_geomean(b, a, 1.0 - s);
    }
    let operand_scale = a.max_eigenvalue().max(b.max_eigenvalue());
    if let Some(m) = commuting_geomean(a, b, s) {
        return to_psd(m, a.psd_tol(), operand_scale);
    }
    if let Some(m) = common_support_geomean(a, b, s)? {
        return to_psd(m, a.psd_tol(), operand_scale);
    }

    let scale_hint =
        a.as_hermitian().frobenius_norm().powf(1.0 - s) * b.as_hermitian().frobenius_norm().powf(s);
    let mut previous: Option<HermitianMatrix> = None;
    let mut residual = f64::INFINITY;
    for &eps in &cfg.eps_schedule {
        let current =
            weighted_geomean(&a.add_identity(eps)?, &b.add_identity(eps)?, s)?.into_hermitian();
        if let Some(prev) = previous.take() {
            let diff = (&current - &prev).frobenius_norm();
            let scale = current
                .frobenius_norm()
                .max(scale_hint)
                .max(f64::MIN_POSITIVE);
            residual = diff / scale;
            if residual < cfg.convergence_tol {
                let scale = current.spectral_norm();
                return to_psd(current, a.psd_tol(), scale);
            }
            if eps == *cfg.eps_schedule.last().unwrap() {
                return Err(Error::NonConvergence {
                    residual,
                    tolerance: cfg.convergence_tol,
                    previous: Box::new(prev),
                    last: Box::new(current),
                });
            }
        }
        previous = Some(current);
    }
    // single-entry schedule: nothing to compare against
    let last = previous.expect("schedule is non-empty");
    Err(Error::NonConvergence {
        residual,
        tolerance: cfg.convergence_tol,
        previous: Box::new(last.clone()),
        last: Box::new(last),
    })
}
