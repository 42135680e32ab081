//! Weak majorization and weak log-majorization of real vectors.

use crate::error::{Error, Result};
use crate::matops::{eigh, HermitianMatrix, INEQUALITY_SLACK};

/// Certificate for `x ≺_w y` (or `x ≺_log y`).
#[derive(Clone, Debug, PartialEq)]
pub struct MajorizationVerdict {
    pub holds: bool,
    /// `Σ_{j≤k} y↓_j − Σ_{j≤k} x↓_j` for `k = 1..=d` (log scale for log-majorization).
    pub prefix_margins: Vec<f64>,
    /// Minimum of `prefix_margins`, `+∞` for empty input.
    pub worst_margin: f64,
    /// `max(1, largest |prefix sum|)`; the slack is relative to this.
    pub scale: f64,
}

impl MajorizationVerdict {
    /// Worst margin divided by [`scale`](Self::scale).
    pub fn relative_margin(&self) -> f64 {
        self.worst_margin / self.scale
    }
}

pub fn decreasing_rearrangement(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn prefix_sums(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

fn verdict_from_prefixes(lhs: &[f64], rhs: &[f64], rel_slack: f64) -> MajorizationVerdict {
    let scale = lhs
        .iter()
        .chain(rhs)
        .filter(|v| v.is_finite())
        .fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let prefix_margins: Vec<f64> = lhs
        .iter()
        .zip(rhs)
        .map(|(&l, &r)| {
            if l == f64::NEG_INFINITY && r == f64::NEG_INFINITY {
                // both prefix products vanish
                0.0
            } else {
                r - l
            }
        })
        .collect();
    let worst_margin = prefix_margins.iter().copied().fold(f64::INFINITY, f64::min);
    MajorizationVerdict {
        holds: worst_margin >= -rel_slack * scale,
        prefix_margins,
        worst_margin,
        scale,
    }
}

fn same_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::input(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::input("NaN entry"));
    }
    Ok(())
}

/// `x ≺_w y` with the default relative slack.
pub fn weak_majorizes(x: &[f64], y: &[f64]) -> Result<MajorizationVerdict> {
    weak_majorizes_with_slack(x, y, INEQUALITY_SLACK)
}

pub fn weak_majorizes_with_slack(
    x: &[f64],
    y: &[f64],
    rel_slack: f64,
) -> Result<MajorizationVerdict> {
    same_len(x, y)?;
    let lhs = prefix_sums(&decreasing_rearrangement(x));
    let rhs = prefix_sums(&decreasing_rearrangement(y));
    Ok(verdict_from_prefixes(&lhs, &rhs, rel_slack))
}

/// `x ≺_log y`, i.e. `log x ≺_w log y`.
///
/// Zeros are admitted as `log 0 = −∞`: on the left they can only help, on
/// the right they fail every prefix whose left-hand product is positive.
/// Negative entries are a domain error.
pub fn log_majorizes(x: &[f64], y: &[f64]) -> Result<MajorizationVerdict> {
    log_majorizes_with_slack(x, y, INEQUALITY_SLACK)
}

pub fn log_majorizes_with_slack(
    x: &[f64],
    y: &[f64],
    rel_slack: f64,
) -> Result<MajorizationVerdict> {
    same_len(x, y)?;
    if let Some(v) = x.iter().chain(y).find(|&&v| v < 0.0) {
        return Err(Error::Domain(format!(
            "log-majorization needs non-negative entries, got {v}"
        )));
    }
    let logs = |v: &[f64]| -> Vec<f64> {
        decreasing_rearrangement(v)
            .iter()
            .map(|&t| t.ln())
            .collect()
    };
    let lhs = prefix_sums(&logs(x));
    let rhs = prefix_sums(&logs(y));
    Ok(verdict_from_prefixes(&lhs, &rhs, rel_slack))
}

/// Eigenvalues in decreasing order, `λ(A) = x↓`.
pub fn eigenvalue_vector(a: &HermitianMatrix) -> Vec<f64> {
    eigh(a).eigenvalues
}
