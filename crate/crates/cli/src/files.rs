//! JSON channel and matrix files.
//!
//! Channel file:
//!
//! ```json
//! { "dim": 2,
//!   "states": [ [[1, 0], [0, 0], [0, 0], [0, 0]], ... ],
//!   "dist": [0.5, 0.5] }
//! ```
//!
//! Each state is a row-major list of `[re, im]` pairs. Instead of `states`, a
//! file may give `"classical": { "rows": [[...], ...] }`, a row-stochastic
//! matrix that is embedded as diagonal states. Matrix files use the same
//! encoding: `{ "dim": d, "matrix": [[re, im], ...] }`.

use cqexp_core::channel::{
    embed_classical, CQChannel, ClassicalChannel, DensityOperator, ProbabilityDistribution,
};
use cqexp_core::matops::{CMatrix, HermitianMatrix, PsdMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalRows {
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classical: Option<ClassicalRows>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    dim: usize,
    matrix: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<f64>>,
}

/// A parsed channel file.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub channel: CQChannel,
    pub dist: Option<ProbabilityDistribution>,
}

fn invalid(source: &str, field: impl std::fmt::Display, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{source}: field `{field}`: {msg}"))
}

fn parse_json<'a, T: Deserialize<'a>>(source: &str, text: &'a str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!(
            "{source}: line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn pairs_to_matrix(
    source: &str,
    field: &str,
    dim: usize,
    pairs: &[[f64; 2]],
) -> Result<CMatrix, CliError> {
    if pairs.len() != dim * dim {
        return Err(invalid(
            source,
            field,
            format!(
                "expected {} entries for dim {dim}, found {}",
                dim * dim,
                pairs.len()
            ),
        ));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = pairs[i * dim + j];
        Complex64::new(re, im)
    }))
}

fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

/// Parses a channel file; `source` names the file in diagnostics.
pub fn parse_channel(source: &str, text: &str) -> Result<ChannelSpec, CliError> {
    let file: ChannelFile = parse_json(source, text)?;
    let channel = match (&file.states, &file.classical) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                source,
                "classical",
                "give either `states` or `classical`, not both",
            ))
        }
        (None, None) => return Err(invalid(source, "states", "missing (or give `classical`)")),
        (None, Some(c)) => {
            let q = ClassicalChannel::new(c.rows.clone())
                .map_err(|e| invalid(source, "classical.rows", e))?;
            if let Some(d) = file.dim {
                if d != q.output_size() {
                    return Err(invalid(
                        source,
                        "dim",
                        format!("{d} does not match {} output symbols", q.output_size()),
                    ));
                }
            }
            embed_classical(&q)
        }
        (Some(states), None) => {
            let dim = file.dim.ok_or_else(|| invalid(source, "dim", "missing"))?;
            if dim == 0 {
                return Err(invalid(source, "dim", "must be at least 1"));
            }
            let outputs = states
                .iter()
                .enumerate()
                .map(|(x, pairs)| {
                    let field = format!("states[{x}]");
                    let m = pairs_to_matrix(source, &field, dim, pairs)?;
                    DensityOperator::from_matrix(m).map_err(|e| invalid(source, &field, e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            CQChannel::new(outputs).map_err(|e| invalid(source, "states", e))?
        }
    };
    let dist = match file.dist {
        None => None,
        Some(w) => {
            let p = ProbabilityDistribution::new(w).map_err(|e| invalid(source, "dist", e))?;
            if p.len() != channel.alphabet_size() {
                return Err(invalid(
                    source,
                    "dist",
                    format!("{} weights for {} inputs", p.len(), channel.alphabet_size()),
                ));
            }
            Some(p)
        }
    };
    Ok(ChannelSpec { channel, dist })
}

/// Canonical form of a channel: always the explicit `states` encoding.
pub fn write_channel(spec: &ChannelSpec) -> String {
    let file = ChannelFile {
        dim: Some(spec.channel.dim()),
        states: Some(
            spec.channel
                .outputs()
                .iter()
                .map(|o| matrix_to_pairs(o.as_psd().as_matrix()))
                .collect(),
        ),
        dist: spec.dist.as_ref().map(|p| p.weights().to_vec()),
        classical: None,
    };
    serde_json::to_string_pretty(&file).expect("channel serializes") + "\n"
}

pub fn parse_matrix(source: &str, text: &str) -> Result<PsdMatrix, CliError> {
    let file: MatrixFile = parse_json(source, text)?;
    if file.dim == 0 {
        return Err(invalid(source, "dim", "must be at least 1"));
    }
    let m = pairs_to_matrix(source, "matrix", file.dim, &file.matrix)?;
    let h = HermitianMatrix::new(m).map_err(|e| invalid(source, "matrix", e))?;
    PsdMatrix::new(h).map_err(|e| invalid(source, "matrix", e))
}

/// Matrix file for `m`, with its eigenvalues when `with_eigenvalues` is set.
pub fn write_matrix(m: &HermitianMatrix, eigenvalues: Option<&[f64]>) -> String {
    let file = MatrixFile {
        dim: m.dim(),
        matrix: matrix_to_pairs(m.as_matrix()),
        eigenvalues: eigenvalues.map(<[f64]>::to_vec),
    };
    serde_json::to_string_pretty(&file).expect("matrix serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOISELESS: &str = r#"{
        "dim": 2,
        "states": [
            [[1, 0], [0, 0], [0, 0], [0, 0]],
            [[0, 0], [0, 0], [0, 0], [1, 0]]
        ]
    }"#;

    #[test]
    fn parses_explicit_states() {
        let spec = parse_channel("noiseless.json", NOISELESS).unwrap();
        assert_eq!(spec.channel.alphabet_size(), 2);
        assert_eq!(spec.channel.dim(), 2);
        assert!(spec.dist.is_none());
    }

    #[test]
    fn classical_form_matches_explicit_states() {
        let text = r#"{ "classical": { "rows": [[1, 0], [0, 1]] }, "dist": [0.25, 0.75] }"#;
        let spec = parse_channel("c.json", text).unwrap();
        assert_eq!(
            spec.channel,
            parse_channel("n.json", NOISELESS).unwrap().channel
        );
        assert_eq!(spec.dist.unwrap().weights(), &[0.25, 0.75]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err =
            parse_channel("bad.json", "{\n  \"dim\": 2,\n  \"states\": [ oops ]\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.json: line 3, column"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let text = r#"{ "dim": 2, "states": [[[2, 0], [0, 0], [0, 0], [0, 0]]] }"#;
        let msg = parse_channel("t.json", text).unwrap_err().to_string();
        assert!(msg.contains("states[0]"), "{msg}");
        let text = r#"{ "dim": 2, "states": [[[1, 0], [0, 0], [0, 0]]] }"#;
        let msg = parse_channel("t.json", text).unwrap_err().to_string();
        assert!(msg.contains("expected 4 entries"), "{msg}");
        let msg = parse_channel("t.json", r#"{ "dim": 2 }"#)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("states"), "{msg}");
        let text = r#"{ "classical": { "rows": [[1, 0]] }, "dist": [0.5, 0.5] }"#;
        let msg = parse_channel("t.json", text).unwrap_err().to_string();
        assert!(msg.contains("`dist`"), "{msg}");
        let msg = parse_channel("t.json", r#"{ "dim": 1, "states": [], "extra": 1 }"#)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("extra"), "{msg}");
    }

    #[test]
    fn matrix_files() {
        let m = parse_matrix("a.json", r#"{ "dim": 1, "matrix": [[4, 0]] }"#).unwrap();
        assert_eq!(m.trace(), 4.0);
        let msg = parse_matrix(
            "a.json",
            r#"{ "dim": 2, "matrix": [[1, 0], [2, 0], [2, 0], [1, 0]] }"#,
        )
        .unwrap_err()
        .to_string();
        assert!(msg.contains("matrix"), "{msg}");
        let back = parse_matrix("w", &write_matrix(m.as_hermitian(), None)).unwrap();
        assert_eq!(back, m);
    }
}
