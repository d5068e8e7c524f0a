//! JSON channel files.
//!
//! ```json
//! { "kind": "unitary", "dims": [2, 2],
//!   "matrix": [[[1, 0], [0, 0], ...], ...] }
//! { "kind": "kraus", "dims": [2, 2], "operators": [ <matrix>, ... ] }
//! ```
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Channel, ChannelKind};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Unitary,
    Kraus,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    kind: Kind,
    dims: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    operators: Option<Vec<JsonMatrix>>,
}

/// A channel together with its declared local dimensions (d_A, d_B).
#[derive(Debug, Clone)]
pub struct ChannelFile {
    pub channel: Channel,
    pub dims: (usize, usize),
}

fn to_matrix(m: &JsonMatrix) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<Complex64>> = m
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))
}

fn from_matrix(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Parses a channel file. Malformed JSON or matrices yield [`Error::Parse`];
/// declared dims that disagree with the matrix size yield
/// [`Error::DimensionMismatch`]; CPT failures yield [`Error::NotUnitary`] or
/// [`Error::NotTracePreserving`].
pub fn parse_channel_file(text: &str) -> Result<ChannelFile> {
    let raw: RawChannel = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let [d_a, d_b] = raw.dims;
    if d_a == 0 || d_b == 0 {
        return Err(Error::Parse(format!(
            "dims must be positive, got {:?}",
            raw.dims
        )));
    }
    let ops = match (&raw.kind, &raw.matrix, &raw.operators) {
        (Kind::Unitary, Some(m), None) => vec![to_matrix(m)?],
        (Kind::Kraus, None, Some(list)) if !list.is_empty() => {
            list.iter().map(to_matrix).collect::<Result<Vec<_>>>()?
        }
        (Kind::Unitary, _, _) => {
            return Err(Error::Parse(
                "unitary channel needs a `matrix` field and no `operators`".into(),
            ))
        }
        (Kind::Kraus, _, _) => {
            return Err(Error::Parse(
                "Kraus channel needs a non-empty `operators` field and no `matrix`".into(),
            ))
        }
    };
    let d_s = d_a * d_b;
    for m in &ops {
        if m.dim() != (d_s, d_s) {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} require {d_s}x{d_s} matrices, found {}x{}",
                raw.dims,
                m.rows(),
                m.cols()
            )));
        }
    }
    let channel = match raw.kind {
        Kind::Unitary => Channel::unitary(ops.into_iter().next().expect("one matrix"))?,
        Kind::Kraus => Channel::kraus(ops)?,
    };
    Ok(ChannelFile {
        channel,
        dims: (d_a, d_b),
    })
}

impl ChannelFile {
    pub fn to_json(&self) -> String {
        let raw = match self.channel.kind() {
            ChannelKind::Unitary(u) => RawChannel {
                kind: Kind::Unitary,
                dims: [self.dims.0, self.dims.1],
                matrix: Some(from_matrix(u)),
                operators: None,
            },
            ChannelKind::Kraus(ops) => RawChannel {
                kind: Kind::Kraus,
                dims: [self.dims.0, self.dims.1],
                matrix: None,
                operators: Some(ops.iter().map(from_matrix).collect()),
            },
        };
        serde_json::to_string_pretty(&raw).expect("channel serialises")
    }
}
