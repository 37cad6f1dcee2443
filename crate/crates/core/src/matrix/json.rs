//! `{"dim": n, "entries": [[[re, im], ...], ...]}`, row-major.

use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Wire form of a [`ComplexMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m
                .rows()
                .into_iter()
                .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.dim == 0 {
            return Err(Error::Schema("dim must be positive".into()));
        }
        if j.entries.len() != j.dim {
            return Err(Error::Schema(format!(
                "expected {} rows, found {}",
                j.dim,
                j.entries.len()
            )));
        }
        let mut flat = Vec::with_capacity(j.dim * j.dim);
        for (r, row) in j.entries.iter().enumerate() {
            if row.len() != j.dim {
                return Err(Error::Schema(format!(
                    "row {r} has length {}, expected {}",
                    row.len(),
                    j.dim
                )));
            }
            for &[re, im] in row {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Schema(format!("row {r} has a non-finite entry")));
                }
                flat.push(C64::new(re, im));
            }
        }
        ComplexMatrix::from_row_slice(j.dim, &flat)
    }
}

impl ComplexMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MatrixJson::from(self)).expect("matrix JSON is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: MatrixJson = serde_json::from_str(text)?;
        Self::try_from(j)
    }
}
