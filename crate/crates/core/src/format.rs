//! JSON instance files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "dims": {"l": 2, "m": 3, "n": 3},
//!   "sparsity": {"s": 2, "t": 2},
//!   "tensor": {"coo": [[1, 1, 1, 1.0], [2, 3, 1, 1.0]]},
//!   "b": [5.0, 0.0],
//!   "known_point": [1.0, 1.0, 0.0, 1.0, 1.0, 0.0],
//!   "label": "example"
//! }
//! ```
//!
//! The tensor is either `{"dense": [...]}` in row-major order or
//! `{"coo": [[i, j, k, v], ...]}` with 1-based indices. Unknown fields are
//! rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{Instance, Point, Tensor3};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub l: usize,
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sparsity {
    pub s: usize,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TensorData {
    Dense(Vec<f64>),
    Coo(Vec<(usize, usize, usize, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub dims: Dims,
    pub sparsity: Sparsity,
    pub tensor: TensorData,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("unknown field `{field}`: {message}")]
    UnknownField { field: String, message: String },
    #[error("unsupported schema_version {0}, expected {SCHEMA_VERSION}")]
    SchemaVersion(u32),
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("COO entry {entry}: index {axis} = {index} out of range 1..={bound}")]
    IndexOutOfRange {
        entry: usize,
        axis: char,
        index: usize,
        bound: usize,
    },
    #[error("duplicate COO entry ({i}, {j}, {k})")]
    DuplicateEntry { i: usize, j: usize, k: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

/// A parsed file: the instance plus the optional extras.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInstance {
    pub instance: Instance,
    pub known_point: Option<Point>,
    pub label: Option<String>,
}

fn classify_json_error(e: serde_json::Error) -> FormatError {
    let message = e.to_string();
    if let Some(rest) = message.strip_prefix("unknown field `") {
        if let Some(end) = rest.find('`') {
            return FormatError::UnknownField {
                field: rest[..end].to_string(),
                message,
            };
        }
    }
    FormatError::Json(message)
}

fn dim_check(what: &'static str, expected: usize, got: usize) -> Result<(), FormatError> {
    if expected == got {
        Ok(())
    } else {
        Err(FormatError::DimensionMismatch { what, expected, got })
    }
}

fn finite(what: &'static str, v: &[f64]) -> Result<(), FormatError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(FormatError::NonFinite(what))
    }
}

impl InstanceFile {
    pub fn into_parsed(self) -> Result<ParsedInstance, FormatError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FormatError::SchemaVersion(self.schema_version));
        }
        let Dims { l, m, n } = self.dims;
        let tensor = match self.tensor {
            TensorData::Dense(data) => {
                dim_check("dense tensor", l * m * n, data.len())?;
                finite("tensor", &data)?;
                Tensor3::from_dense(l, m, n, data).map_err(|e| FormatError::Invalid(e.to_string()))?
            }
            TensorData::Coo(entries) => {
                let mut t = Tensor3::zeros(l, m, n);
                let mut seen = std::collections::HashSet::new();
                for (entry, &(i, j, k, v)) in entries.iter().enumerate() {
                    for (axis, index, bound) in [('i', i, l), ('j', j, m), ('k', k, n)] {
                        if index == 0 || index > bound {
                            return Err(FormatError::IndexOutOfRange {
                                entry: entry + 1,
                                axis,
                                index,
                                bound,
                            });
                        }
                    }
                    if !seen.insert((i, j, k)) {
                        return Err(FormatError::DuplicateEntry { i, j, k });
                    }
                    if !v.is_finite() {
                        return Err(FormatError::NonFinite("tensor"));
                    }
                    t.set(i - 1, j - 1, k - 1, v);
                }
                t
            }
        };
        dim_check("b", l, self.b.len())?;
        finite("b", &self.b)?;
        let known_point = match self.known_point {
            Some(z) => {
                dim_check("known_point", m + n, z.len())?;
                finite("known_point", &z)?;
                Some(Point::from_concat(z, m).expect("length checked"))
            }
            None => None,
        };
        let instance = Instance::new(tensor, self.b, self.sparsity.s, self.sparsity.t)
            .map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(ParsedInstance {
            instance,
            known_point,
            label: self.label,
        })
    }

    /// Dense storage when most entries are nonzero, COO otherwise.
    ///
    /// COO keeps every entry whose bit pattern differs from `+0.0`, so `-0.0`
    /// survives a round trip.
    pub fn from_instance(inst: &Instance, known_point: Option<&Point>, label: Option<&str>) -> Self {
        let (l, m, n) = inst.dims();
        let stored = inst.tensor.stored_len();
        let tensor = if 4 * stored < l * m * n {
            let mut entries = Vec::with_capacity(stored);
            for i in 0..l {
                for j in 0..m {
                    for k in 0..n {
                        let v = inst.tensor.get(i, j, k);
                        if v.to_bits() != 0 {
                            entries.push((i + 1, j + 1, k + 1, v));
                        }
                    }
                }
            }
            TensorData::Coo(entries)
        } else {
            TensorData::Dense(inst.tensor.as_slice().to_vec())
        };
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            dims: Dims { l, m, n },
            sparsity: Sparsity { s: inst.s, t: inst.t },
            tensor,
            b: inst.b.clone(),
            known_point: known_point.map(|z| z.as_slice().to_vec()),
            label: label.map(str::to_string),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<ParsedInstance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(classify_json_error)?;
    file.into_parsed()
}

pub fn serialize_instance(inst: &Instance, known_point: Option<&Point>, label: Option<&str>) -> String {
    let file = InstanceFile::from_instance(inst, known_point, label);
    serde_json::to_string_pretty(&file).expect("instance files always serialize")
}
