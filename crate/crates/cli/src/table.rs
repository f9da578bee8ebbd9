//! Functional value tables stored as JSON.
//!
//! ```json
//! {"kind": "functional", "dimension": 1, "degree": 4,
//!  "values": [{"alpha": [0], "value": ["1", "0"]}, ...],
//!  "fill": ["0", "0"]}
//! ```
//!
//! Tensor tables use `"kind": "tensor"` and give both `alpha` and `beta`.
//! Every index up to `degree` needs a value unless `fill` is present.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rkhsmult_core::scalar::exact;
use rkhsmult_core::{Exact, Functional, MultiIndex, TensorFunctional};

use crate::expr::BuiltFunctional;
use crate::numfmt::{parse_rational, Encode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("table {path}: {message}")]
pub struct TableError {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    Functional,
    Tensor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub alpha: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<u32>>,
    pub value: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueTable {
    pub kind: TableKind,
    pub dimension: usize,
    pub degree: usize,
    pub values: Vec<TableEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<[String; 2]>,
}

impl ValueTable {
    pub fn from_functional(f: &Functional<Exact>) -> Self {
        ValueTable {
            kind: TableKind::Functional,
            dimension: f.dimension(),
            degree: f.degree(),
            values: f
                .values()
                .iter()
                .map(|(a, v)| TableEntry {
                    alpha: a.exponents().to_vec(),
                    beta: None,
                    value: v.encode(),
                })
                .collect(),
            fill: None,
        }
    }

    pub fn from_tensor(f: &TensorFunctional<Exact>) -> Self {
        let d = f.half_dimension();
        ValueTable {
            kind: TableKind::Tensor,
            dimension: d,
            degree: f.degree(),
            values: f
                .joint()
                .values()
                .iter()
                .map(|(ab, v)| {
                    let (a, b) = ab.split_at(d);
                    TableEntry {
                        alpha: a.exponents().to_vec(),
                        beta: Some(b.exponents().to_vec()),
                        value: v.encode(),
                    }
                })
                .collect(),
            fill: None,
        }
    }

    /// Values up to `min(self.degree, degree)`.
    pub fn build(&self, degree: usize, path: &Path) -> Result<BuiltFunctional, TableError> {
        let err = |message: String| TableError {
            path: path.to_path_buf(),
            message,
        };
        let d = self.dimension;
        if d == 0 {
            return Err(err("dimension must be at least 1".into()));
        }
        let nvars = match self.kind {
            TableKind::Functional => d,
            TableKind::Tensor => 2 * d,
        };
        let degree = degree.min(self.degree);
        let parse = |v: &[String; 2]| -> Result<Exact, TableError> {
            let re = parse_rational(&v[0]).map_err(|e| err(e.to_string()))?;
            let im = parse_rational(&v[1]).map_err(|e| err(e.to_string()))?;
            Ok(exact(re, im))
        };
        let mut values = BTreeMap::new();
        for entry in &self.values {
            let index = match (self.kind, &entry.beta) {
                (TableKind::Functional, None) => entry.alpha.clone(),
                (TableKind::Tensor, Some(b)) => entry.alpha.iter().chain(b).copied().collect(),
                (TableKind::Functional, Some(_)) => return Err(err("beta given in a functional table".into())),
                (TableKind::Tensor, None) => return Err(err("tensor entries need beta".into())),
            };
            if index.len() != nvars {
                return Err(err(format!("index {:?} does not match dimension {}", entry.alpha, d)));
            }
            let index = MultiIndex::new(index);
            if index.degree() > self.degree {
                return Err(err(format!(
                    "index {} is above the declared degree {}",
                    index, self.degree
                )));
            }
            if values.insert(index.clone(), parse(&entry.value)?).is_some() {
                return Err(err(format!("duplicate value for {}", index)));
            }
        }
        if let Some(fill) = &self.fill {
            let fill = parse(fill)?;
            for alpha in MultiIndex::all_up_to(nvars, degree) {
                values.entry(alpha).or_insert_with(|| fill.clone());
            }
        }
        let f = Functional::new(nvars, degree, values, "table").map_err(|e| err(e.to_string()))?;
        Ok(match self.kind {
            TableKind::Functional => BuiltFunctional::Plain(f),
            TableKind::Tensor => BuiltFunctional::Tensor(TensorFunctional::new(d, f).map_err(|e| err(e.to_string()))?),
        })
    }
}

pub fn load(path: &Path, degree: usize) -> Result<BuiltFunctional, TableError> {
    let err = |message: String| TableError {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let table: ValueTable = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
    table.build(degree, path)
}
