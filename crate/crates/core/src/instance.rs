//! Problem instances and their versioned JSON schema.
//!
//! The on-disk format is
//!
//! ```json
//! {
//!   "version": 1,
//!   "n": 3,
//!   "weights": [8.0, 8.0, 1.0],
//!   "capacity": 16.0,
//!   "oracle": { "kind": "modular", "values": [8.0, 8.0, 2.0] }
//! }
//! ```
//!
//! with `oracle.kind` one of `"modular"` (`values`: one number per element),
//! `"table"` (`table`: map from comma-joined sorted ids — `""` for the empty
//! set — to value, complete over all `2^n` subsets), or `"coverage"`
//! (`intervals`: per-element arrays of `[a, b]` pairs). Numbers round-trip
//! exactly: serialization uses the shortest decimal form that parses back to
//! the same binary value.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::element::{ElementId, ElementSet};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::oracle::{SetFunctionOracle, ValueOracle};

/// Relative feasibility tolerance: `S` is feasible iff
/// `w(S) <= W * (1 + FEAS_TOL)`.
pub const FEAS_TOL: f64 = 1e-12;

#[inline]
pub fn weight_within_capacity(weight: f64, capacity: f64) -> bool {
    weight <= capacity * (1.0 + FEAS_TOL)
}

/// A knapsack instance: positive per-element weights, a positive capacity,
/// and a value oracle over the same ground set.
#[derive(Debug)]
pub struct Instance {
    weights: Vec<f64>,
    capacity: f64,
    oracle: SetFunctionOracle,
}

impl Instance {
    pub fn new(weights: Vec<f64>, capacity: f64, oracle: SetFunctionOracle) -> Result<Self> {
        if oracle.ground_size() != weights.len() {
            return Err(Error::MalformedInstance(format!(
                "{} weights but oracle ground size {}",
                weights.len(),
                oracle.ground_size()
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::MalformedInstance(format!(
                    "weight of element {i} must be finite and positive, got {w}"
                )));
            }
        }
        if !capacity.is_finite() || capacity <= 0.0 {
            return Err(Error::MalformedInstance(format!(
                "capacity must be finite and positive, got {capacity}"
            )));
        }
        Ok(Instance {
            weights,
            capacity,
            oracle,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn oracle(&self) -> &SetFunctionOracle {
        &self.oracle
    }

    pub fn problem(&self) -> Problem<'_, SetFunctionOracle> {
        Problem {
            oracle: &self.oracle,
            weights: &self.weights,
            capacity: self.capacity,
        }
    }

    pub fn to_json_string(&self) -> String {
        self.to_json_string_with_meta(None)
    }

    pub fn to_json_string_with_meta(&self, adversarial: Option<serde_json::Value>) -> String {
        let file = self.to_file(adversarial);
        serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Instance> {
        Ok(Self::from_json_str_with_meta(s)?.0)
    }

    pub fn from_json_str_with_meta(s: &str) -> Result<(Instance, Option<serde_json::Value>)> {
        let file: InstanceFile = serde_json::from_str(s)?;
        file.into_instance()
    }

    pub fn write_file(&self, path: &Path, adversarial: Option<serde_json::Value>) -> Result<()> {
        std::fs::write(path, self.to_json_string_with_meta(adversarial))?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<(Instance, Option<serde_json::Value>)> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str_with_meta(&s)
    }

    fn to_file(&self, adversarial: Option<serde_json::Value>) -> InstanceFile {
        let oracle = match self.oracle.kind() {
            crate::oracle::OracleKind::Modular => OracleFile::Modular {
                values: self.oracle.modular_values().unwrap().to_vec(),
            },
            crate::oracle::OracleKind::Table => {
                let values = self.oracle.table_values().unwrap();
                let mut table = BTreeMap::new();
                for (mask, &v) in values.iter().enumerate() {
                    table.insert(encode_subset_key(mask as u64), v);
                }
                OracleFile::Table { table }
            }
            crate::oracle::OracleKind::Coverage => OracleFile::Coverage {
                intervals: self
                    .oracle
                    .coverage_intervals()
                    .unwrap()
                    .iter()
                    .map(|set| set.spans().iter().map(|&(a, b)| [a, b]).collect())
                    .collect(),
            },
        };
        InstanceFile {
            version: SCHEMA_VERSION,
            n: self.n(),
            weights: self.weights.clone(),
            capacity: self.capacity,
            oracle,
            adversarial,
        }
    }
}

/// Borrowed view every algorithm runs against; contracted sub-problems swap
/// in a wrapper oracle and a residual capacity.
pub struct Problem<'a, O: ValueOracle + ?Sized> {
    pub oracle: &'a O,
    pub weights: &'a [f64],
    pub capacity: f64,
}

impl<O: ValueOracle + ?Sized> Clone for Problem<'_, O> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<O: ValueOracle + ?Sized> Copy for Problem<'_, O> {}

impl<'a, O: ValueOracle + ?Sized> Problem<'a, O> {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn weight(&self, e: ElementId) -> f64 {
        self.weights[e.index()]
    }

    /// Sum of weights in ascending id order.
    pub fn set_weight(&self, s: &ElementSet) -> f64 {
        s.iter().map(|e| self.weight(e)).sum()
    }

    #[inline]
    pub fn fits(&self, weight: f64) -> bool {
        weight_within_capacity(weight, self.capacity)
    }

    pub fn element_ids(&self) -> impl Iterator<Item = ElementId> {
        (0..self.weights.len() as u32).map(ElementId)
    }
}

const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    n: usize,
    weights: Vec<f64>,
    capacity: f64,
    oracle: OracleFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    adversarial: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum OracleFile {
    Modular { values: Vec<f64> },
    Table { table: BTreeMap<String, f64> },
    Coverage { intervals: Vec<Vec<[f64; 2]>> },
}

fn encode_subset_key(mask: u64) -> String {
    let ids: Vec<String> = ElementSet::from_mask(mask)
        .iter()
        .map(|e| e.0.to_string())
        .collect();
    ids.join(",")
}

fn decode_subset_key(key: &str, n: usize) -> Result<u64> {
    let mut mask = 0u64;
    let mut last: Option<u32> = None;
    if key.is_empty() {
        return Ok(0);
    }
    for part in key.split(',') {
        let id: u32 = part.parse().map_err(|_| {
            Error::MalformedOracle(format!("table key {key:?} has non-integer id {part:?}"))
        })?;
        if id as usize >= n {
            return Err(Error::MalformedOracle(format!(
                "table key {key:?} mentions element {id} outside 0..{n}"
            )));
        }
        if last.is_some_and(|prev| prev >= id) {
            return Err(Error::MalformedOracle(format!(
                "table key {key:?} is not strictly increasing"
            )));
        }
        last = Some(id);
        mask |= 1 << id;
    }
    Ok(mask)
}

impl InstanceFile {
    fn into_instance(self) -> Result<(Instance, Option<serde_json::Value>)> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::MalformedInstance(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        if self.weights.len() != self.n {
            return Err(Error::MalformedInstance(format!(
                "n = {} but {} weights",
                self.n,
                self.weights.len()
            )));
        }
        let oracle = match self.oracle {
            OracleFile::Modular { values } => {
                if values.len() != self.n {
                    return Err(Error::MalformedOracle(format!(
                        "modular oracle has {} values for n = {}",
                        values.len(),
                        self.n
                    )));
                }
                SetFunctionOracle::modular(values)?
            }
            OracleFile::Table { table } => {
                if self.n > crate::oracle::TABLE_MAX_N {
                    return Err(Error::SizeLimit {
                        what: "table oracle ground set",
                        limit: crate::oracle::TABLE_MAX_N,
                        got: self.n,
                    });
                }
                let full = 1usize << self.n;
                let mut values = vec![None; full];
                for (key, value) in &table {
                    let mask = decode_subset_key(key, self.n)? as usize;
                    if values[mask].replace(*value).is_some() {
                        return Err(Error::MalformedOracle(format!(
                            "table defines subset {key:?} twice"
                        )));
                    }
                }
                let mut dense = Vec::with_capacity(full);
                for (mask, v) in values.into_iter().enumerate() {
                    match v {
                        Some(v) => dense.push(v),
                        None => {
                            return Err(Error::MalformedOracle(format!(
                                "table is missing subset {:?}",
                                encode_subset_key(mask as u64)
                            )))
                        }
                    }
                }
                SetFunctionOracle::table(self.n, dense)?
            }
            OracleFile::Coverage { intervals } => {
                if intervals.len() != self.n {
                    return Err(Error::MalformedOracle(format!(
                        "coverage oracle has {} interval lists for n = {}",
                        intervals.len(),
                        self.n
                    )));
                }
                let sets: Result<Vec<IntervalSet>> = intervals
                    .into_iter()
                    .map(|spans| IntervalSet::new(spans.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>()))
                    .collect();
                SetFunctionOracle::coverage(sets?)
            }
        };
        Ok((
            Instance::new(self.weights, self.capacity, oracle)?,
            self.adversarial,
        ))
    }
}
