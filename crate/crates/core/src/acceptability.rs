//! Acceptability statuses of I-nodes.
//!
//! Per algebra, a node is tested in order:
//!
//! 1. **Assured**: `mu-` is the top, or contains the top element;
//! 2. **Unchallenged**: `mu+ = mu-` and `mu-` is not the bottom;
//! 3. **Weakened**: `bottom < mu- < mu+`;
//! 4. **Rejected**: `mu-` is the bottom.
//!
//! The first test that holds wins. A node's combined status is the least of
//! its per-algebra statuses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraKind, Label, LabelAlgebra};
use crate::propagation::Labeling;

/// Ordered `Rejected < Weakened < Unchallenged < Assured`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Status {
    Rejected,
    Weakened,
    Unchallenged,
    Assured,
}

impl Status {
    pub const ALL: [Status; 4] = [Status::Assured, Status::Unchallenged, Status::Weakened, Status::Rejected];

    pub fn name(self) -> &'static str {
        match self {
            Status::Assured => "Assured",
            Status::Unchallenged => "Unchallenged",
            Status::Weakened => "Weakened",
            Status::Rejected => "Rejected",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("unknown I-node `{0}`")]
    UnknownNode(String),
    #[error("no algebra with index {0}")]
    UnknownAlgebra(usize),
    #[error("labels of `{node}` under algebra `{algebra}` satisfy no status condition")]
    Unclassifiable { node: String, algebra: String },
}

fn status_of<A: LabelAlgebra>(alg: &A, plus: &A::Label, minus: &A::Label) -> Option<Status> {
    let bottom = alg.bottom();
    let is_bottom = alg.equivalent(minus, &bottom);
    if alg.reaches_top(minus) {
        Some(Status::Assured)
    } else if alg.equivalent(plus, minus) && !is_bottom {
        Some(Status::Unchallenged)
    } else if !is_bottom && alg.leq(minus, plus) && !alg.equivalent(minus, plus) {
        Some(Status::Weakened)
    } else if is_bottom {
        Some(Status::Rejected)
    } else {
        None
    }
}

/// The status of I-node `node` under algebra `algebra`.
pub fn classify(labeling: &Labeling, algebra: usize, node: &str) -> Result<Status, ClassifyError> {
    let decl = labeling.algebras().get(algebra).ok_or(ClassifyError::UnknownAlgebra(algebra))?;
    let i = labeling.node_index(node).ok_or_else(|| ClassifyError::UnknownNode(node.to_string()))?;
    let (plus, minus) = (labeling.plus_at(algebra, i), labeling.minus_at(algebra, i));
    let status = match (&decl.kind, plus, minus) {
        (AlgebraKind::Fuzzy(a), Label::Fuzzy(p), Label::Fuzzy(m)) => status_of(a, p, m),
        (AlgebraKind::Tags(a), Label::Tags(p), Label::Tags(m)) => status_of(a, p, m),
        _ => None,
    };
    status.ok_or_else(|| ClassifyError::Unclassifiable { node: node.to_string(), algebra: decl.name.clone() })
}

/// Per-algebra statuses of one I-node plus their minimum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatusVector {
    pub per_algebra: Vec<Status>,
    /// `None` only when no algebra is configured.
    pub combined: Option<Status>,
}

/// The nodes holding each status under one algebra.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Partition {
    pub assured: BTreeSet<String>,
    pub unchallenged: BTreeSet<String>,
    pub weakened: BTreeSet<String>,
    pub rejected: BTreeSet<String>,
}

impl Partition {
    pub fn get(&self, status: Status) -> &BTreeSet<String> {
        match status {
            Status::Assured => &self.assured,
            Status::Unchallenged => &self.unchallenged,
            Status::Weakened => &self.weakened,
            Status::Rejected => &self.rejected,
        }
    }

    fn get_mut(&mut self, status: Status) -> &mut BTreeSet<String> {
        match status {
            Status::Assured => &mut self.assured,
            Status::Unchallenged => &mut self.unchallenged,
            Status::Weakened => &mut self.weakened,
            Status::Rejected => &mut self.rejected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusReport {
    pub algebra_names: Vec<String>,
    pub nodes: BTreeMap<String, StatusVector>,
    /// One partition per algebra, in declaration order.
    pub partitions: Vec<Partition>,
}

impl StatusReport {
    /// `[{ "claim": .., "status": { algebra: status }, "combined": .. }]`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .map(|(claim, v)| {
                let status: serde_json::Map<String, serde_json::Value> = self
                    .algebra_names
                    .iter()
                    .zip(&v.per_algebra)
                    .map(|(n, s)| (n.clone(), serde_json::json!(s.name())))
                    .collect();
                serde_json::json!({
                    "claim": claim,
                    "status": status,
                    "combined": v.combined.map(Status::name),
                })
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Classifies every I-node under every algebra.
pub fn classify_all(labeling: &Labeling) -> Result<StatusReport, ClassifyError> {
    let algebras = labeling.algebras();
    let mut partitions = vec![Partition::default(); algebras.len()];
    let mut nodes = BTreeMap::new();
    for key in labeling.keys() {
        let per_algebra = (0..algebras.len())
            .map(|a| classify(labeling, a, key))
            .collect::<Result<Vec<_>, _>>()?;
        for (partition, &status) in partitions.iter_mut().zip(&per_algebra) {
            partition.get_mut(status).insert(key.clone());
        }
        let combined = per_algebra.iter().copied().min();
        nodes.insert(key.clone(), StatusVector { per_algebra, combined });
    }
    Ok(StatusReport {
        algebra_names: algebras.iter().map(|a| a.name.clone()).collect(),
        nodes,
        partitions,
    })
}
