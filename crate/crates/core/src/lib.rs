//! Labeled argumentation frameworks.
//!
//! A knowledge base of labeled presumptions and defeasible rules is grounded,
//! turned into an argumentation graph of I-, RA- and CA-nodes, and its labels
//! are propagated through support, aggregation and conflict until every
//! I-node holds a `mu+`/`mu-` pair per algebra. Each node is then classified
//! as Assured, Unchallenged, Weakened or Rejected.
//!
//! ```
//! use laf_core::{evaluate, parse_kb, EngineConfig, Status};
//!
//! let kb = parse_kb(
//!     "algebra relevance fuzzy;
//!      fact p labels [0.6];
//!      fact ~p labels [0.2];",
//! ).unwrap();
//! let eval = evaluate(&kb, &EngineConfig::default()).unwrap();
//! assert_eq!(eval.statuses.nodes["p"].combined, Some(Status::Weakened));
//! assert_eq!(eval.statuses.nodes["~p"].combined, Some(Status::Rejected));
//! ```

pub mod acceptability;
pub mod algebra;
pub mod graph;
pub mod kb;
pub mod parser;
pub mod propagation;
pub mod report;

use thiserror::Error;

pub use acceptability::{classify, classify_all, Partition, Status, StatusReport, StatusVector};
pub use algebra::{
    vector_apply, AlgebraDecl, AlgebraKind, Fuzzy, FuzzyAlgebra, Label, LabelAlgebra, LabelVector, OpKind,
    TagAlgebra, TagSet,
};
pub use graph::{build_graph, export_dot, validate_cycles, ArgGraph, CycleViolation, GraphOptions, NodeId, NodeKind};
pub use kb::{derive_closure, ground, GroundKnowledgeBase, KnowledgeBase, Literal};
pub use parser::{parse_kb, parse_kb_json, parse_kb_named, serialize_kb, ParseError, SourceSpan};
pub use propagation::{
    build_equations, solve, trace, EquationSystem, Labeling, SolverError, SolverOptions, SolverReport, SolverStart,
};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineConfig {
    pub graph: GraphOptions,
    pub solver: SolverOptions,
}

/// Everything computed for one knowledge base.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub ground: GroundKnowledgeBase,
    pub graph: ArgGraph,
    pub equations: EquationSystem,
    pub labeling: Labeling,
    pub solver: SolverReport,
    pub statuses: StatusReport,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Cycle(#[from] CycleViolation),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Classify(#[from] acceptability::ClassifyError),
}

/// Grounds, builds, solves and classifies.
pub fn evaluate(kb: &KnowledgeBase, config: &EngineConfig) -> Result<Evaluation, EngineError> {
    let ground = kb::ground(kb);
    let graph = build_graph(&ground, config.graph)?;
    let equations = build_equations(&graph, kb.algebras());
    let (labeling, solver) = solve(&equations, &config.solver)?;
    let statuses = classify_all(&labeling)?;
    Ok(Evaluation { ground, graph, equations, labeling, solver, statuses })
}
