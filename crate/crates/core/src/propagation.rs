//! Label propagation over an argumentation graph.
//!
//! Every I-node `X` gets two labels per algebra: `mu+` (the accrued support
//! for `X`) and `mu-` (its state once conflict with the complement is taken
//! into account):
//!
//! - a node without RA inputs takes its assigned label: `mu+ = F(X)`;
//! - a node with RA inputs `R1..Rk` gets `mu+ = agg_s (sup_t mu-(premise_t of R_s))`,
//!   prefixed by `F(X) agg ...` when `X` is itself in the knowledge base;
//! - `mu- = mu+(X) conflict mu+(complement X)` when a CA-node is attached,
//!   otherwise `mu- = mu+`.
//!
//! The variables form a dependency graph. Its strongly connected components
//! are solved in topological order; components with more than one variable
//! (these only arise through CA-nodes) are iterated Jacobi-style from a
//! uniform start value until one full sweep changes nothing beyond the
//! tolerance.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{
    format_decimal, AlgebraDecl, AlgebraKind, Fuzzy, FuzzyAlgebra, Label, LabelAlgebra, TagAlgebra, TagSet,
};
use crate::graph::ArgGraph;

/// One variable of the equation system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Plus(usize),
    Minus(usize),
}

impl Var {
    fn slot(self) -> usize {
        match self {
            Var::Plus(i) => 2 * i,
            Var::Minus(i) => 2 * i + 1,
        }
    }

    fn from_slot(slot: usize) -> Var {
        if slot.is_multiple_of(2) {
            Var::Plus(slot / 2)
        } else {
            Var::Minus(slot / 2)
        }
    }
}

/// One RA input of a node: the application's key and its premise I-nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub rule: String,
    pub premises: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlusEquation {
    /// `mu+ = F(X)`.
    Assigned,
    /// `mu+ = [F(X) agg] agg_s sup_t mu-(premise)`.
    Accrued { assigned: bool, applications: Vec<Application> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinusEquation {
    /// `mu- = mu+`.
    Unchallenged,
    /// `mu- = mu+(X) conflict mu+(opponent)`.
    Conflict { opponent: usize },
}

/// The algebra-independent equation system of a graph.
#[derive(Debug, Clone)]
pub struct EquationSystem {
    algebras: Vec<AlgebraDecl>,
    keys: Vec<String>,
    assigned: Vec<Option<Vec<Label>>>,
    plus: Vec<PlusEquation>,
    minus: Vec<MinusEquation>,
    /// Strongly connected components of the dependency graph, dependencies first.
    components: Vec<Vec<Var>>,
}

impl EquationSystem {
    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn algebras(&self) -> &[AlgebraDecl] {
        &self.algebras
    }

    pub fn plus_equation(&self, node: usize) -> &PlusEquation {
        &self.plus[node]
    }

    pub fn minus_equation(&self, node: usize) -> &MinusEquation {
        &self.minus[node]
    }

    pub fn components(&self) -> &[Vec<Var>] {
        &self.components
    }

    pub fn var_name(&self, var: Var) -> String {
        match var {
            Var::Plus(i) => format!("mu+({})", self.keys[i]),
            Var::Minus(i) => format!("mu-({})", self.keys[i]),
        }
    }

    fn dependencies(&self, var: Var) -> Vec<Var> {
        match var {
            Var::Plus(i) => match &self.plus[i] {
                PlusEquation::Assigned => vec![],
                PlusEquation::Accrued { applications, .. } => applications
                    .iter()
                    .flat_map(|a| a.premises.iter().map(|&p| Var::Minus(p)))
                    .collect(),
            },
            Var::Minus(i) => match self.minus[i] {
                MinusEquation::Unchallenged => vec![Var::Plus(i)],
                MinusEquation::Conflict { opponent } => vec![Var::Plus(i), Var::Plus(opponent)],
            },
        }
    }
}

/// Derives one `mu+` and one `mu-` equation per I-node.
pub fn build_equations(g: &ArgGraph, algebras: &[AlgebraDecl]) -> EquationSystem {
    let n = g.inodes().len();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let node = &g.inodes()[i];
        let producers = g.producers(i);
        if producers.is_empty() {
            // A node without inputs is always an element of the knowledge base.
            debug_assert!(node.in_kb());
            plus.push(PlusEquation::Assigned);
        } else {
            let mut applications: Vec<Application> = producers
                .iter()
                .map(|&r| {
                    let ra = &g.ranodes()[r];
                    assert!(!ra.premises.is_empty(), "RA-node {} has no premises", ra.key);
                    Application { rule: ra.key.clone(), premises: ra.premises.clone() }
                })
                .collect();
            applications.sort_by(|a, b| a.rule.cmp(&b.rule));
            plus.push(PlusEquation::Accrued { assigned: node.in_kb(), applications });
        }
        minus.push(match g.opponent(i) {
            Some(opponent) => MinusEquation::Conflict { opponent },
            None => MinusEquation::Unchallenged,
        });
    }

    let mut system = EquationSystem {
        algebras: algebras.to_vec(),
        keys: g.inodes().iter().map(|n| n.key.clone()).collect(),
        assigned: g.inodes().iter().map(|n| n.assigned.as_ref().map(|v| v.0.clone())).collect(),
        plus,
        minus,
        components: vec![],
    };

    let mut deps: DiGraph<(), ()> = DiGraph::with_capacity(2 * n, 0);
    for _ in 0..2 * n {
        deps.add_node(());
    }
    for slot in 0..2 * n {
        let var = Var::from_slot(slot);
        for d in system.dependencies(var) {
            deps.add_edge(NodeIndex::new(slot), NodeIndex::new(d.slot()), ());
        }
    }
    // Edges point at dependencies, so postorder lists dependencies first.
    system.components = tarjan_scc(&deps)
        .into_iter()
        .map(|comp| {
            let mut vars: Vec<Var> = comp.into_iter().map(|ix| Var::from_slot(ix.index())).collect();
            vars.sort();
            vars
        })
        .collect();
    system
}

/// Initial value for variables of cyclic components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverStart {
    #[default]
    Bottom,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub start: SolverStart,
    /// Convergence threshold on the largest change over one sweep.
    pub tolerance: f64,
    /// Sweep limit per cyclic component.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { start: SolverStart::Bottom, tolerance: 1e-9, max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    /// Sweeps over cyclic components, summed over algebras.
    pub iterations: usize,
    pub converged: bool,
    /// Largest change in the final sweep of any cyclic component, per algebra.
    pub residual: Vec<f64>,
    /// Components in evaluation order, as variable names.
    pub evaluation_order: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(
        "no fixed point for algebra `{algebra}` after {iterations} sweeps \
         (last change {residual:e}) in component {}",
        .component.join(", ")
    )]
    NonConvergence { algebra: String, component: Vec<String>, iterations: usize, residual: f64 },
    #[error("solver options invalid: {0}")]
    Options(String),
}

/// `mu+` and `mu-` of every I-node under every algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    algebras: Vec<AlgebraDecl>,
    keys: Vec<String>,
    index: BTreeMap<String, usize>,
    plus: Vec<Vec<Label>>,
    minus: Vec<Vec<Label>>,
}

impl Labeling {
    pub fn algebras(&self) -> &[AlgebraDecl] {
        &self.algebras
    }

    /// I-node keys in canonical order.
    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn node_index(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn mu_plus(&self, algebra: usize, node: &str) -> Option<&Label> {
        self.plus.get(algebra)?.get(self.node_index(node)?)
    }

    pub fn mu_minus(&self, algebra: usize, node: &str) -> Option<&Label> {
        self.minus.get(algebra)?.get(self.node_index(node)?)
    }

    pub fn plus_at(&self, algebra: usize, node: usize) -> &Label {
        &self.plus[algebra][node]
    }

    pub fn minus_at(&self, algebra: usize, node: usize) -> &Label {
        &self.minus[algebra][node]
    }

    fn json_value(&self, algebra: usize, label: &Label) -> serde_json::Value {
        match (&self.algebras[algebra].kind, label) {
            (AlgebraKind::Tags(t), Label::Tags(set)) => serde_json::json!(t.names(set)),
            (_, Label::Fuzzy(v)) => {
                let rounded: f64 = format_decimal(v.value()).parse().expect("decimal text");
                serde_json::json!(rounded)
            }
            (_, Label::Tags(set)) => serde_json::json!(set.ranks().collect::<Vec<_>>()),
        }
    }

    /// `{ node: { algebra: { "mu_plus": .., "mu_minus": .. } } }`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut nodes = serde_json::Map::new();
        for (i, key) in self.keys.iter().enumerate() {
            let mut per_alg = serde_json::Map::new();
            for (a, alg) in self.algebras.iter().enumerate() {
                per_alg.insert(
                    alg.name.clone(),
                    serde_json::json!({
                        "mu_plus": self.json_value(a, &self.plus[a][i]),
                        "mu_minus": self.json_value(a, &self.minus[a][i]),
                    }),
                );
            }
            nodes.insert(key.clone(), serde_json::Value::Object(per_alg));
        }
        serde_json::Value::Object(nodes)
    }
}

/// Moves labels between the [`Label`] enum and a concrete algebra.
trait Embedded: LabelAlgebra {
    fn extract(label: &Label) -> Option<Self::Label>;
    fn wrap(label: Self::Label) -> Label;
}

impl Embedded for FuzzyAlgebra {
    fn extract(label: &Label) -> Option<Fuzzy> {
        label.as_fuzzy()
    }
    fn wrap(label: Fuzzy) -> Label {
        Label::Fuzzy(label)
    }
}

impl Embedded for TagAlgebra {
    fn extract(label: &Label) -> Option<TagSet> {
        label.as_tags().cloned()
    }
    fn wrap(label: TagSet) -> Label {
        Label::Tags(label)
    }
}

struct Values<L> {
    plus: Vec<L>,
    minus: Vec<L>,
}

impl<L: Clone> Values<L> {
    fn get(&self, var: Var) -> &L {
        match var {
            Var::Plus(i) => &self.plus[i],
            Var::Minus(i) => &self.minus[i],
        }
    }

    fn set(&mut self, var: Var, value: L) {
        match var {
            Var::Plus(i) => self.plus[i] = value,
            Var::Minus(i) => self.minus[i] = value,
        }
    }
}

fn evaluate<A: LabelAlgebra>(
    alg: &A,
    sys: &EquationSystem,
    assigned: &[Option<A::Label>],
    values: &Values<A::Label>,
    var: Var,
) -> A::Label {
    match var {
        Var::Plus(i) => match &sys.plus[i] {
            PlusEquation::Assigned => assigned[i].clone().expect("leaf nodes carry an assigned label"),
            PlusEquation::Accrued { assigned: in_kb, applications } => {
                let mut accrued = applications.iter().map(|app| {
                    let mut premises = app.premises.iter().map(|&p| &values.minus[p]);
                    let first = premises.next().expect("applications have premises").clone();
                    premises.fold(first, |acc, x| alg.support(&acc, x))
                });
                let first = accrued.next().expect("accrued nodes have applications");
                let total = accrued.fold(first, |acc, x| alg.aggregate(&acc, &x));
                if *in_kb {
                    let own = assigned[i].as_ref().expect("knowledge-base nodes carry a label");
                    alg.aggregate(own, &total)
                } else {
                    total
                }
            }
        },
        Var::Minus(i) => match sys.minus[i] {
            MinusEquation::Unchallenged => values.plus[i].clone(),
            MinusEquation::Conflict { opponent } => alg.conflict(&values.plus[i], &values.plus[opponent]),
        },
    }
}

struct AlgebraRun<L> {
    values: Values<L>,
    sweeps: usize,
    residual: f64,
}

fn solve_algebra<A: Embedded>(
    alg: &A,
    name: &str,
    index: usize,
    sys: &EquationSystem,
    options: &SolverOptions,
) -> Result<AlgebraRun<A::Label>, SolverError> {
    let assigned: Vec<Option<A::Label>> = sys
        .assigned
        .iter()
        .map(|v| v.as_ref().map(|v| A::extract(&v[index]).expect("labels match their algebra")))
        .collect();
    let start = match options.start {
        SolverStart::Bottom => alg.bottom(),
        SolverStart::Top => alg.top(),
    };
    let n = sys.keys.len();
    let mut values = Values { plus: vec![start.clone(); n], minus: vec![start; n] };
    let mut sweeps = 0;
    let mut residual: f64 = 0.0;

    for comp in &sys.components {
        let cyclic = comp.len() > 1 || sys.dependencies(comp[0]).contains(&comp[0]);
        if !cyclic {
            let v = evaluate(alg, sys, &assigned, &values, comp[0]);
            values.set(comp[0], v);
            continue;
        }
        let mut converged = false;
        let mut change = f64::INFINITY;
        for _ in 0..options.max_iterations {
            sweeps += 1;
            let next: Vec<A::Label> = comp.iter().map(|&v| evaluate(alg, sys, &assigned, &values, v)).collect();
            change = comp.iter().zip(&next).map(|(&var, v)| alg.distance(values.get(var), v)).fold(0.0, f64::max);
            // under a Jacobi sweep the change is the residual of the current
            // values, so keeping them bounds every equation by the tolerance
            if change < options.tolerance {
                converged = true;
                break;
            }
            for (&var, value) in comp.iter().zip(next) {
                values.set(var, value);
            }
        }
        if !converged {
            return Err(SolverError::NonConvergence {
                algebra: name.to_string(),
                component: comp.iter().map(|&v| sys.var_name(v)).collect(),
                iterations: options.max_iterations,
                residual: change,
            });
        }
        residual = residual.max(change);
    }
    Ok(AlgebraRun { values, sweeps, residual })
}

/// Solves the system for every algebra. Never returns an unconverged labeling.
pub fn solve(sys: &EquationSystem, options: &SolverOptions) -> Result<(Labeling, SolverReport), SolverError> {
    if options.tolerance.is_nan() || options.tolerance <= 0.0 {
        return Err(SolverError::Options("tolerance must be positive".into()));
    }
    if options.max_iterations == 0 {
        return Err(SolverError::Options("max_iterations must be at least 1".into()));
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut report = SolverReport {
        iterations: 0,
        converged: true,
        residual: Vec::new(),
        evaluation_order: sys
            .components
            .iter()
            .map(|c| c.iter().map(|&v| sys.var_name(v)).collect())
            .collect(),
    };
    for (a, decl) in sys.algebras.iter().enumerate() {
        let (p, m, sweeps, residual) = match &decl.kind {
            AlgebraKind::Fuzzy(alg) => {
                let run = solve_algebra(alg, &decl.name, a, sys, options)?;
                let wrap = |v: Vec<Fuzzy>| v.into_iter().map(FuzzyAlgebra::wrap).collect::<Vec<_>>();
                (wrap(run.values.plus), wrap(run.values.minus), run.sweeps, run.residual)
            }
            AlgebraKind::Tags(alg) => {
                let run = solve_algebra(alg, &decl.name, a, sys, options)?;
                let wrap = |v: Vec<TagSet>| v.into_iter().map(TagAlgebra::wrap).collect::<Vec<_>>();
                (wrap(run.values.plus), wrap(run.values.minus), run.sweeps, run.residual)
            }
        };
        plus.push(p);
        minus.push(m);
        report.iterations += sweeps;
        report.residual.push(residual);
    }
    let labeling = Labeling {
        algebras: sys.algebras.clone(),
        keys: sys.keys.clone(),
        index: sys.keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect(),
        plus,
        minus,
    };
    Ok((labeling, report))
}

/// How an I-node's `mu+` was obtained, with operand values.
#[derive(Debug, Clone, PartialEq)]
pub enum Derivation {
    Assigned,
    Accrued { assigned: bool, applications: Vec<TraceApplication> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceApplication {
    pub rule: String,
    pub premises: Vec<TraceNode>,
}

/// An explanation tree for one I-node.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceNode {
    pub key: String,
    /// Per algebra: (name, rendered `mu+`, rendered `mu-`).
    pub values: Vec<(String, String, String)>,
    /// Rendered assigned labels, for knowledge-base elements.
    pub assigned: Option<Vec<String>>,
    pub derivation: Derivation,
    /// The complement's key and rendered `mu+` values, when in conflict.
    pub conflict: Option<(String, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown claim `{0}`")]
pub struct UnknownClaim(pub String);

/// Builds the explanation tree for `claim` down to assigned leaves.
pub fn trace(sys: &EquationSystem, labeling: &Labeling, claim: &str) -> Result<TraceNode, UnknownClaim> {
    let node = labeling.node_index(claim).ok_or_else(|| UnknownClaim(claim.to_string()))?;
    Ok(trace_node(sys, labeling, node))
}

fn trace_node(sys: &EquationSystem, labeling: &Labeling, i: usize) -> TraceNode {
    let algebras = labeling.algebras();
    let values = algebras
        .iter()
        .enumerate()
        .map(|(a, alg)| (alg.name.clone(), alg.render(labeling.plus_at(a, i)), alg.render(labeling.minus_at(a, i))))
        .collect();
    let assigned = sys.assigned[i]
        .as_ref()
        .map(|v| algebras.iter().zip(v).map(|(alg, l)| alg.render(l)).collect());
    let derivation = match &sys.plus[i] {
        PlusEquation::Assigned => Derivation::Assigned,
        PlusEquation::Accrued { assigned, applications } => Derivation::Accrued {
            assigned: *assigned,
            applications: applications
                .iter()
                .map(|app| TraceApplication {
                    rule: app.rule.clone(),
                    premises: app.premises.iter().map(|&p| trace_node(sys, labeling, p)).collect(),
                })
                .collect(),
        },
    };
    let conflict = match sys.minus[i] {
        MinusEquation::Unchallenged => None,
        MinusEquation::Conflict { opponent } => Some((
            sys.keys[opponent].clone(),
            algebras.iter().enumerate().map(|(a, alg)| alg.render(labeling.plus_at(a, opponent))).collect(),
        )),
    };
    TraceNode { key: sys.keys[i].clone(), values, assigned, derivation, conflict }
}

impl TraceNode {
    fn write(&self, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        let vals: Vec<String> = self.values.iter().map(|(n, p, m)| format!("{n} +{p} -{m}")).collect();
        let _ = writeln!(out, "{pad}{}  [{}]", self.key, vals.join("; "));
        match &self.derivation {
            Derivation::Assigned => {
                let f = self.assigned.as_ref().map(|v| v.join(", ")).unwrap_or_default();
                let _ = writeln!(out, "{pad}  mu+ = F = ({f})");
            }
            Derivation::Accrued { assigned, applications } => {
                let mut terms: Vec<String> = applications.iter().map(|a| format!("sup({})", a.rule)).collect();
                if *assigned {
                    let f = self.assigned.as_ref().map(|v| v.join(", ")).unwrap_or_default();
                    terms.insert(0, format!("F=({f})"));
                }
                let _ = writeln!(out, "{pad}  mu+ = agg[{}]", terms.join(", "));
            }
        }
        match &self.conflict {
            None => {
                let _ = writeln!(out, "{pad}  mu- = mu+");
            }
            Some((other, vals)) => {
                let _ = writeln!(out, "{pad}  mu- = mu+ conflict mu+({other}) = ({})", vals.join(", "));
            }
        }
        if let Derivation::Accrued { applications, .. } = &self.derivation {
            for app in applications {
                let _ = writeln!(out, "{pad}  via {}:", app.rule);
                for p in &app.premises {
                    p.write(out, indent + 2);
                }
            }
        }
    }
}

impl fmt::Display for TraceNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write(&mut out, 0);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphOptions};
    use crate::kb::ground;
    use crate::parser::parse_kb;

    fn run(src: &str) -> Result<(EquationSystem, Labeling, SolverReport), SolverError> {
        run_with(src, SolverOptions::default())
    }

    fn run_with(src: &str, options: SolverOptions) -> Result<(EquationSystem, Labeling, SolverReport), SolverError> {
        let kb = parse_kb(src).unwrap();
        let g = build_graph(&ground(&kb), GraphOptions::default()).unwrap();
        let sys = build_equations(&g, kb.algebras());
        let (l, r) = solve(&sys, &options)?;
        Ok((sys, l, r))
    }

    fn fuzzy(l: &Labeling, plus: bool, key: &str) -> f64 {
        let label = if plus { l.mu_plus(0, key) } else { l.mu_minus(0, key) };
        label.unwrap().as_fuzzy().unwrap().value()
    }

    #[test]
    fn single_fact_is_a_leaf() {
        let (sys, l, _) = run("algebra r fuzzy;\nfact p(a) labels [0.8];").unwrap();
        assert_eq!(sys.plus_equation(0), &PlusEquation::Assigned);
        assert_eq!(sys.minus_equation(0), &MinusEquation::Unchallenged);
        assert_eq!(fuzzy(&l, true, "p(a)"), 0.8);
        assert_eq!(fuzzy(&l, false, "p(a)"), 0.8);
    }

    #[test]
    fn symmetric_conflict_cancels() {
        let (_, l, _) = run("algebra r fuzzy;\nfact p labels [0.5];\nfact ~p labels [0.5];").unwrap();
        assert_eq!(fuzzy(&l, false, "p"), 0.0);
        assert_eq!(fuzzy(&l, false, "~p"), 0.0);
    }

    #[test]
    fn two_applications_aggregate() {
        // c <- a (0.5), c <- b (0.5); a = 0.4, b = 0.6.
        // Expansion: (0.4*0.5) agg (0.6*0.5) = 0.2 + 0.3 - 0.06 = 0.44.
        let (sys, l, _) = run(
            "algebra r fuzzy;\nfact a labels [0.4];\nfact b labels [0.6];\n\
             rule r1: c <- a labels [0.5];\nrule r2: c <- b labels [0.5];",
        )
        .unwrap();
        let c = l.node_index("c").unwrap();
        match sys.plus_equation(c) {
            PlusEquation::Accrued { assigned, applications } => {
                assert!(!assigned);
                assert_eq!(applications.iter().map(|a| a.rule.as_str()).collect::<Vec<_>>(), ["r1", "r2"]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!((fuzzy(&l, true, "c") - 0.44).abs() < 1e-12);
    }

    #[test]
    fn derived_element_of_kb_adds_own_label() {
        // b is a presumption (0.5) and derived from a (1) via r (1): 0.5 agg 1 = 1.
        let (_, l, _) = run("algebra r fuzzy;\nfact a labels [0.3];\nfact b labels [0.5];\nrule r: b <- a labels [1];")
            .unwrap();
        assert!((fuzzy(&l, true, "b") - (0.5 + 0.3 - 0.15)).abs() < 1e-12);
    }

    #[test]
    fn cyclic_conflict_reaches_fixed_point() {
        // mu+(p) = 0.5 * mu-(~p); mu-(~p) = 1 - mu+(p)  =>  mu+(p) = 1/3.
        let (sys, l, report) = run("algebra r fuzzy;\nfact ~p labels [1];\nrule r: p <- ~p labels [0.5];").unwrap();
        assert!((fuzzy(&l, true, "p") - 1.0 / 3.0).abs() < 1e-9);
        assert!(report.iterations > 1);
        assert!(report.residual[0] < 1e-9);
        assert!(sys.components().iter().any(|c| c.len() > 1));
    }

    #[test]
    fn oscillating_system_reports_non_convergence() {
        let err = run_with(
            "algebra r fuzzy;\nfact ~p labels [1];\nrule r: p <- ~p labels [1];",
            SolverOptions { max_iterations: 50, ..Default::default() },
        )
        .unwrap_err();
        match err {
            SolverError::NonConvergence { iterations, residual, .. } => {
                assert_eq!(iterations, 50);
                assert!(residual >= 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn start_top_can_select_another_fixed_point() {
        // The iteration is a contraction here, so both starts meet at 1/3.
        let src = "algebra r fuzzy;\nfact ~p labels [1];\nrule r: p <- ~p labels [0.5];";
        let (_, bottom, _) = run(src).unwrap();
        let (_, top, _) =
            run_with(src, SolverOptions { start: SolverStart::Top, ..Default::default() }).unwrap();
        assert!((fuzzy(&bottom, true, "p") - fuzzy(&top, true, "p")).abs() < 1e-9);
    }

    #[test]
    fn invalid_options_are_rejected() {
        let err = run_with("fact a;", SolverOptions { tolerance: 0.0, ..Default::default() }).unwrap_err();
        assert!(matches!(err, SolverError::Options(_)));
        let err = run_with("fact a;", SolverOptions { max_iterations: 0, ..Default::default() }).unwrap_err();
        assert!(matches!(err, SolverError::Options(_)));
    }

    #[test]
    fn labeling_json_shape() {
        let (_, l, _) = run("algebra r fuzzy;\nalgebra i tags { A > B };\nfact p labels [0.5352000000000001, {B, A}];").unwrap();
        let v = l.to_json();
        assert_eq!(v["p"]["r"]["mu_plus"], serde_json::json!(0.5352));
        assert_eq!(v["p"]["i"]["mu_minus"], serde_json::json!(["A", "B"]));
    }

    #[test]
    fn trace_of_leaf_and_unknown() {
        let (sys, l, _) = run("algebra r fuzzy;\nfact a labels [0.3];").unwrap();
        let t = trace(&sys, &l, "a").unwrap();
        assert_eq!(t.derivation, Derivation::Assigned);
        assert!(t.to_string().contains("mu+ = F = (0.3)"));
        assert_eq!(trace(&sys, &l, "zz"), Err(UnknownClaim("zz".into())));
    }
}
