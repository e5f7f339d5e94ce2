//! Argumentation graphs with information (I), rule-application (RA) and
//! conflict (CA) nodes.
//!
//! I-nodes are the presumptions, the rule schemas and every literal derived
//! by defeasible modus ponens. Each firing ground rule gets one RA-node; each
//! complementary pair of literal I-nodes gets one CA-node linked both ways.
//! Every cycle must pass through a CA-node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::LabelVector;
use crate::kb::{derive_closure, GroundKnowledgeBase, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NodeKind {
    I,
    #[serde(rename = "RA")]
    Ra,
    #[serde(rename = "CA")]
    Ca,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::I => "I",
            NodeKind::Ra => "RA",
            NodeKind::Ca => "CA",
        })
    }
}

/// A node's kind and canonical key; unique across the graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub kind: NodeKind,
    pub key: String,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sentence {
    Literal(Literal),
    /// A rule schema, named by its identifier.
    Rule(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct INode {
    pub key: String,
    pub sentence: Sentence,
    /// The element's assigned labels when it belongs to the knowledge base.
    pub assigned: Option<LabelVector>,
}

impl INode {
    pub fn in_kb(&self) -> bool {
        self.assigned.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaNode {
    pub key: String,
    pub rule: String,
    /// Premise I-nodes, sorted by index (hence by key). Includes the rule's
    /// own I-node when rules act as premises.
    pub premises: Vec<usize>,
    pub conclusion: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaNode {
    pub key: String,
    /// The positive literal's I-node.
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphOptions {
    /// Feed each rule's own I-node into its RA-nodes as an extra premise.
    pub rules_as_premises: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions { rules_as_premises: true }
    }
}

/// An argumentation graph. I-nodes are indexed in canonical key order.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgGraph {
    inodes: Vec<INode>,
    ranodes: Vec<RaNode>,
    canodes: Vec<CaNode>,
    index: BTreeMap<String, usize>,
    /// RA-nodes concluding each I-node.
    producers: Vec<Vec<usize>>,
    /// CA-node attached to each I-node, if any.
    conflicts: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cycle avoiding every conflict node: {}", render_cycle(.cycle))]
pub struct CycleViolation {
    /// Nodes along the cycle; the first node is repeated at the end.
    pub cycle: Vec<NodeId>,
}

fn render_cycle(cycle: &[NodeId]) -> String {
    cycle.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" -> ")
}

impl ArgGraph {
    pub fn empty() -> ArgGraph {
        ArgGraph {
            inodes: vec![],
            ranodes: vec![],
            canodes: vec![],
            index: BTreeMap::new(),
            producers: vec![],
            conflicts: vec![],
        }
    }

    pub fn inodes(&self) -> &[INode] {
        &self.inodes
    }

    pub fn ranodes(&self) -> &[RaNode] {
        &self.ranodes
    }

    pub fn canodes(&self) -> &[CaNode] {
        &self.canodes
    }

    pub fn inode_index(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn inode(&self, key: &str) -> Option<&INode> {
        self.inode_index(key).map(|i| &self.inodes[i])
    }

    /// RA-nodes whose conclusion is I-node `i`, in key order.
    pub fn producers(&self, i: usize) -> &[usize] {
        &self.producers[i]
    }

    /// The CA-node attached to I-node `i`.
    pub fn conflict(&self, i: usize) -> Option<&CaNode> {
        self.conflicts[i].map(|c| &self.canodes[c])
    }

    /// The complement I-node of `i` when a CA-node links them.
    pub fn opponent(&self, i: usize) -> Option<usize> {
        self.conflict(i).map(|ca| if ca.positive == i { ca.negative } else { ca.positive })
    }

    pub fn node_count(&self) -> usize {
        self.inodes.len() + self.ranodes.len() + self.canodes.len()
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        let i = self.inodes.iter().map(|n| NodeId { kind: NodeKind::I, key: n.key.clone() });
        let ra = self.ranodes.iter().map(|n| NodeId { kind: NodeKind::Ra, key: n.key.clone() });
        let ca = self.canodes.iter().map(|n| NodeId { kind: NodeKind::Ca, key: n.key.clone() });
        i.chain(ra).chain(ca)
            .collect()
    }

    fn iid(&self, i: usize) -> NodeId {
        NodeId { kind: NodeKind::I, key: self.inodes[i].key.clone() }
    }

    fn raid(&self, r: usize) -> NodeId {
        NodeId { kind: NodeKind::Ra, key: self.ranodes[r].key.clone() }
    }

    fn caid(&self, c: usize) -> NodeId {
        NodeId { kind: NodeKind::Ca, key: self.canodes[c].key.clone() }
    }

    /// All directed edges, in a deterministic order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut edges = Vec::new();
        for (r, ra) in self.ranodes.iter().enumerate() {
            for &p in &ra.premises {
                edges.push((self.iid(p), self.raid(r)));
            }
            edges.push((self.raid(r), self.iid(ra.conclusion)));
        }
        for (c, ca) in self.canodes.iter().enumerate() {
            for i in [ca.positive, ca.negative] {
                edges.push((self.iid(i), self.caid(c)));
                edges.push((self.caid(c), self.iid(i)));
            }
        }
        edges
    }
}

/// Builds the argumentation graph of a ground knowledge base and checks
/// that every cycle passes through a conflict node.
pub fn build_graph(gkb: &GroundKnowledgeBase, options: GraphOptions) -> Result<ArgGraph, CycleViolation> {
    let kb = gkb.kb();
    let closure = derive_closure(gkb);

    let mut sentences: BTreeMap<String, (Sentence, Option<LabelVector>)> = BTreeMap::new();
    for literal in &closure {
        sentences.insert(literal.key(), (Sentence::Literal(literal.clone()), None));
    }
    for fact in kb.facts() {
        sentences.insert(
            fact.literal.key(),
            (Sentence::Literal(fact.literal.clone()), Some(fact.labels.clone())),
        );
    }
    for rule in kb.rules() {
        sentences.insert(rule.name.clone(), (Sentence::Rule(rule.name.clone()), Some(rule.labels.clone())));
    }

    let inodes: Vec<INode> = sentences
        .into_iter()
        .map(|(key, (sentence, assigned))| INode { key, sentence, assigned })
        .collect();
    let index: BTreeMap<String, usize> = inodes.iter().enumerate().map(|(i, n)| (n.key.clone(), i)).collect();

    let mut firing: Vec<_> = gkb
        .ground_rules()
        .iter()
        .filter(|r| r.premises.iter().all(|p| closure.contains(p)))
        .collect();
    firing.sort_by(|a, b| a.key.cmp(&b.key));

    let mut ranodes = Vec::with_capacity(firing.len());
    let mut producers = vec![Vec::new(); inodes.len()];
    for rule in firing {
        let name = &gkb.schema(rule).name;
        let mut premises: BTreeSet<usize> = rule.premises.iter().map(|p| index[&p.key()]).collect();
        if options.rules_as_premises {
            premises.insert(index[name]);
        }
        let conclusion = index[&rule.conclusion.key()];
        producers[conclusion].push(ranodes.len());
        ranodes.push(RaNode {
            key: rule.key.clone(),
            rule: name.clone(),
            premises: premises.into_iter().collect(),
            conclusion,
        });
    }

    let mut canodes = Vec::new();
    let mut conflicts = vec![None; inodes.len()];
    for (i, node) in inodes.iter().enumerate() {
        let Sentence::Literal(lit) = &node.sentence else { continue };
        if lit.negated {
            continue;
        }
        let complement = lit.complement();
        if let Some(&j) = index.get(&complement.key()) {
            conflicts[i] = Some(canodes.len());
            conflicts[j] = Some(canodes.len());
            canodes.push(CaNode { key: format!("{}|{}", lit, complement), positive: i, negative: j });
        }
    }

    let graph = ArgGraph { inodes, ranodes, canodes, index, producers, conflicts };
    validate_cycles(&graph)?;
    Ok(graph)
}

/// Accepts iff the graph minus its CA-nodes is acyclic; otherwise returns a
/// witness cycle.
///
/// The witness starts at the smallest node (by kind, then key) lying on a
/// CA-free cycle and follows a depth-first search that visits successors in
/// the same order.
pub fn validate_cycles(g: &ArgGraph) -> Result<(), CycleViolation> {
    use petgraph::algo::tarjan_scc;
    use petgraph::graph::{DiGraph, NodeIndex};

    // Node order: I-nodes, then RA-nodes, both in key order.
    let n_i = g.inodes.len();
    let mut dg: DiGraph<NodeId, ()> = DiGraph::new();
    for i in 0..n_i {
        dg.add_node(g.iid(i));
    }
    for r in 0..g.ranodes.len() {
        dg.add_node(g.raid(r));
    }
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); dg.node_count()];
    for (r, ra) in g.ranodes.iter().enumerate() {
        for &p in &ra.premises {
            dg.add_edge(NodeIndex::new(p), NodeIndex::new(n_i + r), ());
            succ[p].push(n_i + r);
        }
        dg.add_edge(NodeIndex::new(n_i + r), NodeIndex::new(ra.conclusion), ());
        succ[n_i + r].push(ra.conclusion);
    }
    for s in &mut succ {
        s.sort_unstable();
    }

    let mut on_cycle: Vec<Option<usize>> = vec![None; dg.node_count()];
    for (c, comp) in tarjan_scc(&dg).into_iter().enumerate() {
        let cyclic = comp.len() > 1 || succ[comp[0].index()].contains(&comp[0].index());
        if cyclic {
            for n in comp {
                on_cycle[n.index()] = Some(c);
            }
        }
    }
    let Some(start) = (0..dg.node_count()).find(|&n| on_cycle[n].is_some()) else {
        return Ok(());
    };
    let comp = on_cycle[start];

    // Iterative DFS from `start`, restricted to its component.
    let mut visited = vec![false; dg.node_count()];
    let mut path = vec![start];
    let mut cursor = vec![0usize];
    visited[start] = true;
    while let Some(&node) = path.last() {
        let depth = path.len() - 1;
        let next = succ[node].get(cursor[depth]).copied();
        cursor[depth] += 1;
        match next {
            Some(s) if s == start => {
                path.push(start);
                let cycle = path.into_iter().map(|n| dg[NodeIndex::new(n)].clone()).collect();
                return Err(CycleViolation { cycle });
            }
            Some(s) if on_cycle[s] == comp && !visited[s] => {
                visited[s] = true;
                path.push(s);
                cursor.push(0);
            }
            Some(_) => {}
            None => {
                path.pop();
                cursor.pop();
            }
        }
    }
    unreachable!("a strongly connected component with a cycle always closes back on its start")
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the graph in Graphviz DOT. `labels` maps I-node keys to extra
/// text lines (label values and statuses).
pub fn export_dot(g: &ArgGraph, labels: Option<&BTreeMap<String, Vec<String>>>) -> String {
    if g.node_count() == 0 {
        return "digraph laf {}\n".to_string();
    }
    let mut out = String::from("digraph laf {\n  rankdir=BT;\n");
    for node in &g.inodes {
        let mut text = dot_escape(&node.key);
        if let Some(lines) = labels.and_then(|m| m.get(&node.key)) {
            for line in lines {
                text.push_str("\\n");
                text.push_str(&dot_escape(line));
            }
        }
        out.push_str(&format!("  \"I:{}\" [shape=box, label=\"{}\"];\n", dot_escape(&node.key), text));
    }
    for ra in &g.ranodes {
        let key = dot_escape(&ra.key);
        out.push_str(&format!("  \"RA:{key}\" [shape=ellipse, label=\"{key}\"];\n"));
    }
    for ca in &g.canodes {
        out.push_str(&format!("  \"CA:{}\" [shape=diamond, label=\"CA\"];\n", dot_escape(&ca.key)));
    }
    for (from, to) in g.edges() {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\";\n",
            dot_escape(&from.to_string()),
            dot_escape(&to.to_string())
        ));
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct JsonNode {
    id: String,
    kind: NodeKind,
}

#[derive(Serialize)]
struct JsonEdge {
    from: String,
    to: String,
}

#[derive(Serialize)]
struct JsonGraph {
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
}

/// Node and edge arrays; node ids are `KIND:key`.
pub fn export_json(g: &ArgGraph) -> String {
    let doc = JsonGraph {
        nodes: g
            .node_ids()
            .into_iter()
            .map(|id| JsonNode { id: id.to_string(), kind: id.kind })
            .collect(),
        edges: g
            .edges()
            .into_iter()
            .map(|(f, t)| JsonEdge { from: f.to_string(), to: t.to_string() })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("graph serializes")
}
