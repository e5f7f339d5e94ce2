#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use laf_core::algebra::AlgebraDecl;
use laf_core::{ArgGraph, GroundKnowledgeBase, Label, Labeling, OpKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TAGS: [&str; 4] = ["T0", "T1", "T2", "T3"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenOptions {
    /// Emit unary predicates, `domain` statements and rule variables.
    pub variables: bool,
    /// Emit `name=value` labels now and then.
    pub named_labels: bool,
    /// Fuzzy labels at full f64 precision instead of two decimals.
    pub full_precision: bool,
}

fn fuzzy_value(rng: &mut ChaCha8Rng, opts: GenOptions) -> String {
    match rng.random_range(0..10) {
        0 => "0".into(),
        1 => "1".into(),
        _ if opts.full_precision => format!("{}", rng.random::<f64>()),
        _ => format!("{}", rng.random_range(1..100) as f64 / 100.0),
    }
}

fn tag_value(rng: &mut ChaCha8Rng) -> String {
    let picked: Vec<&str> = TAGS.iter().copied().filter(|_| rng.random_bool(0.4)).collect();
    format!("{{{}}}", picked.join(", "))
}

fn labels(rng: &mut ChaCha8Rng, opts: GenOptions, with_tags: bool) -> String {
    let f = fuzzy_value(rng, opts);
    let t = with_tags.then(|| tag_value(rng));
    let named = opts.named_labels && rng.random_bool(0.3);
    match (t, named) {
        (None, false) => format!(" labels [{f}]"),
        (None, true) => format!(" labels [relevance={f}]"),
        (Some(t), false) => format!(" labels [{f}, {t}]"),
        (Some(t), true) => format!(" labels [intuition={t}, relevance={f}]"),
    }
}

/// A small random knowledge base in the DSL: at most 8 ground atoms and at
/// most 6 rules, over a fuzzy algebra and usually a 4-tag algebra.
pub fn random_kb_source(rng: &mut ChaCha8Rng, opts: GenOptions) -> String {
    let with_tags = rng.random_bool(0.7);
    let mut out = String::from("algebra relevance fuzzy;\n");
    if with_tags {
        out.push_str(&format!("algebra intuition tags {{ {} }};\n", TAGS.join(" > ")));
    }

    let unary = opts.variables && rng.random_bool(0.6);
    let (preds, consts): (Vec<String>, Vec<String>) = if unary {
        let np = rng.random_range(1..=4);
        let nc = rng.random_range(1..=2);
        ((0..np).map(|i| format!("q{i}")).collect(), (0..nc).map(|i| format!("c{i}")).collect())
    } else {
        let np = rng.random_range(1..=8);
        ((0..np).map(|i| format!("p{i}")).collect(), vec![])
    };
    if unary && rng.random_bool(0.5) {
        out.push_str(&format!("domain {};\n", consts.join(", ")));
    }

    let lit = |rng: &mut ChaCha8Rng, arg: &str| {
        let neg = if rng.random_bool(0.3) { "~" } else { "" };
        let p = &preds[rng.random_range(0..preds.len())];
        if unary {
            format!("{neg}{p}({arg})")
        } else {
            format!("{neg}{p}")
        }
    };

    let mut facts = BTreeSet::new();
    for _ in 0..rng.random_range(1..=6) {
        let arg = if unary { consts[rng.random_range(0..consts.len())].clone() } else { String::new() };
        facts.insert(lit(rng, &arg));
    }
    for f in &facts {
        out.push_str(&format!("fact {f}{};\n", labels(rng, opts, with_tags)));
    }

    for r in 0..rng.random_range(0..=6) {
        let conclusion = lit(rng, "X");
        let mut premises = BTreeSet::new();
        for _ in 0..rng.random_range(1..=3) {
            premises.insert(lit(rng, "X"));
        }
        let premises: Vec<String> = premises.into_iter().collect();
        out.push_str(&format!(
            "rule r{r}: {conclusion} <- {}{};\n",
            premises.join(", "),
            labels(rng, opts, with_tags)
        ));
    }
    out
}

fn op(alg: &AlgebraDecl, kind: OpKind, a: &Label, b: &Label) -> Label {
    alg.apply(kind, a, b).expect("labels match their algebra")
}

fn complement_key(key: &str) -> String {
    match key.strip_prefix('~') {
        Some(k) => k.to_string(),
        None => format!("~{key}"),
    }
}

/// Evaluates the defining equations directly on the ground knowledge base by
/// memoized recursion, without building a graph or iterating. Gives up with
/// `None` when a value depends on itself.
pub struct RecursiveOracle<'a> {
    algebras: &'a [AlgebraDecl],
    rules_as_premises: bool,
    assigned: BTreeMap<String, Vec<Label>>,
    /// Ground rules whose premises all hold: (schema name, conclusion, premises).
    firing: Vec<(String, String, Vec<String>)>,
    closure: BTreeSet<String>,
    plus: BTreeMap<String, Vec<Label>>,
    visiting: BTreeSet<String>,
}

impl<'a> RecursiveOracle<'a> {
    pub fn new(gkb: &'a GroundKnowledgeBase, rules_as_premises: bool) -> Self {
        let kb = gkb.kb();
        let mut assigned = BTreeMap::new();
        for f in kb.facts() {
            assigned.insert(f.literal.key(), f.labels.0.clone());
        }
        for r in kb.rules() {
            assigned.insert(r.name.clone(), r.labels.0.clone());
        }

        let mut closure: BTreeSet<String> = kb.facts().iter().map(|f| f.literal.key()).collect();
        let mut instances = BTreeSet::new();
        for g in gkb.ground_rules() {
            let name = kb.rules()[g.schema].name.clone();
            let premises: BTreeSet<String> = g.premises.iter().map(|p| p.key()).collect();
            instances.insert((name, g.conclusion.key(), premises));
        }
        loop {
            let before = closure.len();
            for (_, c, ps) in &instances {
                if ps.iter().all(|p| closure.contains(p)) {
                    closure.insert(c.clone());
                }
            }
            if closure.len() == before {
                break;
            }
        }
        let firing = instances
            .into_iter()
            .filter(|(_, _, ps)| ps.iter().all(|p| closure.contains(p)))
            .map(|(n, c, ps)| (n, c, ps.into_iter().collect()))
            .collect();
        RecursiveOracle {
            algebras: gkb.algebras(),
            rules_as_premises,
            assigned,
            firing,
            closure,
            plus: BTreeMap::new(),
            visiting: BTreeSet::new(),
        }
    }

    /// Every sentence that should appear as an I-node.
    pub fn keys(&self) -> BTreeSet<String> {
        let mut keys = self.closure.clone();
        keys.extend(self.assigned.keys().cloned());
        keys
    }

    pub fn plus(&mut self, key: &str) -> Option<Vec<Label>> {
        if let Some(v) = self.plus.get(key) {
            return Some(v.clone());
        }
        if !self.visiting.insert(key.to_string()) {
            return None;
        }
        let mut acc = self.assigned.get(key).cloned();
        let apps: Vec<(String, Vec<String>)> = self
            .firing
            .iter()
            .filter(|(_, c, _)| c == key)
            .map(|(n, _, ps)| (n.clone(), ps.clone()))
            .collect();
        for (name, premises) in apps {
            let mut inputs = Vec::new();
            for p in &premises {
                inputs.push(self.minus(p)?);
            }
            if self.rules_as_premises {
                inputs.push(self.minus(&name)?);
            }
            let term: Vec<Label> = (0..self.algebras.len())
                .map(|a| {
                    let alg = &self.algebras[a];
                    inputs.iter().skip(1).fold(inputs[0][a].clone(), |x, y| op(alg, OpKind::Support, &x, &y[a]))
                })
                .collect();
            acc = Some(match acc {
                None => term,
                Some(prev) => (0..self.algebras.len())
                    .map(|a| op(&self.algebras[a], OpKind::Aggregate, &prev[a], &term[a]))
                    .collect(),
            });
        }
        self.visiting.remove(key);
        let v = acc.expect("every key has a fact or a firing rule");
        self.plus.insert(key.to_string(), v.clone());
        Some(v)
    }

    pub fn minus(&mut self, key: &str) -> Option<Vec<Label>> {
        let p = self.plus(key)?;
        let other = complement_key(key);
        if self.closure.contains(&other) {
            let q = self.plus(&other)?;
            return Some(
                (0..self.algebras.len()).map(|a| op(&self.algebras[a], OpKind::Conflict, &p[a], &q[a])).collect(),
            );
        }
        Some(p)
    }
}

/// Largest difference between two labels of one algebra: absolute for fuzzy
/// values, 0 or infinity for tag sets.
pub fn label_gap(a: &Label, b: &Label) -> f64 {
    match (a, b) {
        (Label::Fuzzy(x), Label::Fuzzy(y)) => (x.value() - y.value()).abs(),
        (Label::Tags(x), Label::Tags(y)) if x == y => 0.0,
        _ => f64::INFINITY,
    }
}

/// Substitutes `labeling` into every equation of `graph` and returns the
/// worst residual together with the variable it occurs at.
pub fn model_residual(graph: &ArgGraph, labeling: &Labeling) -> (f64, String) {
    let algebras = labeling.algebras();
    let mut worst = (0.0, String::new());
    for (i, node) in graph.inodes().iter().enumerate() {
        let li = labeling.node_index(&node.key).expect("labeled");
        for (a, alg) in algebras.iter().enumerate() {
            let mut acc = node.assigned.as_ref().map(|v| v.0[a].clone());
            for &r in graph.producers(i) {
                let ra = &graph.ranodes()[r];
                let term = ra
                    .premises
                    .iter()
                    .map(|&p| labeling.minus_at(a, labeling.node_index(&graph.inodes()[p].key).unwrap()).clone())
                    .reduce(|x, y| op(alg, OpKind::Support, &x, &y))
                    .expect("RA-nodes have premises");
                acc = Some(match acc {
                    None => term,
                    Some(prev) => op(alg, OpKind::Aggregate, &prev, &term),
                });
            }
            let plus = acc.expect("I-node without assignment or producer");
            let gap = label_gap(&plus, labeling.plus_at(a, li));
            if gap > worst.0 {
                worst = (gap, format!("{} mu+({})", alg.name, node.key));
            }
            let minus = match graph.opponent(i) {
                Some(o) => {
                    let lo = labeling.node_index(&graph.inodes()[o].key).unwrap();
                    op(alg, OpKind::Conflict, labeling.plus_at(a, li), labeling.plus_at(a, lo))
                }
                None => labeling.plus_at(a, li).clone(),
            };
            let gap = label_gap(&minus, labeling.minus_at(a, li));
            if gap > worst.0 {
                worst = (gap, format!("{} mu-({})", alg.name, node.key));
            }
        }
    }
    worst
}
