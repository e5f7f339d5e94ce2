mod common;

use std::collections::BTreeSet;

use common::{model_residual, random_kb_source, rng, GenOptions};
use laf_core::kb::Fact;
use laf_core::parser::serialize_kb_json;
use laf_core::{
    build_graph, derive_closure, evaluate, ground, parse_kb, parse_kb_json, serialize_kb, EngineConfig,
    EngineError, Fuzzy, FuzzyAlgebra, GraphOptions, KnowledgeBase, LabelAlgebra, Literal, SolverOptions,
    SolverStart, TagAlgebra, TagSet,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn kb_from_seed(seed: u64, opts: GenOptions) -> KnowledgeBase {
    let src = random_kb_source(&mut rng(seed), opts);
    parse_kb(&src).unwrap_or_else(|e| panic!("{e:?}\n{src}"))
}

fn unit() -> impl Strategy<Value = Fuzzy> {
    (0.0..=1.0f64).prop_map(|x| Fuzzy::new(x).unwrap())
}

fn tag_set() -> impl Strategy<Value = TagSet> {
    proptest::collection::btree_set(0usize..4, 0..=4).prop_map(TagSet::from_ranks)
}

fn tags() -> TagAlgebra {
    TagAlgebra::new(["PL", "NG", "FCH", "PCH"].map(String::from).to_vec()).unwrap()
}

proptest! {
    #[test]
    fn fuzzy_operators_stay_in_range(a in unit(), b in unit()) {
        let alg = FuzzyAlgebra;
        for x in [alg.support(&a, &b), alg.aggregate(&a, &b), alg.conflict(&a, &b)] {
            prop_assert!(alg.contains(&x));
        }
        prop_assert!(alg.support(&a, &b).value() <= a.value().min(b.value()) + 1e-15);
        prop_assert!(alg.aggregate(&a, &b).value() + 1e-15 >= a.value().max(b.value()));
    }

    #[test]
    fn tag_operators_are_lattice_like(a in tag_set(), b in tag_set()) {
        let alg = tags();
        let agg = alg.aggregate(&a, &b);
        prop_assert!(alg.leq(&a, &agg) && alg.leq(&b, &agg));
        prop_assert!(alg.leq(&alg.conflict(&a, &b), &a));
        prop_assert!(alg.support(&a, &b).len() <= 1);
        prop_assert_eq!(alg.support(&a, &b).is_empty(), a.is_empty() && b.is_empty());
        prop_assert!(alg.leq(&alg.bottom(), &a) && alg.leq(&a, &alg.top()));
    }

    #[test]
    fn closure_is_monotone_and_idempotent(seed in any::<u64>()) {
        let kb = kb_from_seed(seed, GenOptions { variables: true, ..GenOptions::default() });
        let closure = derive_closure(&ground(&kb));
        let facts: BTreeSet<Literal> = kb.facts().iter().map(|f| f.literal.clone()).collect();
        prop_assert!(facts.is_subset(&closure));

        // add every derived literal as a fact: nothing new appears
        let labels = kb.facts()[0].labels.clone();
        let mut all_facts = kb.facts().to_vec();
        for l in closure.difference(&facts) {
            all_facts.push(Fact { literal: l.clone(), labels: labels.clone() });
        }
        let saturated = KnowledgeBase::new(
            kb.algebras().to_vec(), kb.domain().to_vec(), all_facts, kb.rules().to_vec(),
        ).unwrap();
        prop_assert_eq!(derive_closure(&ground(&saturated)), closure.clone());

        // dropping a fact never grows the closure
        let fewer = KnowledgeBase::new(
            kb.algebras().to_vec(), kb.domain().to_vec(), kb.facts()[1..].to_vec(), kb.rules().to_vec(),
        ).unwrap();
        prop_assert!(derive_closure(&ground(&fewer)).is_subset(&closure));
    }

    #[test]
    fn grounding_is_union_over_constants(seed in any::<u64>()) {
        let kb = kb_from_seed(seed, GenOptions { variables: true, ..GenOptions::default() });
        let domain = kb.grounding_domain();
        prop_assume!(kb.rules().iter().all(|r| !r.variables().is_empty()));
        prop_assume!(kb.facts().iter().all(|f| f.literal.args.len() == 1));
        let whole: BTreeSet<String> = ground(&kb).ground_rules().iter().map(|g| g.key.clone()).collect();
        let mut parts = BTreeSet::new();
        for c in &domain {
            let facts: Vec<Fact> = kb.facts().iter().filter(|f| &f.literal.args[0] == c).cloned().collect();
            let sub = KnowledgeBase::new(kb.algebras().to_vec(), vec![c.clone()], facts, kb.rules().to_vec())
                .unwrap();
            parts.extend(ground(&sub).ground_rules().iter().map(|g| g.key.clone()));
        }
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn dsl_and_json_round_trip(seed in any::<u64>()) {
        let opts = GenOptions { variables: true, named_labels: true, full_precision: true };
        let kb = kb_from_seed(seed, opts);
        prop_assert_eq!(&parse_kb(&serialize_kb(&kb)).unwrap(), &kb);
        prop_assert_eq!(&parse_kb_json(&serialize_kb_json(&kb), "kb.json").unwrap(), &kb);
    }

    #[test]
    fn element_order_does_not_matter(seed in any::<u64>(), shuffle in any::<u64>()) {
        let kb = kb_from_seed(seed, GenOptions { variables: true, ..GenOptions::default() });
        let mut facts = kb.facts().to_vec();
        let mut rules = kb.rules().to_vec();
        let mut r = rng(shuffle);
        facts.shuffle(&mut r);
        rules.shuffle(&mut r);
        let other = KnowledgeBase::new(kb.algebras().to_vec(), kb.domain().to_vec(), facts, rules).unwrap();
        let a = build_graph(&ground(&kb), GraphOptions::default());
        let b = build_graph(&ground(&other), GraphOptions::default());
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.node_ids(), b.node_ids());
                prop_assert_eq!(a.edges(), b.edges());
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "only one ordering was accepted"),
        }
    }

    #[test]
    fn solved_labelings_are_models_and_statuses_partition(seed in any::<u64>()) {
        let kb = kb_from_seed(seed, GenOptions::default());
        match evaluate(&kb, &EngineConfig::default()) {
            Ok(eval) => {
                prop_assert!(model_residual(&eval.graph, &eval.labeling).0 < 1e-9);
                let n = eval.labeling.keys().len();
                for p in &eval.statuses.partitions {
                    let sizes = p.assured.len() + p.unchallenged.len() + p.weakened.len() + p.rejected.len();
                    prop_assert_eq!(sizes, n);
                }
                for (key, v) in &eval.statuses.nodes {
                    prop_assert_eq!(v.combined, v.per_algebra.iter().min().copied(), "{}", key);
                }
            }
            Err(EngineError::Cycle(c)) => {
                prop_assert_eq!(c.cycle.first(), c.cycle.last());
                prop_assert!(c.cycle.len() >= 3);
            }
            Err(EngineError::Solver(_)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let kb = kb_from_seed(seed, GenOptions { variables: true, ..GenOptions::default() });
        let cfg = EngineConfig {
            solver: SolverOptions { start: SolverStart::Top, ..SolverOptions::default() },
            ..EngineConfig::default()
        };
        if let (Ok(a), Ok(b)) = (evaluate(&kb, &cfg), evaluate(&kb, &cfg)) {
            prop_assert_eq!(laf_core::report::render_text(&a, false), laf_core::report::render_text(&b, false));
        }
    }
}
