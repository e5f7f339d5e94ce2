//! Knowledge bases: literals, presumptions, defeasible rule schemas and the
//! label assignment, plus grounding and defeasible modus ponens closure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraDecl, AlgebraError, AlgebraKind, LabelVector};

/// A ground atom with polarity. Zero-arity atoms are written without parens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<String>,
    pub negated: bool,
}

impl Literal {
    pub fn new(predicate: impl Into<String>, args: Vec<String>, negated: bool) -> Literal {
        Literal {
            predicate: predicate.into(),
            args,
            negated,
        }
    }

    pub fn complement(&self) -> Literal {
        Literal {
            negated: !self.negated,
            ..self.clone()
        }
    }

    /// Canonical text, e.g. `~med_repr(cp)`.
    pub fn key(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

/// An argument position in a rule schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    /// Identifiers starting with an uppercase letter are variables.
    pub fn from_ident(ident: &str) -> Term {
        if ident.starts_with(|c: char| c.is_ascii_uppercase()) {
            Term::Var(ident.to_string())
        } else {
            Term::Const(ident.to_string())
        }
    }

    fn as_str(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

/// A literal whose arguments may be variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    pub predicate: String,
    pub args: Vec<Term>,
    pub negated: bool,
}

impl Pattern {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.variables().next().is_none()
    }

    /// Instantiates the pattern; `None` if some variable is unbound.
    pub fn instantiate(&self, subst: &BTreeMap<String, String>) -> Option<Literal> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(v) => subst.get(v).cloned(),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Literal::new(self.predicate.clone(), args, self.negated))
    }

    pub fn to_ground(&self) -> Option<Literal> {
        self.instantiate(&BTreeMap::new())
    }
}

impl From<&Literal> for Pattern {
    fn from(lit: &Literal) -> Pattern {
        Pattern {
            predicate: lit.predicate.clone(),
            args: lit.args.iter().map(|a| Term::Const(a.clone())).collect(),
            negated: lit.negated,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            let args: Vec<&str> = self.args.iter().map(Term::as_str).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

/// A labeled presumption.
#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub literal: Literal,
    pub labels: LabelVector,
}

/// A labeled defeasible rule schema `conclusion <- premises`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub conclusion: Pattern,
    pub premises: Vec<Pattern>,
    pub labels: LabelVector,
}

impl Rule {
    pub fn variables(&self) -> BTreeSet<&str> {
        self.premises
            .iter()
            .chain(std::iter::once(&self.conclusion))
            .flat_map(Pattern::variables)
            .collect()
    }
}

/// Identifies the knowledge-base element an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementRef {
    Algebra(usize),
    Domain(usize),
    Fact(usize),
    Rule(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind}")]
pub struct KbError {
    pub at: ElementRef,
    pub kind: KbErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbErrorKind {
    #[error("algebra `{0}` is declared twice")]
    DuplicateAlgebra(String),
    #[error("presumption `{0}` is declared twice")]
    DuplicateFact(String),
    #[error("rule `{0}` is declared twice")]
    DuplicateRule(String),
    #[error("rule name `{0}` clashes with a propositional literal")]
    NameClash(String),
    #[error("constant `{0}` must start with a lowercase letter")]
    BadConstant(String),
    #[error("rule `{0}` has no premises")]
    NoPremises(String),
    #[error("variable `{var}` in the conclusion of rule `{rule}` does not occur in its premises")]
    UnboundVariable { rule: String, var: String },
    #[error("presumption `{0}` contains a variable")]
    NonGroundFact(String),
    #[error("{element}: {source}")]
    Labels {
        element: String,
        source: AlgebraError,
    },
}

/// A validated knowledge base together with its algebra configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    algebras: Vec<AlgebraDecl>,
    domain: Vec<String>,
    facts: Vec<Fact>,
    rules: Vec<Rule>,
}

impl KnowledgeBase {
    /// Validates and assembles a knowledge base, reporting every problem found.
    ///
    /// `domain` lists constants that extend the grounding domain beyond those
    /// occurring in presumptions.
    pub fn new(
        algebras: Vec<AlgebraDecl>,
        domain: Vec<String>,
        facts: Vec<Fact>,
        rules: Vec<Rule>,
    ) -> Result<KnowledgeBase, Vec<KbError>> {
        let mut errors = Vec::new();
        let mut err = |at, kind| errors.push(KbError { at, kind });

        let mut names = BTreeSet::new();
        for (i, alg) in algebras.iter().enumerate() {
            if !names.insert(alg.name.as_str()) {
                err(ElementRef::Algebra(i), KbErrorKind::DuplicateAlgebra(alg.name.clone()));
            }
        }
        for (i, c) in domain.iter().enumerate() {
            if !matches!(Term::from_ident(c), Term::Const(_)) {
                err(ElementRef::Domain(i), KbErrorKind::BadConstant(c.clone()));
            }
        }

        let mut seen_facts = BTreeSet::new();
        let mut propositions = BTreeSet::new();
        for (i, fact) in facts.iter().enumerate() {
            let key = fact.literal.key();
            if !seen_facts.insert(key.clone()) {
                err(ElementRef::Fact(i), KbErrorKind::DuplicateFact(key.clone()));
            }
            if fact.literal.args.iter().any(|a| matches!(Term::from_ident(a), Term::Var(_))) {
                err(ElementRef::Fact(i), KbErrorKind::NonGroundFact(key.clone()));
            }
            if fact.literal.args.is_empty() {
                propositions.insert(fact.literal.predicate.clone());
            }
            if let Err(source) = fact.labels.conforms_to(&algebras) {
                err(ElementRef::Fact(i), KbErrorKind::Labels { element: key, source });
            }
        }

        for rule in &rules {
            for p in rule.premises.iter().chain(std::iter::once(&rule.conclusion)) {
                if p.args.is_empty() {
                    propositions.insert(p.predicate.clone());
                }
            }
        }

        let mut seen_rules = BTreeSet::new();
        for (i, rule) in rules.iter().enumerate() {
            let at = ElementRef::Rule(i);
            if !seen_rules.insert(rule.name.as_str()) {
                err(at, KbErrorKind::DuplicateRule(rule.name.clone()));
            }
            if propositions.contains(&rule.name) {
                err(at, KbErrorKind::NameClash(rule.name.clone()));
            }
            if rule.premises.is_empty() {
                err(at, KbErrorKind::NoPremises(rule.name.clone()));
            }
            let bound: BTreeSet<&str> = rule.premises.iter().flat_map(Pattern::variables).collect();
            let mut reported = BTreeSet::new();
            for var in rule.conclusion.variables() {
                if !bound.contains(var) && reported.insert(var) {
                    err(
                        at,
                        KbErrorKind::UnboundVariable {
                            rule: rule.name.clone(),
                            var: var.to_string(),
                        },
                    );
                }
            }
            if let Err(source) = rule.labels.conforms_to(&algebras) {
                err(at, KbErrorKind::Labels { element: rule.name.clone(), source });
            }
        }

        if errors.is_empty() {
            Ok(KnowledgeBase {
                algebras,
                domain,
                facts,
                rules,
            })
        } else {
            Err(errors)
        }
    }

    pub fn empty() -> KnowledgeBase {
        KnowledgeBase::default()
    }

    pub fn algebras(&self) -> &[AlgebraDecl] {
        &self.algebras
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn algebra_index(&self, name: &str) -> Option<usize> {
        self.algebras.iter().position(|a| a.name == name)
    }

    pub fn tag_algebra(&self, index: usize) -> Option<&crate::algebra::TagAlgebra> {
        match &self.algebras.get(index)?.kind {
            AlgebraKind::Tags(t) => Some(t),
            AlgebraKind::Fuzzy(_) => None,
        }
    }

    /// Constants available for grounding: those in presumptions plus the
    /// declared domain, sorted and deduplicated.
    pub fn grounding_domain(&self) -> BTreeSet<String> {
        self.facts
            .iter()
            .flat_map(|f| f.literal.args.iter().cloned())
            .chain(self.domain.iter().cloned())
            .collect()
    }
}

/// One instance of a rule schema with every variable substituted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundRule {
    /// `name` for variable-free schemas, `name[X=a,Y=b]` otherwise.
    pub key: String,
    /// Index of the schema in [`KnowledgeBase::rules`].
    pub schema: usize,
    pub conclusion: Literal,
    pub premises: Vec<Literal>,
}

/// A knowledge base whose rule schemas have been instantiated.
#[derive(Debug, Clone)]
pub struct GroundKnowledgeBase {
    kb: KnowledgeBase,
    rules: Vec<GroundRule>,
}

impl GroundKnowledgeBase {
    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn algebras(&self) -> &[AlgebraDecl] {
        self.kb.algebras()
    }

    pub fn ground_rules(&self) -> &[GroundRule] {
        &self.rules
    }

    pub fn presumptions(&self) -> impl Iterator<Item = &Literal> {
        self.kb.facts.iter().map(|f| &f.literal)
    }

    pub fn schema(&self, rule: &GroundRule) -> &Rule {
        &self.kb.rules[rule.schema]
    }
}

/// Instantiates every rule schema over the grounding domain.
///
/// Instances of one schema with the same conclusion and premise set are
/// merged, keeping the first substitution in enumeration order.
pub fn ground(kb: &KnowledgeBase) -> GroundKnowledgeBase {
    let domain: Vec<String> = kb.grounding_domain().into_iter().collect();
    let mut rules = Vec::new();
    for (schema, rule) in kb.rules.iter().enumerate() {
        let vars: Vec<&str> = rule.variables().into_iter().collect();
        let mut seen = BTreeSet::new();
        for subst in substitutions(&vars, &domain) {
            let conclusion = rule
                .conclusion
                .instantiate(&subst)
                .expect("conclusion variables occur in premises");
            let premises: Vec<Literal> = rule
                .premises
                .iter()
                .map(|p| p.instantiate(&subst).expect("all variables bound"))
                .collect();
            let premise_set: BTreeSet<Literal> = premises.iter().cloned().collect();
            if !seen.insert((conclusion.clone(), premise_set)) {
                continue;
            }
            let key = if vars.is_empty() {
                rule.name.clone()
            } else {
                let binds: Vec<String> = subst.iter().map(|(v, c)| format!("{v}={c}")).collect();
                format!("{}[{}]", rule.name, binds.join(","))
            };
            rules.push(GroundRule {
                key,
                schema,
                conclusion,
                premises,
            });
        }
    }
    GroundKnowledgeBase {
        kb: kb.clone(),
        rules,
    }
}

/// Every map from `vars` to `domain`, in lexicographic order.
fn substitutions(vars: &[&str], domain: &[String]) -> Vec<BTreeMap<String, String>> {
    let mut out = vec![BTreeMap::new()];
    for var in vars {
        out = out
            .into_iter()
            .flat_map(|partial| {
                domain.iter().map(move |c| {
                    let mut next = partial.clone();
                    next.insert(var.to_string(), c.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// The least set of literals containing the presumptions and closed under
/// defeasible modus ponens. Complementary literals may coexist.
pub fn derive_closure(gkb: &GroundKnowledgeBase) -> BTreeSet<Literal> {
    let mut closure: BTreeSet<Literal> = gkb.presumptions().cloned().collect();
    let mut pending: Vec<&GroundRule> = gkb.rules.iter().collect();
    loop {
        let before = pending.len();
        pending.retain(|rule| {
            if rule.premises.iter().all(|p| closure.contains(p)) {
                closure.insert(rule.conclusion.clone());
                false
            } else {
                true
            }
        });
        if pending.len() == before {
            break;
        }
    }
    closure
}
