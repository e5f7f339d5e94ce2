//! Algebras of argumentation labels.
//!
//! An algebra pairs a label domain (with a partial order, a top and a bottom)
//! with three binary operators:
//!
//! - **support** combines the labels of the premises of one rule application,
//! - **aggregate** accrues the labels of several applications backing one claim,
//! - **conflict** weakens a claim's label by the label of its complement.
//!
//! Two algebras are built in: [`FuzzyAlgebra`] (relevance in `[0, 1]`) and
//! [`TagAlgebra`] (finite sets of tags drawn from a totally ordered universe).
//! A knowledge base configures an ordered list of [`AlgebraDecl`]s and labels
//! every element with a [`LabelVector`] holding one label per algebra.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Absolute tolerance used when comparing fuzzy labels for equality.
pub const FUZZY_EPSILON: f64 = 1e-9;

/// The abstract interface every label algebra implements.
pub trait LabelAlgebra {
    type Label: Clone + PartialEq + fmt::Debug;

    fn top(&self) -> Self::Label;
    fn bottom(&self) -> Self::Label;
    fn leq(&self, a: &Self::Label, b: &Self::Label) -> bool;

    fn support(&self, a: &Self::Label, b: &Self::Label) -> Self::Label;
    fn aggregate(&self, a: &Self::Label, b: &Self::Label) -> Self::Label;
    fn conflict(&self, a: &Self::Label, b: &Self::Label) -> Self::Label;

    /// Whether `x` is a value of this algebra's domain.
    fn contains(&self, x: &Self::Label) -> bool;

    /// The "assured" test: `x` is the top, or the top element is a member of `x`.
    fn reaches_top(&self, x: &Self::Label) -> bool;

    /// Distance used to decide fixed-point convergence. Zero iff equal.
    fn distance(&self, a: &Self::Label, b: &Self::Label) -> f64;

    /// Equality up to the algebra's comparison tolerance.
    fn equivalent(&self, a: &Self::Label, b: &Self::Label) -> bool {
        a == b
    }

    fn apply(&self, op: OpKind, a: &Self::Label, b: &Self::Label) -> Self::Label {
        match op {
            OpKind::Support => self.support(a, b),
            OpKind::Aggregate => self.aggregate(a, b),
            OpKind::Conflict => self.conflict(a, b),
        }
    }
}

/// Selects one of the three algebra operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Support,
    Aggregate,
    Conflict,
}

/// A normalized relevance value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Fuzzy(f64);

impl Fuzzy {
    pub const ZERO: Fuzzy = Fuzzy(0.0);
    pub const ONE: Fuzzy = Fuzzy(1.0);

    /// Returns `None` unless `value` lies in `[0, 1]`.
    pub fn new(value: f64) -> Option<Fuzzy> {
        (0.0..=1.0).contains(&value).then_some(Fuzzy(value))
    }

    // Operator results can drift past the unit interval by an ulp.
    fn clamped(value: f64) -> Fuzzy {
        Fuzzy(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Fuzzy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_decimal(self.0))
    }
}

/// Renders a real with at most nine decimals and no trailing zeros.
pub fn format_decimal(value: f64) -> String {
    let text = format!("{value:.9}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text == "-0" {
        "0".to_string()
    } else {
        text.to_string()
    }
}

/// Product t-norm support, probabilistic-sum aggregation and truncated
/// difference conflict over `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FuzzyAlgebra;

impl LabelAlgebra for FuzzyAlgebra {
    type Label = Fuzzy;

    fn top(&self) -> Fuzzy {
        Fuzzy::ONE
    }

    fn bottom(&self) -> Fuzzy {
        Fuzzy::ZERO
    }

    fn leq(&self, a: &Fuzzy, b: &Fuzzy) -> bool {
        a.0 <= b.0
    }

    fn support(&self, a: &Fuzzy, b: &Fuzzy) -> Fuzzy {
        Fuzzy::clamped(a.0 * b.0)
    }

    fn aggregate(&self, a: &Fuzzy, b: &Fuzzy) -> Fuzzy {
        Fuzzy::clamped(a.0 + b.0 - a.0 * b.0)
    }

    fn conflict(&self, a: &Fuzzy, b: &Fuzzy) -> Fuzzy {
        Fuzzy::clamped((a.0 - b.0).max(0.0))
    }

    fn contains(&self, x: &Fuzzy) -> bool {
        (0.0..=1.0).contains(&x.0)
    }

    fn reaches_top(&self, x: &Fuzzy) -> bool {
        self.equivalent(x, &Fuzzy::ONE)
    }

    fn distance(&self, a: &Fuzzy, b: &Fuzzy) -> f64 {
        (a.0 - b.0).abs()
    }

    fn equivalent(&self, a: &Fuzzy, b: &Fuzzy) -> bool {
        (a.0 - b.0).abs() <= FUZZY_EPSILON
    }
}

/// A finite set of tags, stored as ranks into the owning [`TagAlgebra`]'s
/// universe. Rank 0 is the order-maximal tag.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagSet(BTreeSet<usize>);

impl TagSet {
    pub fn empty() -> TagSet {
        TagSet(BTreeSet::new())
    }

    pub fn from_ranks(ranks: impl IntoIterator<Item = usize>) -> TagSet {
        TagSet(ranks.into_iter().collect())
    }

    pub fn ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains_rank(&self, rank: usize) -> bool {
        self.0.contains(&rank)
    }

    pub fn is_subset(&self, other: &TagSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// The order-minimal tag, i.e. the one with the largest rank.
    pub fn least(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

/// Set-valued labels over a totally ordered tag universe.
///
/// Support keeps only the least tag of the union, aggregation is union,
/// conflict is set difference. Sets are ordered by inclusion, so the lattice
/// bottom is the empty set and the lattice top is the whole universe; the
/// assured test checks membership of the order-maximal tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagAlgebra {
    tags: Vec<String>,
}

impl TagAlgebra {
    /// `tags` lists the universe from the greatest tag down to the least.
    pub fn new(tags: Vec<String>) -> Result<TagAlgebra, AlgebraError> {
        if tags.is_empty() {
            return Err(AlgebraError::EmptyUniverse);
        }
        let mut seen = BTreeSet::new();
        for tag in &tags {
            if !seen.insert(tag.as_str()) {
                return Err(AlgebraError::DuplicateTag(tag.clone()));
            }
        }
        Ok(TagAlgebra { tags })
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn rank(&self, tag: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }

    pub fn tag_name(&self, rank: usize) -> Option<&str> {
        self.tags.get(rank).map(String::as_str)
    }

    /// Builds a set from tag names, failing on the first unknown tag.
    pub fn set_of<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<TagSet, String> {
        names
            .into_iter()
            .map(|name| self.rank(name).ok_or_else(|| name.to_string()))
            .collect::<Result<BTreeSet<_>, _>>()
            .map(TagSet)
    }

    /// Tag names of `set`, greatest first.
    pub fn names(&self, set: &TagSet) -> Vec<String> {
        set.ranks()
            .filter_map(|r| self.tag_name(r))
            .map(str::to_string)
            .collect()
    }

    pub fn render(&self, set: &TagSet) -> String {
        format!("{{{}}}", self.names(set).join(", "))
    }
}

impl LabelAlgebra for TagAlgebra {
    type Label = TagSet;

    fn top(&self) -> TagSet {
        TagSet::from_ranks(0..self.tags.len())
    }

    fn bottom(&self) -> TagSet {
        TagSet::empty()
    }

    fn leq(&self, a: &TagSet, b: &TagSet) -> bool {
        a.is_subset(b)
    }

    fn support(&self, a: &TagSet, b: &TagSet) -> TagSet {
        let least = a.least().into_iter().chain(b.least()).max();
        TagSet::from_ranks(least)
    }

    fn aggregate(&self, a: &TagSet, b: &TagSet) -> TagSet {
        TagSet(a.0.union(&b.0).copied().collect())
    }

    fn conflict(&self, a: &TagSet, b: &TagSet) -> TagSet {
        TagSet(a.0.difference(&b.0).copied().collect())
    }

    fn contains(&self, x: &TagSet) -> bool {
        x.ranks().all(|r| r < self.tags.len())
    }

    fn reaches_top(&self, x: &TagSet) -> bool {
        *x == self.top() || x.contains_rank(0)
    }

    fn distance(&self, a: &TagSet, b: &TagSet) -> f64 {
        a.0.symmetric_difference(&b.0).count() as f64
    }
}

/// A label of any built-in algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Fuzzy(Fuzzy),
    Tags(TagSet),
}

impl Label {
    pub fn as_fuzzy(&self) -> Option<Fuzzy> {
        match self {
            Label::Fuzzy(v) => Some(*v),
            Label::Tags(_) => None,
        }
    }

    pub fn as_tags(&self) -> Option<&TagSet> {
        match self {
            Label::Tags(t) => Some(t),
            Label::Fuzzy(_) => None,
        }
    }
}

impl From<Fuzzy> for Label {
    fn from(v: Fuzzy) -> Self {
        Label::Fuzzy(v)
    }
}

impl From<TagSet> for Label {
    fn from(t: TagSet) -> Self {
        Label::Tags(t)
    }
}

/// The domain and operators of one configured algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraKind {
    Fuzzy(FuzzyAlgebra),
    Tags(TagAlgebra),
}

/// A named algebra in a framework configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraDecl {
    pub name: String,
    pub kind: AlgebraKind,
}

impl AlgebraDecl {
    pub fn fuzzy(name: impl Into<String>) -> AlgebraDecl {
        AlgebraDecl {
            name: name.into(),
            kind: AlgebraKind::Fuzzy(FuzzyAlgebra),
        }
    }

    pub fn tags(name: impl Into<String>, tags: Vec<String>) -> Result<AlgebraDecl, AlgebraError> {
        Ok(AlgebraDecl {
            name: name.into(),
            kind: AlgebraKind::Tags(TagAlgebra::new(tags)?),
        })
    }

    pub fn top(&self) -> Label {
        match &self.kind {
            AlgebraKind::Fuzzy(a) => a.top().into(),
            AlgebraKind::Tags(a) => a.top().into(),
        }
    }

    pub fn bottom(&self) -> Label {
        match &self.kind {
            AlgebraKind::Fuzzy(a) => a.bottom().into(),
            AlgebraKind::Tags(a) => a.bottom().into(),
        }
    }

    /// Whether `label` belongs to this algebra's domain.
    pub fn admits(&self, label: &Label) -> bool {
        match (&self.kind, label) {
            (AlgebraKind::Fuzzy(a), Label::Fuzzy(v)) => a.contains(v),
            (AlgebraKind::Tags(a), Label::Tags(t)) => a.contains(t),
            _ => false,
        }
    }

    pub fn apply(&self, op: OpKind, a: &Label, b: &Label) -> Result<Label, AlgebraError> {
        match (&self.kind, a, b) {
            (AlgebraKind::Fuzzy(alg), Label::Fuzzy(x), Label::Fuzzy(y)) => {
                Ok(alg.apply(op, x, y).into())
            }
            (AlgebraKind::Tags(alg), Label::Tags(x), Label::Tags(y)) => {
                Ok(alg.apply(op, x, y).into())
            }
            _ => Err(AlgebraError::KindMismatch {
                algebra: self.name.clone(),
            }),
        }
    }

    pub fn render(&self, label: &Label) -> String {
        match (&self.kind, label) {
            (AlgebraKind::Tags(alg), Label::Tags(t)) => alg.render(t),
            (_, Label::Fuzzy(v)) => v.to_string(),
            (_, Label::Tags(t)) => format!("{t:?}"),
        }
    }
}

/// One label per configured algebra, in declaration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelVector(pub Vec<Label>);

impl LabelVector {
    pub fn new(labels: Vec<Label>) -> LabelVector {
        LabelVector(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Label> {
        self.0.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Label> {
        self.0.iter()
    }

    /// Checks arity and per-component domain membership.
    pub fn conforms_to(&self, algebras: &[AlgebraDecl]) -> Result<(), AlgebraError> {
        if self.len() != algebras.len() {
            return Err(AlgebraError::ArityMismatch {
                expected: algebras.len(),
                found: self.len(),
            });
        }
        for (alg, label) in algebras.iter().zip(&self.0) {
            if !alg.admits(label) {
                return Err(AlgebraError::KindMismatch {
                    algebra: alg.name.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Applies the operator `op` of each algebra to the matching components.
pub fn vector_apply(
    algebras: &[AlgebraDecl],
    op: OpKind,
    a: &LabelVector,
    b: &LabelVector,
) -> Result<LabelVector, AlgebraError> {
    for v in [a, b] {
        if v.len() != algebras.len() {
            return Err(AlgebraError::ArityMismatch {
                expected: algebras.len(),
                found: v.len(),
            });
        }
    }
    algebras
        .iter()
        .zip(a.iter().zip(b.iter()))
        .map(|(alg, (x, y))| alg.apply(op, x, y))
        .collect::<Result<Vec<_>, _>>()
        .map(LabelVector)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("label vector has {found} components but {expected} algebras are configured")]
    ArityMismatch { expected: usize, found: usize },
    #[error("label does not belong to the domain of algebra `{algebra}`")]
    KindMismatch { algebra: String },
    #[error("tag universe must declare at least one tag")]
    EmptyUniverse,
    #[error("tag `{0}` is declared twice")]
    DuplicateTag(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: f64) -> Fuzzy {
        Fuzzy::new(v).unwrap()
    }

    fn intuition() -> TagAlgebra {
        TagAlgebra::new(["PL", "NG", "FCH", "PCH"].map(String::from).to_vec()).unwrap()
    }

    fn set(alg: &TagAlgebra, names: &[&str]) -> TagSet {
        alg.set_of(names.iter().copied()).unwrap()
    }

    #[test]
    fn fuzzy_constructor_rejects_out_of_range() {
        assert!(Fuzzy::new(1.2).is_none());
        assert!(Fuzzy::new(-0.1).is_none());
        assert!(Fuzzy::new(f64::NAN).is_none());
        assert_eq!(Fuzzy::new(1.0), Some(Fuzzy::ONE));
    }

    #[test]
    fn fuzzy_support_examples() {
        let a = FuzzyAlgebra;
        assert!((a.support(&f(0.8), &f(0.7)).value() - 0.56).abs() < 1e-12);
        assert_eq!(a.support(&f(0.37), &Fuzzy::ONE), f(0.37));
        assert_eq!(a.support(&f(0.37), &Fuzzy::ZERO), Fuzzy::ZERO);
    }

    #[test]
    fn fuzzy_aggregate_examples() {
        let a = FuzzyAlgebra;
        assert!((a.aggregate(&f(0.4), &f(0.6)).value() - 0.76).abs() < 1e-12);
        assert_eq!(a.aggregate(&f(0.37), &Fuzzy::ZERO), f(0.37));
        // 0.336 + 0.3 - 0.1008, computed in exact rationals: 5352/10000.
        assert!((a.aggregate(&f(0.336), &f(0.3)).value() - 0.5352).abs() < 1e-12);
    }

    #[test]
    fn fuzzy_conflict_examples() {
        let a = FuzzyAlgebra;
        assert!((a.conflict(&f(0.56), &f(0.224)).value() - 0.336).abs() < 1e-12);
        assert_eq!(a.conflict(&f(0.2), &f(0.5)), Fuzzy::ZERO);
        assert_eq!(a.conflict(&f(0.37), &Fuzzy::ZERO), f(0.37));
    }

    #[test]
    fn aggregate_stays_in_unit_interval() {
        let a = FuzzyAlgebra;
        assert_eq!(a.aggregate(&Fuzzy::ONE, &Fuzzy::ONE), Fuzzy::ONE);
        assert!(a.contains(&a.aggregate(&f(0.9999999999999999), &f(0.9999999999999999))));
    }

    #[test]
    fn intuition_support_examples() {
        let b = intuition();
        assert_eq!(b.support(&set(&b, &["PL"]), &set(&b, &["FCH"])), set(&b, &["FCH"]));
        assert_eq!(b.support(&set(&b, &["PL"]), &set(&b, &["PL"])), set(&b, &["PL"]));
        assert_eq!(
            b.support(&set(&b, &["PL", "NG"]), &set(&b, &["FCH", "PCH"])),
            set(&b, &["PCH"])
        );
        assert_eq!(b.support(&TagSet::empty(), &TagSet::empty()), TagSet::empty());
    }

    #[test]
    fn intuition_aggregate_examples() {
        let b = intuition();
        assert_eq!(
            b.aggregate(&set(&b, &["PL"]), &set(&b, &["FCH"])),
            set(&b, &["PL", "FCH"])
        );
        let x = set(&b, &["NG", "PCH"]);
        assert_eq!(b.aggregate(&TagSet::empty(), &x), x);
        assert_eq!(b.aggregate(&set(&b, &["NG"]), &set(&b, &["NG"])), set(&b, &["NG"]));
    }

    #[test]
    fn intuition_conflict_examples() {
        let b = intuition();
        assert_eq!(b.conflict(&set(&b, &["PL"]), &set(&b, &["NG"])), set(&b, &["PL"]));
        let x = set(&b, &["FCH", "PCH"]);
        assert_eq!(b.conflict(&x, &TagSet::empty()), x);
        assert_eq!(b.conflict(&set(&b, &["PL", "FCH"]), &set(&b, &["FCH"])), set(&b, &["PL"]));
    }

    #[test]
    fn tag_universe_validation() {
        assert_eq!(TagAlgebra::new(vec![]), Err(AlgebraError::EmptyUniverse));
        assert_eq!(
            TagAlgebra::new(vec!["A".into(), "A".into()]),
            Err(AlgebraError::DuplicateTag("A".into()))
        );
        assert_eq!(intuition().set_of(["PL", "XX"]), Err("XX".to_string()));
    }

    #[test]
    fn reaches_top_uses_maximal_tag_membership() {
        let b = intuition();
        assert!(b.reaches_top(&set(&b, &["PL", "FCH"])));
        assert!(!b.reaches_top(&set(&b, &["NG", "FCH"])));
        assert!(b.reaches_top(&b.top()));
        assert!(FuzzyAlgebra.reaches_top(&Fuzzy::ONE));
        assert!(!FuzzyAlgebra.reaches_top(&f(0.99)));
    }

    #[test]
    fn render_orders_tags_greatest_first() {
        let b = intuition();
        assert_eq!(b.render(&set(&b, &["FCH", "PL"])), "{PL, FCH}");
        assert_eq!(b.render(&TagSet::empty()), "{}");
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(0.5352000000000001), "0.5352");
        assert_eq!(format_decimal(1.0), "1");
        assert_eq!(format_decimal(0.0), "0");
        assert_eq!(format_decimal(0.336), "0.336");
    }

    fn algebras() -> Vec<AlgebraDecl> {
        vec![
            AlgebraDecl::fuzzy("relevance"),
            AlgebraDecl::tags("intuition", ["PL", "NG", "FCH", "PCH"].map(String::from).to_vec())
                .unwrap(),
        ]
    }

    fn vector(v: f64, tags: &[&str]) -> LabelVector {
        let b = intuition();
        LabelVector(vec![f(v).into(), set(&b, tags).into()])
    }

    #[test]
    fn vector_support_is_componentwise() {
        let out = vector_apply(
            &algebras(),
            OpKind::Support,
            &vector(0.8, &["PL"]),
            &vector(0.7, &["PL"]),
        )
        .unwrap();
        assert!((out.0[0].as_fuzzy().unwrap().value() - 0.56).abs() < 1e-12);
        assert_eq!(out.0[1], vector(0.0, &["PL"]).0[1]);
    }

    #[test]
    fn vector_identities() {
        let algs = algebras();
        let v = vector(0.42, &["NG", "PCH"]);
        let zero = vector(0.0, &[]);
        assert_eq!(vector_apply(&algs, OpKind::Aggregate, &zero, &v).unwrap(), v);
        assert_eq!(vector_apply(&algs, OpKind::Conflict, &v, &zero).unwrap(), v);
    }

    #[test]
    fn vector_arity_and_kind_errors() {
        let algs = algebras();
        let short = LabelVector(vec![f(0.5).into()]);
        assert_eq!(
            vector_apply(&algs, OpKind::Support, &short, &vector(0.1, &[])),
            Err(AlgebraError::ArityMismatch { expected: 2, found: 1 })
        );
        let swapped = LabelVector(vec![TagSet::empty().into(), f(0.5).into()]);
        assert!(matches!(
            vector_apply(&algs, OpKind::Support, &swapped, &swapped),
            Err(AlgebraError::KindMismatch { .. })
        ));
        assert!(swapped.conforms_to(&algs).is_err());
        assert!(vector(0.3, &["PL"]).conforms_to(&algs).is_ok());
    }
}
