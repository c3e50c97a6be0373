//! In-memory knowledge base: class hierarchy, individuals, property
//! assertions and pattern queries with subsumption closure.
//!
//! The engine only ever adds facts (no retraction, no negation), so the
//! fact set grows monotonically and fixpoint iteration terminates.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Default namespace prefix for the domain vocabulary.
pub const DBB: &str = "dbb";

/// A prefixed name, rendered `prefix:local`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    pub prefix: String,
    pub local: String,
}

impl Name {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Self {
        let n = Name {
            prefix: prefix.into(),
            local: local.into(),
        };
        debug_assert!(!n.local.is_empty());
        n
    }

    /// Name in the default `dbb` namespace.
    pub fn dbb(local: impl Into<String>) -> Self {
        Name::new(DBB, local)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

/// Data-property value. Reals are SI (meters unless stated) and must be
/// finite when stored.
#[derive(Debug, Clone)]
pub enum Literal {
    Real(f64),
    Str(String),
    Bool(bool),
}

impl Literal {
    fn rank(&self) -> u8 {
        match self {
            Literal::Real(_) => 0,
            Literal::Str(_) => 1,
            Literal::Bool(_) => 2,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Literal::Real(v) => Some(*v),
            _ => None,
        }
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Literal {}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Literal::Real(a), Literal::Real(b)) => a.total_cmp(b),
            (Literal::Str(a), Literal::Str(b)) => a.cmp(b),
            (Literal::Bool(a), Literal::Bool(b)) => a.cmp(b),
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Real(v) => write!(f, "\"{v:.6}\"^^real"),
            Literal::Str(s) => write!(f, "\"{s}\"^^string"),
            Literal::Bool(b) => write!(f, "\"{b}\"^^bool"),
        }
    }
}

/// Fact predicate: a named property or the reserved type predicate,
/// rendered `rdf:type`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    Type,
    Property(Name),
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Type => write!(f, "rdf:type"),
            Predicate::Property(p) => write!(f, "{p}"),
        }
    }
}

/// Fact object: another individual, a class (for type facts) or a literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Object {
    Individual(Name),
    Literal(Literal),
}

impl Object {
    pub fn as_individual(&self) -> Option<&Name> {
        match self {
            Object::Individual(n) => Some(n),
            Object::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Object::Literal(l) => Some(l),
            Object::Individual(_) => None,
        }
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Individual(n) => write!(f, "{n}"),
            Object::Literal(l) => write!(f, "{l}"),
        }
    }
}

/// A single triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Assertion {
    pub subject: Name,
    pub predicate: Predicate,
    pub object: Object,
}

impl Assertion {
    pub fn typed(subject: Name, class: Name) -> Self {
        Assertion {
            subject,
            predicate: Predicate::Type,
            object: Object::Individual(class),
        }
    }

    pub fn property(subject: Name, prop: Name, object: Name) -> Self {
        Assertion {
            subject,
            predicate: Predicate::Property(prop),
            object: Object::Individual(object),
        }
    }

    pub fn data(subject: Name, prop: Name, value: Literal) -> Self {
        Assertion {
            subject,
            predicate: Predicate::Property(prop),
            object: Object::Literal(value),
        }
    }
}

/// Pattern slot: a variable or a constant.
#[derive(Debug, Clone)]
pub enum PatternSlot {
    Var(String),
    Individual(Name),
    Literal(Literal),
}

#[derive(Debug, Clone)]
pub enum PredicateSlot {
    Var(String),
    Type,
    Property(Name),
}

/// Assertion with 0-3 variable positions.
#[derive(Debug, Clone)]
pub struct Pattern {
    pub subject: PatternSlot,
    pub predicate: PredicateSlot,
    pub object: PatternSlot,
}

/// Variable assignment produced by a query.
pub type Binding = BTreeMap<String, Object>;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("unknown parent class {0}")]
    UnknownParent(Name),
    #[error("declaring {0} would create a class cycle")]
    ClassCycle(Name),
    #[error("undeclared class {0}")]
    UndeclaredClass(Name),
    #[error("undeclared property {0}")]
    UndeclaredProperty(Name),
    #[error("unknown individual {0}")]
    UnknownIndividual(Name),
    #[error("non-finite real literal in fact about {0}")]
    NonFiniteLiteral(Name),
}

/// Ontology schema plus the growing fact set.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    /// class -> direct parents (acyclic)
    classes: BTreeMap<Name, BTreeSet<Name>>,
    /// property -> optional parent property
    properties: BTreeMap<Name, Option<Name>>,
    individuals: BTreeSet<Name>,
    facts: BTreeSet<Assertion>,
    /// predicate -> (subject, object), kept in sync with `facts`
    by_predicate: BTreeMap<Predicate, BTreeSet<(Name, Object)>>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty KB seeded with the five top-level classes, the named
    /// object properties, the geometry/box vocabulary and the default
    /// trackside object classes.
    pub fn with_schema() -> Self {
        let mut kb = Self::new();
        let top = [
            "Algorithm",
            "Geometry",
            "DomainConcept",
            "Characteristics",
            "Scene",
        ];
        for c in top {
            kb.declare_class(Name::dbb(c), &[]).unwrap();
        }
        for (c, p) in [
            ("Vertical_BoundingBox", "Geometry"),
            ("Horizontal_BoundingBox", "Geometry"),
            ("Ground", "Geometry"),
            ("Furniture", "DomainConcept"),
            ("FacilityElement", "DomainConcept"),
            ("Mast", "FacilityElement"),
            ("Schaltanlage", "FacilityElement"),
            ("SignalCandidate", "FacilityElement"),
            ("Signal", "FacilityElement"),
            ("MainSignal", "Signal"),
            ("DistantSignal", "Signal"),
        ] {
            kb.declare_class(Name::dbb(c), &[Name::dbb(p)]).unwrap();
        }
        for p in [
            "hasTopologicRelation",
            "IsDeseignedFor",
            "hasGeometry",
            "hasCharacteristics",
        ] {
            kb.declare_property(Name::dbb(p), None);
        }
        // Topological relations asserted by the built-ins.
        for p in [
            "Intersect",
            "Touch",
            "Upper",
            "Perpendicular",
            "IsDistantFrom",
            "IsConnected",
        ] {
            kb.declare_property(Name::dbb(p), Some(Name::dbb("hasTopologicRelation")));
        }
        // Data properties populated by detection.
        for p in [
            "hasHeight",
            "hasWidth",
            "hasDepth",
            "hasFootprint",
            "hasCentroidX",
            "hasCentroidY",
            "hasCentroidZ",
            "hasPointCount",
            "hasPointCloudDirectory",
        ] {
            kb.declare_property(Name::dbb(p), None);
        }
        kb
    }

    pub fn declare_class(&mut self, class: Name, parents: &[Name]) -> Result<(), KbError> {
        for p in parents {
            if *p == class {
                return Err(KbError::ClassCycle(class));
            }
            if !self.classes.contains_key(p) {
                return Err(KbError::UnknownParent(p.clone()));
            }
            if self.is_subclass(p, &class) {
                return Err(KbError::ClassCycle(class));
            }
        }
        self.classes
            .entry(class)
            .or_default()
            .extend(parents.iter().cloned());
        Ok(())
    }

    pub fn declare_property(&mut self, prop: Name, parent: Option<Name>) {
        self.properties.entry(prop).or_insert(parent);
    }

    pub fn register_individual(&mut self, ind: Name) -> bool {
        self.individuals.insert(ind)
    }

    pub fn is_class(&self, name: &Name) -> bool {
        self.classes.contains_key(name)
    }

    pub fn is_property(&self, name: &Name) -> bool {
        self.properties.contains_key(name)
    }

    pub fn is_individual(&self, name: &Name) -> bool {
        self.individuals.contains(name)
    }

    pub fn classes(&self) -> impl Iterator<Item = &Name> {
        self.classes.keys()
    }

    /// Reflexive-transitive subclass test.
    pub fn is_subclass(&self, sub: &Name, sup: &Name) -> bool {
        if sub == sup {
            return true;
        }
        let mut stack = vec![sub];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if let Some(parents) = self.classes.get(c) {
                for p in parents {
                    if p == sup {
                        return true;
                    }
                    if seen.insert(p) {
                        stack.push(p);
                    }
                }
            }
        }
        false
    }

    /// All declared classes subsumed by `class`, including itself.
    pub fn subclasses_of(&self, class: &Name) -> BTreeSet<Name> {
        self.classes
            .keys()
            .filter(|c| self.is_subclass(c, class))
            .cloned()
            .collect()
    }

    /// Longest parent chain above `class`; roots have depth 0.
    pub fn class_depth(&self, class: &Name) -> usize {
        match self.classes.get(class) {
            Some(parents) if !parents.is_empty() => {
                1 + parents.iter().map(|p| self.class_depth(p)).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// Add a fact. Returns `true` iff it was new. Type facts register
    /// their subject as an individual.
    pub fn assert_fact(&mut self, fact: Assertion) -> Result<bool, KbError> {
        match (&fact.predicate, &fact.object) {
            (Predicate::Type, Object::Individual(class)) => {
                if !self.is_class(class) {
                    return Err(KbError::UndeclaredClass(class.clone()));
                }
                self.individuals.insert(fact.subject.clone());
            }
            (Predicate::Type, Object::Literal(_)) => {
                return Err(KbError::UndeclaredClass(fact.subject.clone()));
            }
            (Predicate::Property(p), obj) => {
                if !self.is_property(p) {
                    return Err(KbError::UndeclaredProperty(p.clone()));
                }
                if !self.individuals.contains(&fact.subject) {
                    return Err(KbError::UnknownIndividual(fact.subject.clone()));
                }
                match obj {
                    Object::Individual(o) => {
                        if !self.individuals.contains(o) {
                            return Err(KbError::UnknownIndividual(o.clone()));
                        }
                    }
                    Object::Literal(Literal::Real(v)) if !v.is_finite() => {
                        return Err(KbError::NonFiniteLiteral(fact.subject.clone()));
                    }
                    Object::Literal(_) => {}
                }
            }
        }
        let new = self.facts.insert(fact.clone());
        if new {
            self.by_predicate
                .entry(fact.predicate)
                .or_default()
                .insert((fact.subject, fact.object));
        }
        Ok(new)
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Assertion> {
        self.facts.iter()
    }

    pub fn contains(&self, fact: &Assertion) -> bool {
        self.facts.contains(fact)
    }

    /// True iff `ind` has an asserted type subsumed by `class`.
    pub fn has_type(&self, ind: &Name, class: &Name) -> bool {
        match self.by_predicate.get(&Predicate::Type) {
            Some(set) => set.iter().any(|(s, o)| {
                s == ind
                    && o.as_individual()
                        .is_some_and(|c| self.is_subclass(c, class))
            }),
            None => false,
        }
    }

    /// Sorted individuals of `class`, subsumption closure included.
    pub fn individuals_of(&self, class: &Name) -> Vec<Name> {
        let mut out = BTreeSet::new();
        if let Some(set) = self.by_predicate.get(&Predicate::Type) {
            for (s, o) in set {
                if let Some(c) = o.as_individual() {
                    if self.is_subclass(c, class) {
                        out.insert(s.clone());
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Directly asserted classes of an individual.
    pub fn classes_of(&self, ind: &Name) -> BTreeSet<Name> {
        match self.by_predicate.get(&Predicate::Type) {
            Some(set) => set
                .iter()
                .filter(|(s, _)| s == ind)
                .filter_map(|(_, o)| o.as_individual().cloned())
                .collect(),
            None => BTreeSet::new(),
        }
    }

    /// First stored value of a data property on `ind`.
    pub fn data_value(&self, ind: &Name, prop: &Name) -> Option<&Literal> {
        let set = self.by_predicate.get(&Predicate::Property(prop.clone()))?;
        set.iter()
            .find(|(s, o)| s == ind && o.as_literal().is_some())
            .and_then(|(_, o)| o.as_literal())
    }

    /// Match a pattern against the stored facts. Type patterns with a
    /// constant class match subclass instances too. Results are sorted
    /// and duplicate-free.
    pub fn query(&self, pattern: &Pattern) -> Vec<Binding> {
        let mut out = BTreeSet::new();
        for fact in &self.facts {
            if let Some(b) = self.match_fact(pattern, fact) {
                out.insert(b);
            }
        }
        out.into_iter().collect()
    }

    fn match_fact(&self, pattern: &Pattern, fact: &Assertion) -> Option<Binding> {
        let mut binding = Binding::new();

        match &pattern.predicate {
            PredicateSlot::Type => {
                if fact.predicate != Predicate::Type {
                    return None;
                }
            }
            PredicateSlot::Property(p) => {
                if fact.predicate != Predicate::Property(p.clone()) {
                    return None;
                }
            }
            PredicateSlot::Var(v) => match &fact.predicate {
                Predicate::Property(p) => {
                    binding.insert(v.clone(), Object::Individual(p.clone()));
                }
                Predicate::Type => return None,
            },
        }

        match &pattern.subject {
            PatternSlot::Individual(n) => {
                if fact.subject != *n {
                    return None;
                }
            }
            PatternSlot::Literal(_) => return None,
            PatternSlot::Var(v) => {
                let val = Object::Individual(fact.subject.clone());
                if let Some(prev) = binding.get(v) {
                    if *prev != val {
                        return None;
                    }
                } else {
                    binding.insert(v.clone(), val);
                }
            }
        }

        let type_pattern = matches!(fact.predicate, Predicate::Type);
        match &pattern.object {
            PatternSlot::Individual(n) => {
                let matched = if type_pattern {
                    // subsumption closure on the class position
                    fact.object
                        .as_individual()
                        .is_some_and(|c| self.is_subclass(c, n))
                } else {
                    fact.object == Object::Individual(n.clone())
                };
                if !matched {
                    return None;
                }
            }
            PatternSlot::Literal(l) => {
                if fact.object != Object::Literal(l.clone()) {
                    return None;
                }
            }
            PatternSlot::Var(v) => {
                let val = fact.object.clone();
                if let Some(prev) = binding.get(v) {
                    if *prev != val {
                        return None;
                    }
                } else {
                    binding.insert(v.clone(), val);
                }
            }
        }

        Some(binding)
    }

    /// One fact per line, tab separated, lexicographically sorted,
    /// newline terminated.
    pub fn dump_triples(&self) -> String {
        let mut lines: Vec<String> = self
            .facts
            .iter()
            .map(|f| format!("{}\t{}\t{}", f.subject, f.predicate, f.object))
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn type_pattern_var(class: &str) -> Pattern {
        Pattern {
            subject: PatternSlot::Var("x".into()),
            predicate: PredicateSlot::Type,
            object: PatternSlot::Individual(Name::dbb(class)),
        }
    }

    #[test]
    fn subclass_chain_transitive() {
        let mut kb = KnowledgeBase::new();
        kb.declare_class(Name::dbb("a"), &[]).unwrap();
        kb.declare_class(Name::dbb("b"), &[Name::dbb("a")]).unwrap();
        kb.declare_class(Name::dbb("c"), &[Name::dbb("b")]).unwrap();
        assert!(kb.is_subclass(&Name::dbb("c"), &Name::dbb("a")));
        assert!(!kb.is_subclass(&Name::dbb("a"), &Name::dbb("c")));
    }

    #[test]
    fn self_parent_is_cycle() {
        let mut kb = KnowledgeBase::new();
        kb.declare_class(Name::dbb("x"), &[]).unwrap();
        let err = kb.declare_class(Name::dbb("x"), &[Name::dbb("x")]);
        assert!(matches!(err, Err(KbError::ClassCycle(_))));
    }

    #[test]
    fn indirect_cycle_rejected() {
        let mut kb = KnowledgeBase::new();
        kb.declare_class(Name::dbb("a"), &[]).unwrap();
        kb.declare_class(Name::dbb("b"), &[Name::dbb("a")]).unwrap();
        let err = kb.declare_class(Name::dbb("a"), &[Name::dbb("b")]);
        assert!(matches!(err, Err(KbError::ClassCycle(_))));
    }

    #[test]
    fn mast_under_facility_element() {
        let kb = KnowledgeBase::with_schema();
        assert!(kb.is_subclass(&Name::dbb("Mast"), &Name::dbb("FacilityElement")));
        assert!(kb.is_subclass(&Name::dbb("Mast"), &Name::dbb("DomainConcept")));
    }

    #[test]
    fn assert_idempotent() {
        let mut kb = KnowledgeBase::with_schema();
        let f = Assertion::typed(Name::dbb("geo_1"), Name::dbb("Geometry"));
        assert!(kb.assert_fact(f.clone()).unwrap());
        assert!(!kb.assert_fact(f).unwrap());
        assert_eq!(kb.fact_count(), 1);
    }

    #[test]
    fn typed_individual_visible_through_subsumption() {
        let mut kb = KnowledgeBase::with_schema();
        kb.assert_fact(Assertion::typed(
            Name::dbb("geo_1"),
            Name::dbb("Vertical_BoundingBox"),
        ))
        .unwrap();
        assert_eq!(kb.individuals_of(&Name::dbb("Geometry")), vec![Name::dbb("geo_1")]);
    }

    #[test]
    fn object_property_needs_registered_individuals() {
        let mut kb = KnowledgeBase::with_schema();
        kb.assert_fact(Assertion::typed(Name::dbb("geo_1"), Name::dbb("Geometry")))
            .unwrap();
        let err = kb.assert_fact(Assertion::property(
            Name::dbb("geo_1"),
            Name::dbb("Upper"),
            Name::dbb("geo_2"),
        ));
        assert!(matches!(err, Err(KbError::UnknownIndividual(_))));
    }

    #[test]
    fn type_query_includes_subclasses() {
        let mut kb = KnowledgeBase::with_schema();
        kb.assert_fact(Assertion::typed(Name::dbb("m1"), Name::dbb("Mast")))
            .unwrap();
        let bindings = kb.query(&type_pattern_var("DomainConcept"));
        assert_eq!(bindings.len(), 1);
        assert_eq!(bindings[0]["x"], Object::Individual(Name::dbb("m1")));
    }

    #[test]
    fn upper_subject_query() {
        let mut kb = KnowledgeBase::with_schema();
        for g in ["geo_1", "geo_2", "geo_3"] {
            kb.assert_fact(Assertion::typed(Name::dbb(g), Name::dbb("Geometry")))
                .unwrap();
        }
        kb.assert_fact(Assertion::property(
            Name::dbb("geo_1"),
            Name::dbb("Upper"),
            Name::dbb("geo_2"),
        ))
        .unwrap();
        kb.assert_fact(Assertion::property(
            Name::dbb("geo_3"),
            Name::dbb("Upper"),
            Name::dbb("geo_2"),
        ))
        .unwrap();
        let bindings = kb.query(&Pattern {
            subject: PatternSlot::Var("x".into()),
            predicate: PredicateSlot::Property(Name::dbb("Upper")),
            object: PatternSlot::Individual(Name::dbb("geo_2")),
        });
        let subjects: Vec<_> = bindings.iter().map(|b| b["x"].clone()).collect();
        assert_eq!(
            subjects,
            vec![
                Object::Individual(Name::dbb("geo_1")),
                Object::Individual(Name::dbb("geo_3"))
            ]
        );
    }

    #[test]
    fn query_on_empty_kb() {
        let kb = KnowledgeBase::with_schema();
        assert!(kb.query(&type_pattern_var("Geometry")).is_empty());
    }

    #[test]
    fn insertion_order_does_not_change_query_results() {
        let facts = [
            Assertion::typed(Name::dbb("b"), Name::dbb("Mast")),
            Assertion::typed(Name::dbb("a"), Name::dbb("Mast")),
            Assertion::typed(Name::dbb("c"), Name::dbb("Schaltanlage")),
        ];
        let mut kb1 = KnowledgeBase::with_schema();
        let mut kb2 = KnowledgeBase::with_schema();
        for f in &facts {
            kb1.assert_fact(f.clone()).unwrap();
        }
        for f in facts.iter().rev() {
            kb2.assert_fact(f.clone()).unwrap();
        }
        let p = type_pattern_var("DomainConcept");
        assert_eq!(kb1.query(&p), kb2.query(&p));
        assert_eq!(kb1.dump_triples(), kb2.dump_triples());
    }

    #[test]
    fn dump_format() {
        let mut kb = KnowledgeBase::with_schema();
        kb.assert_fact(Assertion::typed(Name::dbb("geo_1"), Name::dbb("Mast")))
            .unwrap();
        kb.assert_fact(Assertion::data(
            Name::dbb("geo_1"),
            Name::dbb("hasHeight"),
            Literal::Real(5.7),
        ))
        .unwrap();
        let dump = kb.dump_triples();
        assert_eq!(
            dump,
            "dbb:geo_1\tdbb:hasHeight\t\"5.700000\"^^real\ndbb:geo_1\trdf:type\tdbb:Mast\n"
        );
    }

    #[test]
    fn asserted_fact_round_trips_through_query() {
        let mut kb = KnowledgeBase::with_schema();
        kb.assert_fact(Assertion::typed(Name::dbb("g"), Name::dbb("Geometry")))
            .unwrap();
        kb.assert_fact(Assertion::data(
            Name::dbb("g"),
            Name::dbb("hasHeight"),
            Literal::Real(2.0),
        ))
        .unwrap();
        for fact in kb.facts().cloned().collect::<Vec<_>>() {
            let pat = Pattern {
                subject: PatternSlot::Individual(fact.subject.clone()),
                predicate: match &fact.predicate {
                    Predicate::Type => PredicateSlot::Type,
                    Predicate::Property(p) => PredicateSlot::Property(p.clone()),
                },
                object: PatternSlot::Var("o".into()),
            };
            let hits = kb.query(&pat);
            assert!(hits.iter().any(|b| b["o"] == fact.object));
        }
    }
}
