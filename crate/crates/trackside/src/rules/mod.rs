//! Horn-rule language and forward-chaining engine with an extensible
//! built-in registry.
//!
//! Grammar (normative):
//!
//! ```text
//! file    := (rule (separator rule)*)? ;
//! rule    := label? body "->" head ;
//! label   := "[" IDENT "]" ;
//! body    := atom ("^" atom)* ;
//! head    := atom ("^" atom)* ;            # class/property atoms only
//! atom    := name "(" arg ("," arg)* ")" ;
//! name    := IDENT (":" IDENT)? ;          # unprefixed names normalize to dbb:
//! arg     := VARIABLE | name | STRING | NUMBER ;
//! separator := "." | blank line ;
//! ```
//!
//! `#` starts a line comment. Variables match `?[A-Za-z][A-Za-z0-9_]*`.

mod engine;
mod parser;

pub use engine::{evaluate_body, run_to_fixpoint, run_to_fixpoint_observed, EngineError, RunStats};
pub use parser::{parse_rules, ParseError};

use std::collections::BTreeMap;
use std::fmt;

use crate::kb::{KnowledgeBase, Literal, Name, Object};

/// Argument of a rule atom.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Variable(String),
    Individual(Name),
    LiteralValue(Literal),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(v) => write!(f, "?{v}"),
            Term::Individual(n) => write!(f, "{n}"),
            Term::LiteralValue(Literal::Real(v)) => write!(f, "{v:?}"),
            Term::LiteralValue(Literal::Str(s)) => write!(f, "\"{s}\""),
            Term::LiteralValue(Literal::Bool(b)) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleAtom {
    Class { class: Name, arg: Term },
    Property { prop: Name, subject: Term, object: Term },
    Builtin { name: Name, args: Vec<Term> },
}

impl fmt::Display for RuleAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleAtom::Class { class, arg } => write!(f, "{class}({arg})"),
            RuleAtom::Property { prop, subject, object } => {
                write!(f, "{prop}({subject}, {object})")
            }
            RuleAtom::Builtin { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl RuleAtom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            RuleAtom::Class { arg, .. } => vec![arg],
            RuleAtom::Property { subject, object, .. } => vec![subject, object],
            RuleAtom::Builtin { args, .. } => args.iter().collect(),
        }
    }

    pub fn variables(&self) -> Vec<&str> {
        self.terms()
            .into_iter()
            .filter_map(|t| match t {
                Term::Variable(v) => Some(v.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// A parsed Horn clause: built-ins may appear in the body only, and
/// every head variable occurs in the body.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub label: String,
    pub body: Vec<RuleAtom>,
    pub head: Vec<RuleAtom>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.label.is_empty() {
            write!(f, "[{}] ", self.label)?;
        }
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, " ^ ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, " -> ")?;
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                write!(f, " ^ ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// How a built-in consumes its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinBehavior {
    /// All arguments must be bound; the built-in filters bindings.
    Test,
    /// Unbound arguments are bound by enumerating KB individuals.
    Relational,
    /// May create new individuals and bind them to unbound arguments.
    Generative,
}

/// Argument slot passed to a built-in evaluator.
#[derive(Debug, Clone)]
pub enum ArgSlot {
    Bound(Object),
    Unbound,
}

/// A built-in evaluator. `eval` returns one row per solution; each row
/// carries a value for every argument position (bound positions echo
/// their input).
pub trait BuiltinEval {
    fn behavior(&self) -> BuiltinBehavior;
    fn arity(&self) -> usize;
    fn eval(
        &self,
        kb: &mut KnowledgeBase,
        args: &[ArgSlot],
    ) -> Result<Vec<Vec<Object>>, EngineError>;
}

/// Named built-ins addressable from rule bodies.
#[derive(Default)]
pub struct BuiltinRegistry {
    entries: BTreeMap<Name, Box<dyn BuiltinEval>>,
}

impl BuiltinRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding only the standard `swrlb` comparison built-ins.
    pub fn with_comparisons() -> Self {
        let mut r = Self::new();
        for (name, op) in [
            ("greaterThan", Comparison::Gt),
            ("lessThan", Comparison::Lt),
            ("greaterThanOrEqual", Comparison::Ge),
            ("lessThanOrEqual", Comparison::Le),
            ("equal", Comparison::Eq),
        ] {
            r.register(Name::new("swrlb", name), Box::new(op));
        }
        r
    }

    pub fn register(&mut self, name: Name, eval: Box<dyn BuiltinEval>) {
        self.entries.insert(name, eval);
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.entries.contains_key(name)
    }

    pub fn get(&self, name: &Name) -> Option<&dyn BuiltinEval> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<Name> {
        self.entries.keys().cloned().collect()
    }

    /// True iff `prefix` is reserved for built-ins.
    pub fn is_builtin_prefix(&self, prefix: &str) -> bool {
        prefix == "swrlb" || prefix.starts_with("3D_swrlb")
            || self.entries.keys().any(|n| n.prefix == prefix)
    }
}

impl fmt::Debug for BuiltinRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BuiltinRegistry")
            .field("names", &self.names())
            .finish()
    }
}

/// Standard numeric comparisons over real literals (Test behavior).
#[derive(Debug, Clone, Copy)]
pub enum Comparison {
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
}

impl BuiltinEval for Comparison {
    fn behavior(&self) -> BuiltinBehavior {
        BuiltinBehavior::Test
    }

    fn arity(&self) -> usize {
        2
    }

    fn eval(
        &self,
        _kb: &mut KnowledgeBase,
        args: &[ArgSlot],
    ) -> Result<Vec<Vec<Object>>, EngineError> {
        let vals: Vec<&Object> = args
            .iter()
            .map(|a| match a {
                ArgSlot::Bound(v) => Ok(v),
                ArgSlot::Unbound => Err(EngineError::UnboundTestArgument),
            })
            .collect::<Result<_, _>>()?;
        let a = vals[0]
            .as_literal()
            .and_then(Literal::as_real)
            .ok_or(EngineError::NonNumericComparison)?;
        let b = vals[1]
            .as_literal()
            .and_then(Literal::as_real)
            .ok_or(EngineError::NonNumericComparison)?;
        let pass = match self {
            Comparison::Gt => a > b,
            Comparison::Lt => a < b,
            Comparison::Ge => a >= b,
            Comparison::Le => a <= b,
            Comparison::Eq => a == b,
        };
        if pass {
            Ok(vec![vals.into_iter().cloned().collect()])
        } else {
            Ok(vec![])
        }
    }
}

/// Declare any class or property named by the rules but unknown to the
/// KB: classes become subclasses of `dbb:DomainConcept`, properties are
/// registered flat. Logged as warnings so typos stay visible.
pub fn ensure_rule_vocabulary(kb: &mut KnowledgeBase, rules: &[Rule]) {
    let domain_concept = Name::dbb("DomainConcept");
    if !kb.is_class(&domain_concept) {
        kb.declare_class(domain_concept.clone(), &[])
            .expect("root class declaration cannot fail");
    }
    for rule in rules {
        for atom in rule.body.iter().chain(&rule.head) {
            match atom {
                RuleAtom::Class { class, .. } => {
                    if !kb.is_class(class) {
                        log::warn!(
                            "rule `{}` references unknown class {class}; declaring it under {domain_concept}",
                            rule.label
                        );
                        kb.declare_class(class.clone(), std::slice::from_ref(&domain_concept))
                            .expect("DomainConcept is declared in every schema");
                    }
                }
                RuleAtom::Property { prop, .. } => {
                    if !kb.is_property(prop) {
                        log::warn!(
                            "rule `{}` references unknown property {prop}; declaring it",
                            rule.label
                        );
                        kb.declare_property(prop.clone(), None);
                    }
                }
                RuleAtom::Builtin { .. } => {}
            }
        }
    }
}
