//! Left-to-right body evaluation and naive forward chaining to fixpoint.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::kb::{
    Binding, KbError, KnowledgeBase, Name, Object, Pattern, PatternSlot, PredicateSlot,
};

use super::{ArgSlot, BuiltinBehavior, BuiltinRegistry, Rule, RuleAtom, Term};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unknown built-in {0}")]
    UnknownBuiltin(Name),
    #[error("test built-in invoked with an unbound argument")]
    UnboundTestArgument,
    #[error("comparison built-in applied to a non-numeric argument")]
    NonNumericComparison,
    #[error("built-in argument must be an individual, got a literal")]
    ExpectedIndividual,
    #[error("built-in argument must be bound: {0}")]
    RequiredArgumentUnbound(String),
    #[error("individual {0} carries no bounding-box data properties")]
    MissingBox(Name),
    #[error("scene individual {0} has no hasPointCloudDirectory property")]
    MissingDirectory(Name),
    #[error("scene directory error: {0}")]
    Cloud(#[from] crate::cloud::CloudError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("fixpoint not reached after {max_iters} passes; still-firing rules: {still_firing}")]
    FixpointNotReached {
        max_iters: usize,
        still_firing: String,
    },
}

/// Outcome of a fixpoint run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    /// Number of full passes executed (the final, quiescent pass included).
    pub iterations: usize,
    /// Facts added across the run, built-in assertions included.
    pub facts_added: usize,
    /// Per-rule count of new head facts, keyed by rule label.
    pub rule_fires: BTreeMap<String, usize>,
}

fn resolve(term: &Term, binding: &Binding) -> Option<Object> {
    match term {
        Term::Variable(v) => binding.get(v).cloned(),
        Term::Individual(n) => Some(Object::Individual(n.clone())),
        Term::LiteralValue(l) => Some(Object::Literal(l.clone())),
    }
}

fn extend(binding: &Binding, var: &str, value: Object) -> Option<Binding> {
    match binding.get(var) {
        Some(prev) if *prev != value => None,
        Some(_) => Some(binding.clone()),
        None => {
            let mut b = binding.clone();
            b.insert(var.to_string(), value);
            Some(b)
        }
    }
}

fn slot_for(term: &Term, binding: &Binding) -> ArgSlot {
    match resolve(term, binding) {
        Some(v) => ArgSlot::Bound(v),
        None => ArgSlot::Unbound,
    }
}

/// All complete bindings satisfying every atom of `body`, joined left to
/// right. Built-ins may assert facts into `kb` as a side effect.
pub fn evaluate_body(
    kb: &mut KnowledgeBase,
    registry: &BuiltinRegistry,
    body: &[RuleAtom],
) -> Result<Vec<Binding>, EngineError> {
    let mut bindings: Vec<Binding> = vec![Binding::new()];
    for atom in body {
        let mut next: Vec<Binding> = Vec::new();
        for binding in &bindings {
            match atom {
                RuleAtom::Class { class, arg } => match resolve(arg, binding) {
                    Some(Object::Individual(ind)) => {
                        if kb.has_type(&ind, class) {
                            next.push(binding.clone());
                        }
                    }
                    Some(Object::Literal(_)) => {}
                    None => {
                        let Term::Variable(v) = arg else { unreachable!() };
                        for ind in kb.individuals_of(class) {
                            if let Some(b) = extend(binding, v, Object::Individual(ind)) {
                                next.push(b);
                            }
                        }
                    }
                },
                RuleAtom::Property { prop, subject, object } => {
                    let pattern = Pattern {
                        subject: match resolve(subject, binding) {
                            Some(Object::Individual(n)) => PatternSlot::Individual(n),
                            Some(Object::Literal(_)) => continue,
                            None => match subject {
                                Term::Variable(v) => PatternSlot::Var(v.clone()),
                                _ => unreachable!(),
                            },
                        },
                        predicate: PredicateSlot::Property(prop.clone()),
                        object: match resolve(object, binding) {
                            Some(Object::Individual(n)) => PatternSlot::Individual(n),
                            Some(Object::Literal(l)) => PatternSlot::Literal(l),
                            None => match object {
                                Term::Variable(v) => PatternSlot::Var(v.clone()),
                                _ => unreachable!(),
                            },
                        },
                    };
                    for qb in kb.query(&pattern) {
                        let mut merged = Some(binding.clone());
                        for (var, val) in qb {
                            merged = merged.and_then(|m| extend(&m, &var, val));
                        }
                        if let Some(m) = merged {
                            next.push(m);
                        }
                    }
                }
                RuleAtom::Builtin { name, args } => {
                    let builtin = registry
                        .get(name)
                        .ok_or_else(|| EngineError::UnknownBuiltin(name.clone()))?;
                    let slots: Vec<ArgSlot> =
                        args.iter().map(|t| slot_for(t, binding)).collect();
                    if builtin.behavior() == BuiltinBehavior::Test
                        && slots.iter().any(|s| matches!(s, ArgSlot::Unbound))
                    {
                        return Err(EngineError::UnboundTestArgument);
                    }
                    let rows = builtin.eval(kb, &slots)?;
                    for row in rows {
                        debug_assert_eq!(row.len(), args.len());
                        let mut merged = Some(binding.clone());
                        for (term, value) in args.iter().zip(row) {
                            match term {
                                Term::Variable(v) => {
                                    merged = merged.and_then(|m| extend(&m, v, value));
                                }
                                _ => {
                                    // constant positions must echo their input
                                    if resolve(term, binding) != Some(value) {
                                        merged = None;
                                    }
                                }
                            }
                            if merged.is_none() {
                                break;
                            }
                        }
                        if let Some(m) = merged {
                            next.push(m);
                        }
                    }
                }
            }
        }
        next.sort();
        next.dedup();
        bindings = next;
        if bindings.is_empty() {
            break;
        }
    }
    Ok(bindings)
}

fn assert_head(
    kb: &mut KnowledgeBase,
    atom: &RuleAtom,
    binding: &Binding,
) -> Result<bool, EngineError> {
    use crate::kb::Assertion;
    match atom {
        RuleAtom::Class { class, arg } => {
            let Some(Object::Individual(ind)) = resolve(arg, binding) else {
                return Ok(false);
            };
            Ok(kb.assert_fact(Assertion::typed(ind, class.clone()))?)
        }
        RuleAtom::Property { prop, subject, object } => {
            let Some(Object::Individual(subj)) = resolve(subject, binding) else {
                return Ok(false);
            };
            let Some(obj) = resolve(object, binding) else {
                return Ok(false);
            };
            Ok(kb.assert_fact(Assertion {
                subject: subj,
                predicate: crate::kb::Predicate::Property(prop.clone()),
                object: obj,
            })?)
        }
        RuleAtom::Builtin { name, .. } => Err(EngineError::UnknownBuiltin(name.clone())),
    }
}

/// Run every rule repeatedly, in file order, until a full pass adds no
/// facts. `observer` is called with the pass number after each pass.
pub fn run_to_fixpoint_observed(
    kb: &mut KnowledgeBase,
    registry: &BuiltinRegistry,
    rules: &[Rule],
    max_iters: usize,
    mut observer: impl FnMut(usize, &KnowledgeBase),
) -> Result<RunStats, EngineError> {
    let mut stats = RunStats::default();
    for rule in rules {
        stats.rule_fires.entry(rule.label.clone()).or_insert(0);
    }
    loop {
        stats.iterations += 1;
        let before = kb.fact_count();
        let mut fired_this_pass: Vec<&str> = Vec::new();
        for rule in rules {
            let bindings = evaluate_body(kb, registry, &rule.body)?;
            let mut fires = 0usize;
            for binding in &bindings {
                for atom in &rule.head {
                    if assert_head(kb, atom, binding)? {
                        fires += 1;
                    }
                }
            }
            if fires > 0 {
                fired_this_pass.push(&rule.label);
            }
            *stats.rule_fires.entry(rule.label.clone()).or_insert(0) += fires;
        }
        let added = kb.fact_count() - before;
        stats.facts_added += added;
        observer(stats.iterations, kb);
        if added == 0 {
            return Ok(stats);
        }
        if stats.iterations >= max_iters {
            return Err(EngineError::FixpointNotReached {
                max_iters,
                still_firing: fired_this_pass.join(", "),
            });
        }
    }
}

pub fn run_to_fixpoint(
    kb: &mut KnowledgeBase,
    registry: &BuiltinRegistry,
    rules: &[Rule],
    max_iters: usize,
) -> Result<RunStats, EngineError> {
    run_to_fixpoint_observed(kb, registry, rules, max_iters, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Assertion, Literal};
    use crate::rules::{ensure_rule_vocabulary, parse_rules};

    fn registry() -> BuiltinRegistry {
        BuiltinRegistry::with_comparisons()
    }

    fn kb_with_boxes() -> KnowledgeBase {
        let mut kb = KnowledgeBase::with_schema();
        for (g, h) in [("geo_1", 5.5), ("geo_2", 3.0)] {
            kb.assert_fact(Assertion::typed(Name::dbb(g), Name::dbb("Vertical_BoundingBox")))
                .unwrap();
            kb.assert_fact(Assertion::data(
                Name::dbb(g),
                Name::dbb("hasHeight"),
                Literal::Real(h),
            ))
            .unwrap();
        }
        kb
    }

    #[test]
    fn class_atom_enumerates_instances() {
        let mut kb = kb_with_boxes();
        let r = registry();
        let rules = parse_rules("Vertical_BoundingBox(?x) -> Geometry(?x)", &r).unwrap();
        let bindings = evaluate_body(&mut kb, &r, &rules[0].body).unwrap();
        assert_eq!(bindings.len(), 2);
    }

    #[test]
    fn comparison_filters_bindings() {
        let mut kb = kb_with_boxes();
        let r = registry();
        let rules = parse_rules(
            "Vertical_BoundingBox(?x) ^ hasHeight(?x, ?h) ^ swrlb:greaterThan(?h, 4.0) -> Mast(?x)",
            &r,
        )
        .unwrap();
        let bindings = evaluate_body(&mut kb, &r, &rules[0].body).unwrap();
        assert_eq!(bindings.len(), 1);
        assert_eq!(
            bindings[0]["x"],
            Object::Individual(Name::dbb("geo_1"))
        );
    }

    #[test]
    fn unbound_test_argument_is_an_error() {
        let mut kb = kb_with_boxes();
        let r = registry();
        let rules = parse_rules(
            "Vertical_BoundingBox(?x) ^ swrlb:greaterThan(?h, 4.0) -> Mast(?x)",
            &r,
        )
        .unwrap();
        assert!(matches!(
            evaluate_body(&mut kb, &r, &rules[0].body),
            Err(EngineError::UnboundTestArgument)
        ));
    }

    #[test]
    fn empty_rule_set_single_quiescent_pass() {
        let mut kb = kb_with_boxes();
        let r = registry();
        let stats = run_to_fixpoint(&mut kb, &r, &[], 100).unwrap();
        assert_eq!(stats.iterations, 1);
        assert_eq!(stats.facts_added, 0);
    }

    #[test]
    fn chain_propagates_in_few_passes() {
        let mut kb = KnowledgeBase::new();
        let r = registry();
        let rules = parse_rules("A(?x) -> B(?x)\n\nB(?x) -> C(?x)", &r).unwrap();
        ensure_rule_vocabulary(&mut kb, &rules);
        kb.assert_fact(Assertion::typed(Name::dbb("i"), Name::dbb("A")))
            .unwrap();
        let stats = run_to_fixpoint(&mut kb, &r, &rules, 100).unwrap();
        assert!(stats.iterations <= 3);
        assert_eq!(stats.facts_added, 2);
        assert!(kb.has_type(&Name::dbb("i"), &Name::dbb("C")));
    }

    #[test]
    fn rerun_on_fixpoint_adds_nothing() {
        let mut kb = KnowledgeBase::new();
        let r = registry();
        let rules = parse_rules("A(?x) -> B(?x)", &r).unwrap();
        ensure_rule_vocabulary(&mut kb, &rules);
        kb.assert_fact(Assertion::typed(Name::dbb("i"), Name::dbb("A")))
            .unwrap();
        run_to_fixpoint(&mut kb, &r, &rules, 100).unwrap();
        let before = kb.fact_count();
        let stats = run_to_fixpoint(&mut kb, &r, &rules, 100).unwrap();
        assert_eq!(kb.fact_count(), before);
        assert_eq!(stats.facts_added, 0);
    }

    #[test]
    fn rule_order_does_not_change_fixpoint() {
        let text_a = "A(?x) -> B(?x)\n\nB(?x) -> C(?x)\n\nC(?x) ^ p(?x, ?y) -> D(?y)";
        let text_b = "C(?x) ^ p(?x, ?y) -> D(?y)\n\nB(?x) -> C(?x)\n\nA(?x) -> B(?x)";
        let r = registry();
        let mut dumps = Vec::new();
        for text in [text_a, text_b] {
            let mut kb = KnowledgeBase::new();
            let rules = parse_rules(text, &r).unwrap();
            ensure_rule_vocabulary(&mut kb, &rules);
            kb.assert_fact(Assertion::typed(Name::dbb("i"), Name::dbb("A")))
                .unwrap();
            kb.assert_fact(Assertion::typed(Name::dbb("j"), Name::dbb("A")))
                .unwrap();
            kb.assert_fact(Assertion::property(Name::dbb("i"), Name::dbb("p"), Name::dbb("j")))
                .unwrap();
            run_to_fixpoint(&mut kb, &r, &rules, 100).unwrap();
            dumps.push(kb.dump_triples());
        }
        assert_eq!(dumps[0], dumps[1]);
    }
}
