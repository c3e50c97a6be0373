//! Parse a small rule set and run it to fixpoint over hand-asserted
//! facts — no point cloud involved.

use trackside::kb::{Assertion, KnowledgeBase, Literal, Name};
use trackside::registry::default_registry;
use trackside::rules::{ensure_rule_vocabulary, parse_rules, run_to_fixpoint};

const RULES: &str = "
[tall]
Geometry(?x) ^ hasHeight(?x, ?h) ^ swrlb:greaterThan(?h, 4.0) -> TallThing(?x)

[pair]
TallThing(?x) ^ TallThing(?y) ^ hasHeight(?x, ?h) ^ hasHeight(?y, ?g)
  ^ swrlb:lessThan(?h, ?g) -> isShorterThan(?x, ?y)
";

fn main() {
    let registry = default_registry(Default::default(), Default::default());
    let rules = parse_rules(RULES, &registry).expect("rules parse");
    for r in &rules {
        println!("loaded: {r}");
    }

    let mut kb = KnowledgeBase::with_schema();
    ensure_rule_vocabulary(&mut kb, &rules);
    for (name, h) in [("g1", 6.0), ("g2", 8.0), ("g3", 1.0)] {
        kb.assert_fact(Assertion::typed(Name::dbb(name), Name::dbb("Geometry")))
            .unwrap();
        kb.assert_fact(Assertion::data(
            Name::dbb(name),
            Name::dbb("hasHeight"),
            Literal::Real(h),
        ))
        .unwrap();
    }

    let stats = run_to_fixpoint(&mut kb, &registry, &rules, 10).expect("fixpoint");
    println!(
        "\nfixpoint after {} passes, {} facts added",
        stats.iterations, stats.facts_added
    );
    print!("{}", kb.dump_triples());
}
