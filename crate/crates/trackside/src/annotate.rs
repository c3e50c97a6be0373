//! Shipped domain knowledge: the default rule file, class colors, and
//! the per-class instance summary.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::kb::{KnowledgeBase, Name};

/// Default annotation rules for the trackside object catalogue.
pub fn default_rules() -> &'static str {
    include_str!("../rules/default_db.swrl")
}

pub type Rgb = [f64; 3];

#[derive(Debug, Error)]
pub enum ColorMapError {
    #[error("line {line}: expected `ClassName r g b`")]
    Malformed { line: usize },
    #[error("line {line}: color component {value} outside [0, 1]")]
    OutOfRange { line: usize, value: f64 },
}

/// Class -> diffuse color, with a default for unannotated geometry.
/// When an individual carries several classes the deepest one wins,
/// ties broken by name order.
#[derive(Debug, Clone)]
pub struct ColorMap {
    pub colors: BTreeMap<Name, Rgb>,
    pub default: Rgb,
}

impl Default for ColorMap {
    fn default() -> Self {
        let mut colors = BTreeMap::new();
        for (class, rgb) in [
            ("Mast", [0.8, 0.1, 0.1]),
            ("Schaltanlage", [0.1, 0.1, 0.8]),
            ("MainSignal", [0.1, 0.7, 0.1]),
            ("DistantSignal", [0.9, 0.7, 0.1]),
            ("Ground", [0.3, 0.3, 0.3]),
        ] {
            colors.insert(Name::dbb(class), rgb);
        }
        ColorMap {
            colors,
            default: [0.6, 0.6, 0.6],
        }
    }
}

impl ColorMap {
    /// Apply override lines of the form `ClassName r g b`. Unprefixed
    /// class names live in the `dbb` namespace.
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), ColorMapError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let class = parts.next().ok_or(ColorMapError::Malformed { line })?;
            let mut rgb = [0.0; 3];
            for c in &mut rgb {
                let tok = parts.next().ok_or(ColorMapError::Malformed { line })?;
                *c = tok
                    .parse::<f64>()
                    .map_err(|_| ColorMapError::Malformed { line })?;
                if !(0.0..=1.0).contains(c) {
                    return Err(ColorMapError::OutOfRange { line, value: *c });
                }
            }
            let name = match class.split_once(':') {
                Some((prefix, local)) => Name::new(prefix, local),
                None => Name::dbb(class),
            };
            self.colors.insert(name, rgb);
        }
        Ok(())
    }

    /// Deepest directly-asserted class of `ind`, ties by name order.
    pub fn most_specific_class(kb: &KnowledgeBase, ind: &Name) -> Option<Name> {
        kb.classes_of(ind)
            .into_iter()
            .max_by(|a, b| {
                kb.class_depth(a)
                    .cmp(&kb.class_depth(b))
                    // BTreeSet iterates ascending, so prefer the earlier
                    // name on equal depth by comparing reversed
                    .then_with(|| b.cmp(a))
            })
    }

    /// Color of the deepest colored class of `ind`, or the default.
    pub fn color_for(&self, kb: &KnowledgeBase, ind: &Name) -> Rgb {
        let mut classes: Vec<Name> = kb.classes_of(ind).into_iter().collect();
        classes.sort_by(|a, b| {
            kb.class_depth(b)
                .cmp(&kb.class_depth(a))
                .then_with(|| a.cmp(b))
        });
        for class in classes {
            if let Some(rgb) = self.colors.get(&class) {
                return *rgb;
            }
        }
        self.default
    }
}

/// Instance counts (direct + inherited) for every DomainConcept
/// subclass with at least one instance, sorted by class name.
pub fn summarize(kb: &KnowledgeBase) -> Vec<(Name, usize)> {
    let domain = Name::dbb("DomainConcept");
    let mut rows = Vec::new();
    for class in kb.subclasses_of(&domain) {
        let count = kb.individuals_of(&class).len();
        if count > 0 {
            rows.push((class, count));
        }
    }
    rows.sort();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::Assertion;
    use crate::registry::default_registry;
    use crate::rules::parse_rules;

    #[test]
    fn shipped_rules_parse_cleanly() {
        let registry = default_registry(Default::default(), Default::default());
        let rules = parse_rules(default_rules(), &registry).unwrap();
        assert_eq!(rules.len(), 6);
        let labels: Vec<&str> = rules.iter().map(|r| r.label.as_str()).collect();
        assert!(labels.contains(&"mast"));
        assert!(labels.contains(&"signal_pairing"));
    }

    #[test]
    fn summarize_empty_kb() {
        let kb = KnowledgeBase::with_schema();
        assert!(summarize(&kb).is_empty());
    }

    #[test]
    fn summarize_counts_masts() {
        let mut kb = KnowledgeBase::with_schema();
        for g in ["m1", "m2"] {
            kb.assert_fact(Assertion::typed(Name::dbb(g), Name::dbb("Mast")))
                .unwrap();
        }
        let rows = summarize(&kb);
        assert!(rows.contains(&(Name::dbb("Mast"), 2)));
        // inherited counts show up on the ancestors too
        assert!(rows.contains(&(Name::dbb("FacilityElement"), 2)));
    }

    #[test]
    fn color_prefers_deepest_class() {
        let mut kb = KnowledgeBase::with_schema();
        kb.assert_fact(Assertion::typed(
            Name::dbb("g1"),
            Name::dbb("Vertical_BoundingBox"),
        ))
        .unwrap();
        kb.assert_fact(Assertion::typed(Name::dbb("g1"), Name::dbb("Mast")))
            .unwrap();
        let colors = ColorMap::default();
        assert_eq!(colors.color_for(&kb, &Name::dbb("g1")), [0.8, 0.1, 0.1]);
        assert_eq!(
            ColorMap::most_specific_class(&kb, &Name::dbb("g1")),
            Some(Name::dbb("Mast"))
        );
    }

    #[test]
    fn unannotated_geometry_gets_default() {
        let mut kb = KnowledgeBase::with_schema();
        kb.assert_fact(Assertion::typed(Name::dbb("g1"), Name::dbb("Geometry")))
            .unwrap();
        let colors = ColorMap::default();
        assert_eq!(colors.color_for(&kb, &Name::dbb("g1")), [0.6, 0.6, 0.6]);
    }

    #[test]
    fn override_lines() {
        let mut colors = ColorMap::default();
        colors.apply_overrides("Mast 0.0 1.0 0.0\n# comment\n").unwrap();
        assert_eq!(colors.colors[&Name::dbb("Mast")], [0.0, 1.0, 0.0]);
        assert!(colors.apply_overrides("Mast 2.0 0.0 0.0").is_err());
        assert!(colors.apply_overrides("Mast 0.1 0.1").is_err());
    }
}
