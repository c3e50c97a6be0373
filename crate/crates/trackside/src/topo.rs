//! Topological predicates over stored bounding boxes and their rule
//! built-in wrappers.
//!
//! The formal definitions of `upper`, `touch` and `perpendicular` are
//! this crate's own: they are stated on axis-aligned boxes, with all
//! tolerances carried in [`TopoParams`] or passed as rule literals.

use crate::geom::{gap_distance, Aabb, Point3};
use crate::kb::{Assertion, KnowledgeBase, Name, Object};
use crate::rules::{ArgSlot, BuiltinBehavior, BuiltinEval, EngineError};

/// Tolerances for the topological predicates.
#[derive(Debug, Clone, Copy)]
pub struct TopoParams {
    /// Maximum gap still counted as contact.
    pub contact_eps: f64,
    /// Slack on the `upper` z comparison.
    pub upper_eps: f64,
    /// Default tolerance for `is_distant_from` when no literal is given.
    pub distance_tolerance: f64,
}

impl Default for TopoParams {
    fn default() -> Self {
        TopoParams {
            contact_eps: 0.10,
            upper_eps: 0.25,
            distance_tolerance: 50.0,
        }
    }
}

/// True iff the overlap has positive extent on all three axes.
pub fn intersect(a: &Aabb, b: &Aabb) -> bool {
    a.min.x < b.max.x
        && b.min.x < a.max.x
        && a.min.y < b.max.y
        && b.min.y < a.max.y
        && a.min.z < b.max.z
        && b.min.z < a.max.z
}

/// Contact without overlap: disjoint interiors, gap at most `contact_eps`.
pub fn touch(a: &Aabb, b: &Aabb, contact_eps: f64) -> bool {
    !intersect(a, b) && gap_distance(a, b) <= contact_eps
}

/// `a` sits above `b`: its bottom reaches at least `b`'s top (minus
/// `upper_eps`) and their xy footprints overlap with positive area.
pub fn upper(a: &Aabb, b: &Aabb, upper_eps: f64) -> bool {
    let footprints_overlap = a.min.x < b.max.x
        && b.min.x < a.max.x
        && a.min.y < b.max.y
        && b.min.y < a.max.y;
    a.min.z >= b.max.z - upper_eps && footprints_overlap
}

fn dominant_axis(b: &Aabb) -> usize {
    let (ex, ey, ez) = b.extents();
    // ties break toward the lower axis index (x < y < z)
    let mut axis = 0;
    let mut best = ex;
    if ey > best {
        axis = 1;
        best = ey;
    }
    if ez > best {
        axis = 2;
    }
    axis
}

/// Dominant-extent axes differ (ties broken x < y < z).
pub fn perpendicular(a: &Aabb, b: &Aabb) -> bool {
    dominant_axis(a) != dominant_axis(b)
}

/// Centroid distance equals `d` within `tol`.
pub fn is_distant_from(a: &Aabb, b: &Aabb, d: f64, tol: f64) -> bool {
    debug_assert!(d >= 0.0 && tol >= 0.0);
    (a.centroid().distance(&b.centroid()) - d).abs() <= tol
}

/// Overlapping or in contact.
pub fn is_connected(a: &Aabb, b: &Aabb, contact_eps: f64) -> bool {
    intersect(a, b) || touch(a, b, contact_eps)
}

/// Reconstruct an individual's box from its stored centroid and extent
/// data properties.
pub fn geometry_box(kb: &KnowledgeBase, ind: &Name) -> Option<Aabb> {
    let get = |prop: &str| kb.data_value(ind, &Name::dbb(prop))?.as_real();
    let cx = get("hasCentroidX")?;
    let cy = get("hasCentroidY")?;
    let cz = get("hasCentroidZ")?;
    let dx = get("hasWidth")?;
    let dy = get("hasDepth")?;
    let dz = get("hasHeight")?;
    Some(Aabb::from_center_dims(Point3::new(cx, cy, cz), (dx, dy, dz)))
}

/// The topology predicate family; each member tests a box pair and
/// asserts the correspondent object property when satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopoKind {
    Intersect,
    Touch,
    Upper,
    Perpendicular,
    IsDistantFrom,
    IsConnected,
}

impl TopoKind {
    /// Built-in name, bit-exact as written in rule files.
    pub fn builtin_name(self) -> Name {
        let local = match self {
            TopoKind::Intersect => "Intersect",
            TopoKind::Touch => "Touch",
            TopoKind::Upper => "Upper",
            TopoKind::Perpendicular => "Perpendicular",
            TopoKind::IsDistantFrom => "IsDistantFrom",
            TopoKind::IsConnected => "IsConnected",
        };
        Name::new("3D_swrlb_Topology", local)
    }

    /// Object property asserted for satisfied pairs.
    pub fn property_name(self) -> Name {
        Name::dbb(self.builtin_name().local)
    }

    fn arity(self) -> usize {
        match self {
            TopoKind::IsDistantFrom => 4,
            _ => 2,
        }
    }
}

/// Rule built-in wrapping one topological predicate. With bound
/// arguments it tests; unbound geometry arguments are enumerated over
/// all boxed KB individuals (relational behavior).
pub struct TopologyBuiltin {
    pub kind: TopoKind,
    pub params: TopoParams,
}

impl TopologyBuiltin {
    fn test(&self, a: &Aabb, b: &Aabb, d: f64, tol: f64) -> bool {
        match self.kind {
            TopoKind::Intersect => intersect(a, b),
            TopoKind::Touch => touch(a, b, self.params.contact_eps),
            TopoKind::Upper => upper(a, b, self.params.upper_eps),
            TopoKind::Perpendicular => perpendicular(a, b),
            TopoKind::IsDistantFrom => is_distant_from(a, b, d, tol),
            TopoKind::IsConnected => is_connected(a, b, self.params.contact_eps),
        }
    }
}

fn boxed_individuals(kb: &KnowledgeBase) -> Vec<(Name, Aabb)> {
    kb.individuals_of(&Name::dbb("Geometry"))
        .into_iter()
        .filter_map(|ind| geometry_box(kb, &ind).map(|b| (ind, b)))
        .collect()
}

impl BuiltinEval for TopologyBuiltin {
    fn behavior(&self) -> BuiltinBehavior {
        BuiltinBehavior::Relational
    }

    fn arity(&self) -> usize {
        self.kind.arity()
    }

    fn eval(
        &self,
        kb: &mut KnowledgeBase,
        args: &[ArgSlot],
    ) -> Result<Vec<Vec<Object>>, EngineError> {
        let (d, tol) = if self.kind == TopoKind::IsDistantFrom {
            let lit = |slot: &ArgSlot, what: &str| match slot {
                ArgSlot::Bound(Object::Literal(l)) => {
                    l.as_real().ok_or(EngineError::NonNumericComparison)
                }
                ArgSlot::Bound(_) => Err(EngineError::NonNumericComparison),
                ArgSlot::Unbound => Err(EngineError::RequiredArgumentUnbound(what.to_string())),
            };
            (lit(&args[2], "distance")?, lit(&args[3], "tolerance")?)
        } else {
            (0.0, self.params.distance_tolerance)
        };

        let candidates_for = |slot: &ArgSlot| -> Result<Vec<(Name, Aabb, bool)>, EngineError> {
            match slot {
                ArgSlot::Bound(Object::Individual(ind)) => {
                    let b = geometry_box(kb, ind)
                        .ok_or_else(|| EngineError::MissingBox(ind.clone()))?;
                    Ok(vec![(ind.clone(), b, true)])
                }
                ArgSlot::Bound(Object::Literal(_)) => Err(EngineError::ExpectedIndividual),
                ArgSlot::Unbound => Ok(boxed_individuals(kb)
                    .into_iter()
                    .map(|(n, b)| (n, b, false))
                    .collect()),
            }
        };

        let left = candidates_for(&args[0])?;
        let right = candidates_for(&args[1])?;

        let mut rows = Vec::new();
        let mut to_assert = Vec::new();
        for (a_name, a_box, a_bound) in &left {
            for (b_name, b_box, b_bound) in &right {
                // relational enumeration never pairs an individual with
                // itself; an explicit a = b query is still honored
                if a_name == b_name && !(*a_bound && *b_bound) {
                    continue;
                }
                if self.test(a_box, b_box, d, tol) {
                    to_assert.push((a_name.clone(), b_name.clone()));
                    let mut row = vec![
                        Object::Individual(a_name.clone()),
                        Object::Individual(b_name.clone()),
                    ];
                    for slot in &args[2..] {
                        if let ArgSlot::Bound(v) = slot {
                            row.push(v.clone());
                        }
                    }
                    rows.push(row);
                }
            }
        }
        let prop = self.kind.property_name();
        for (s, o) in to_assert {
            kb.assert_fact(Assertion::property(s, prop.clone(), o))?;
        }
        rows.sort();
        rows.dedup();
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(center: (f64, f64, f64)) -> Aabb {
        Aabb::from_center_dims(Point3::new(center.0, center.1, center.2), (1.0, 1.0, 1.0))
    }

    #[test]
    fn identical_cubes_intersect() {
        let c = cube((0.0, 0.0, 0.0));
        assert!(intersect(&c, &c));
    }

    #[test]
    fn face_sharing_cubes_do_not_intersect() {
        let a = cube((0.0, 0.0, 0.0));
        let b = cube((1.0, 0.0, 0.0));
        assert!(!intersect(&a, &b));
        assert!(touch(&a, &b, 0.1));
    }

    #[test]
    fn touch_excludes_intersection_and_large_gaps() {
        let a = cube((0.0, 0.0, 0.0));
        assert!(!touch(&a, &a, 0.1));
        let far = cube((1.5, 0.0, 0.0));
        assert!(!touch(&a, &far, 0.1));
    }

    #[test]
    fn upper_needs_overlapping_footprint() {
        let mast = Aabb::from_center_dims(Point3::new(0.0, 0.0, 3.0), (0.3, 0.3, 6.0));
        let lamp = Aabb::from_center_dims(Point3::new(0.0, 0.0, 6.3), (0.4, 0.4, 0.5));
        assert!(upper(&lamp, &mast, 0.25));
        let offset_lamp = Aabb::from_center_dims(Point3::new(5.0, 0.0, 6.3), (0.4, 0.4, 0.5));
        assert!(!upper(&offset_lamp, &mast, 0.25));
        // antisymmetric away from the eps band
        assert!(!upper(&mast, &lamp, 0.25));
    }

    #[test]
    fn perpendicular_dominant_axes() {
        let beam = Aabb::from_center_dims(Point3::new(0.0, 0.0, 0.0), (6.0, 0.4, 0.4));
        let mast = Aabb::from_center_dims(Point3::new(0.0, 0.0, 0.0), (0.3, 0.3, 5.0));
        assert!(perpendicular(&beam, &mast));
        assert!(!perpendicular(&mast, &mast));
        // a cube's dominant axis is x by the documented tie-break
        let c = cube((0.0, 0.0, 0.0));
        assert!(!perpendicular(&c, &beam));
    }

    #[test]
    fn distant_from_kilometer_rule() {
        let a = cube((0.0, 0.0, 0.0));
        let b = cube((1000.0, 0.0, 0.0));
        assert!(is_distant_from(&a, &b, 1000.0, 50.0));
        let c = cube((700.0, 0.0, 0.0));
        assert!(!is_distant_from(&a, &c, 1000.0, 50.0));
        assert!(is_distant_from(&a, &a, 0.0, 0.0));
    }

    #[test]
    fn connected_cases() {
        let a = cube((0.0, 0.0, 0.0));
        assert!(is_connected(&a, &cube((0.5, 0.0, 0.0)), 0.1));
        assert!(!is_connected(&a, &cube((3.0, 0.0, 0.0)), 0.1));
    }

    fn arb_box() -> impl Strategy<Value = Aabb> {
        (
            (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
            (0.2..2.0f64, 0.2..2.0f64, 0.2..2.0f64),
        )
            .prop_map(|((x, y, z), d)| Aabb::from_center_dims(Point3::new(x, y, z), d))
    }

    proptest! {
        #[test]
        fn symmetric_predicates(a in arb_box(), b in arb_box()) {
            prop_assert_eq!(intersect(&a, &b), intersect(&b, &a));
            prop_assert_eq!(touch(&a, &b, 0.1), touch(&b, &a, 0.1));
            prop_assert_eq!(is_connected(&a, &b, 0.1), is_connected(&b, &a, 0.1));
            prop_assert_eq!(perpendicular(&a, &b), perpendicular(&b, &a));
            prop_assert_eq!(is_distant_from(&a, &b, 3.0, 0.5), is_distant_from(&b, &a, 3.0, 0.5));
        }

        #[test]
        fn touch_and_intersect_mutually_exclusive(a in arb_box(), b in arb_box()) {
            prop_assert!(!(touch(&a, &b, 0.1) && intersect(&a, &b)));
        }

        #[test]
        fn connected_iff_gap_within_eps(a in arb_box(), b in arb_box()) {
            prop_assert_eq!(is_connected(&a, &b, 0.1), gap_distance(&a, &b) <= 0.1);
        }

        #[test]
        fn translation_invariance(a in arb_box(), b in arb_box(), t in (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)) {
            let shift = |bx: &Aabb| Aabb {
                min: Point3::new(bx.min.x + t.0, bx.min.y + t.1, bx.min.z + t.2),
                max: Point3::new(bx.max.x + t.0, bx.max.y + t.1, bx.max.z + t.2),
            };
            let (sa, sb) = (shift(&a), shift(&b));
            prop_assert_eq!(intersect(&a, &b), intersect(&sa, &sb));
            prop_assert_eq!(touch(&a, &b, 0.1), touch(&sa, &sb, 0.1));
            prop_assert_eq!(upper(&a, &b, 0.25), upper(&sa, &sb, 0.25));
            prop_assert_eq!(perpendicular(&a, &b), perpendicular(&sa, &sb));
        }

        #[test]
        fn quarter_turn_invariance(a in arb_box(), b in arb_box()) {
            // rotate both boxes by 90 degrees about z: (x, y) -> (-y, x)
            let rot = |bx: &Aabb| Aabb {
                min: Point3::new(-bx.max.y, bx.min.x, bx.min.z),
                max: Point3::new(-bx.min.y, bx.max.x, bx.max.z),
            };
            let (ra, rb) = (rot(&a), rot(&b));
            prop_assert_eq!(intersect(&a, &b), intersect(&ra, &rb));
            prop_assert_eq!(touch(&a, &b, 0.1), touch(&ra, &rb, 0.1));
            prop_assert_eq!(is_connected(&a, &b, 0.1), is_connected(&ra, &rb, 0.1));
            prop_assert_eq!(upper(&a, &b, 0.25), upper(&ra, &rb, 0.25));
        }
    }
}
