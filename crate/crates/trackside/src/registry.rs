//! Wires the default built-in registry: `swrlb` comparisons, the two
//! processing built-ins and the six topology built-ins.

use crate::detect::{DetectionParams, ElementDetection, SharedCache};
use crate::geom::OrientationClass;
use crate::rules::BuiltinRegistry;
use crate::topo::{TopoKind, TopoParams, TopologyBuiltin};

pub fn default_registry(det: DetectionParams, topo: TopoParams) -> BuiltinRegistry {
    let mut registry = BuiltinRegistry::with_comparisons();

    let cache: SharedCache = Default::default();
    for orientation in [OrientationClass::Vertical, OrientationClass::Horizontal] {
        registry.register(
            ElementDetection::builtin_name(orientation),
            Box::new(ElementDetection {
                orientation,
                params: det,
                cache: cache.clone(),
            }),
        );
    }

    for kind in [
        TopoKind::Intersect,
        TopoKind::Touch,
        TopoKind::Upper,
        TopoKind::Perpendicular,
        TopoKind::IsDistantFrom,
        TopoKind::IsConnected,
    ] {
        registry.register(
            kind.builtin_name(),
            Box::new(TopologyBuiltin { kind, params: topo }),
        );
    }

    registry
}
