//! Geometric primitives shared by detection and topology: points,
//! axis-aligned boxes and the vertical/horizontal orientation split.

use serde::{Deserialize, Serialize};

/// A point in meters. By convention `x` runs along the track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Axis-aligned bounding box. Degenerate (zero-extent) boxes are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Aabb { min, max }
    }

    /// Box centered at `center` with full extents `dims`.
    pub fn from_center_dims(center: Point3, dims: (f64, f64, f64)) -> Self {
        let (dx, dy, dz) = dims;
        Aabb {
            min: Point3::new(center.x - dx / 2.0, center.y - dy / 2.0, center.z - dz / 2.0),
            max: Point3::new(center.x + dx / 2.0, center.y + dy / 2.0, center.z + dz / 2.0),
        }
    }

    pub fn extents(&self) -> (f64, f64, f64) {
        (
            self.max.x - self.min.x,
            self.max.y - self.min.y,
            self.max.z - self.min.z,
        )
    }

    pub fn centroid(&self) -> Point3 {
        Point3::new(
            (self.min.x + self.max.x) / 2.0,
            (self.min.y + self.max.y) / 2.0,
            (self.min.z + self.max.z) / 2.0,
        )
    }

    pub fn is_degenerate(&self) -> bool {
        let (dx, dy, dz) = self.extents();
        dx == 0.0 || dy == 0.0 || dz == 0.0
    }

    pub fn diameter(&self) -> f64 {
        self.min.distance(&self.max)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Grow the box by `margin` on every side.
    pub fn inflate(&self, margin: f64) -> Aabb {
        Aabb {
            min: Point3::new(self.min.x - margin, self.min.y - margin, self.min.z - margin),
            max: Point3::new(self.max.x + margin, self.max.y + margin, self.max.z + margin),
        }
    }
}

/// Componentwise extrema of a non-empty point set; `None` on empty input.
pub fn aabb_from_points(points: &[Point3]) -> Option<Aabb> {
    let first = points.first()?;
    let mut min = *first;
    let mut max = *first;
    for p in &points[1..] {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        min.z = min.z.min(p.z);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
        max.z = max.z.max(p.z);
    }
    Some(Aabb { min, max })
}

/// Euclidean separation between two boxes: per axis the gap is
/// `max(0, a.min - b.max, b.min - a.max)`, combined as the 2-norm.
/// Zero iff the boxes intersect or touch.
pub fn gap_distance(a: &Aabb, b: &Aabb) -> f64 {
    let gx = axis_gap(a.min.x, a.max.x, b.min.x, b.max.x);
    let gy = axis_gap(a.min.y, a.max.y, b.min.y, b.max.y);
    let gz = axis_gap(a.min.z, a.max.z, b.min.z, b.max.z);
    (gx * gx + gy * gy + gz * gz).sqrt()
}

fn axis_gap(amin: f64, amax: f64, bmin: f64, bmax: f64) -> f64 {
    (amin - bmax).max(bmin - amax).max(0.0)
}

/// Coarse orientation of a detected element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrientationClass {
    Vertical,
    Horizontal,
    Undetermined,
}

/// Vertical iff the z extent dominates the larger horizontal extent by
/// `ratio_threshold` and reaches `min_major_extent`; Horizontal for the
/// mirrored condition; Undetermined otherwise.
pub fn classify_orientation(
    aabb: &Aabb,
    ratio_threshold: f64,
    min_major_extent: f64,
) -> OrientationClass {
    debug_assert!(ratio_threshold > 1.0);
    let (ex, ey, ez) = aabb.extents();
    let eh = ex.max(ey);
    if ez >= ratio_threshold * eh && ez >= min_major_extent {
        OrientationClass::Vertical
    } else if eh >= ratio_threshold * ez && eh >= min_major_extent {
        OrientationClass::Horizontal
    } else {
        OrientationClass::Undetermined
    }
}
