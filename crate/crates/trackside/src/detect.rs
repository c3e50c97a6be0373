//! Geometry detection: connected-component clustering of the non-ground
//! cloud on a voxel grid, box fitting, orientation classification, and
//! the processing built-ins that populate the knowledge base.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path;
use std::rc::Rc;

use thiserror::Error;

use crate::cloud::{self, CloudError, PointCloud};
use crate::geom::{aabb_from_points, classify_orientation, Aabb, OrientationClass, Point3};
use crate::kb::{Assertion, KnowledgeBase, Literal, Name, Object};
use crate::rules::{ArgSlot, BuiltinBehavior, BuiltinEval, EngineError};

#[derive(Debug, Clone, Copy)]
pub struct DetectionParams {
    pub voxel_resolution: f64,
    pub min_points: usize,
    pub ratio_threshold: f64,
    pub min_major_extent: f64,
    /// Ground slab thickness handed to `remove_ground`.
    pub ground_slab: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            voxel_resolution: 0.25,
            min_points: 30,
            ratio_threshold: 2.0,
            min_major_extent: 1.0,
            ground_slab: 0.30,
        }
    }
}

/// One clustered geometry with its fitted box.
#[derive(Debug, Clone)]
pub struct DetectedElement {
    /// Dense index in detection order; becomes the `geo_<k>` individual.
    pub index: usize,
    pub aabb: Aabb,
    pub orientation: OrientationClass,
    pub point_count: usize,
    pub centroid: Point3,
}

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

/// 26-connected components of occupied voxels; components below
/// `min_points` member points are dropped. Output is sorted by centroid
/// and indexed densely from zero.
pub fn detect_elements(
    cloud: &PointCloud,
    params: &DetectionParams,
) -> Result<Vec<DetectedElement>, DetectError> {
    let grid = cloud::voxelize(cloud, params.voxel_resolution)?;
    let occupied: Vec<(i64, i64, i64)> = grid.cells.keys().copied().collect();
    let cell_ids: HashMap<(i64, i64, i64), usize> = occupied
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i))
        .collect();

    let mut visited = vec![false; occupied.len()];
    let mut elements = Vec::new();
    for start in 0..occupied.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut member_cells = vec![start];
        while let Some(cur) = queue.pop_front() {
            let (cx, cy, cz) = occupied[cur];
            for dx in -1..=1i64 {
                for dy in -1..=1i64 {
                    for dz in -1..=1i64 {
                        if dx == 0 && dy == 0 && dz == 0 {
                            continue;
                        }
                        if let Some(&nid) = cell_ids.get(&(cx + dx, cy + dy, cz + dz)) {
                            if !visited[nid] {
                                visited[nid] = true;
                                queue.push_back(nid);
                                member_cells.push(nid);
                            }
                        }
                    }
                }
            }
        }

        let mut points: Vec<Point3> = Vec::new();
        for &cid in &member_cells {
            for &pi in &grid.cells[&occupied[cid]] {
                points.push(cloud.points[pi]);
            }
        }
        if points.len() < params.min_points {
            continue;
        }
        let aabb = aabb_from_points(&points).expect("component has points");
        let n = points.len() as f64;
        let centroid = Point3::new(
            points.iter().map(|p| p.x).sum::<f64>() / n,
            points.iter().map(|p| p.y).sum::<f64>() / n,
            points.iter().map(|p| p.z).sum::<f64>() / n,
        );
        elements.push(DetectedElement {
            index: 0,
            aabb,
            orientation: classify_orientation(&aabb, params.ratio_threshold, params.min_major_extent),
            point_count: points.len(),
            centroid,
        });
    }

    elements.sort_by(|a, b| {
        (a.centroid.x, a.centroid.y, a.centroid.z)
            .partial_cmp(&(b.centroid.x, b.centroid.y, b.centroid.z))
            .expect("finite centroids")
    });
    for (i, e) in elements.iter_mut().enumerate() {
        e.index = i;
    }
    Ok(elements)
}

/// Memoized per-directory detection shared by the processing built-ins.
#[derive(Debug, Default)]
pub struct DetectionCache {
    scenes: BTreeMap<String, SceneDetection>,
    next_geo_id: usize,
    next_ground_id: usize,
}

#[derive(Debug, Clone)]
struct SceneDetection {
    vertical: Vec<Name>,
    horizontal: Vec<Name>,
}

pub type SharedCache = Rc<RefCell<DetectionCache>>;

fn assert_box_facts(
    kb: &mut KnowledgeBase,
    ind: &Name,
    aabb: &Aabb,
    point_count: usize,
) -> Result<(), EngineError> {
    let (dx, dy, dz) = aabb.extents();
    let c = aabb.centroid();
    for (prop, value) in [
        ("hasWidth", dx),
        ("hasDepth", dy),
        ("hasHeight", dz),
        ("hasFootprint", dx.max(dy)),
        ("hasCentroidX", c.x),
        ("hasCentroidY", c.y),
        ("hasCentroidZ", c.z),
        ("hasPointCount", point_count as f64),
    ] {
        kb.assert_fact(Assertion::data(
            ind.clone(),
            Name::dbb(prop),
            Literal::Real(value),
        ))?;
    }
    Ok(())
}

/// Run the load -> ground removal -> clustering pipeline for one scene
/// directory and populate the KB; memoized per directory.
fn detect_scene(
    kb: &mut KnowledgeBase,
    cache: &SharedCache,
    dir: &str,
    params: &DetectionParams,
) -> Result<SceneDetection, EngineError> {
    if let Some(found) = cache.borrow().scenes.get(dir) {
        return Ok(found.clone());
    }

    let cloud = cloud::load_dir(Path::new(dir)).map_err(EngineError::Cloud)?;
    let (ground, rest) = cloud::remove_ground(&cloud, params.ground_slab)
        .map_err(EngineError::Cloud)?;

    let elements = if rest.is_empty() {
        Vec::new()
    } else {
        detect_elements(&rest, params).map_err(|DetectError::Cloud(e)| EngineError::Cloud(e))?
    };

    let base = cache.borrow().next_geo_id;
    let mut detection = SceneDetection {
        vertical: Vec::new(),
        horizontal: Vec::new(),
    };
    for e in &elements {
        let ind = Name::dbb(format!("geo_{}", base + e.index));
        let class = match e.orientation {
            OrientationClass::Vertical => {
                detection.vertical.push(ind.clone());
                "Vertical_BoundingBox"
            }
            OrientationClass::Horizontal => {
                detection.horizontal.push(ind.clone());
                "Horizontal_BoundingBox"
            }
            OrientationClass::Undetermined => "Geometry",
        };
        kb.assert_fact(Assertion::typed(ind.clone(), Name::dbb(class)))?;
        assert_box_facts(kb, &ind, &e.aabb, e.point_count)?;
    }

    if !ground.is_empty() {
        let gid = cache.borrow().next_ground_id;
        let ground_ind = Name::dbb(format!("ground_{gid}"));
        let gbox = aabb_from_points(&ground.points).expect("non-empty ground");
        kb.assert_fact(Assertion::typed(ground_ind.clone(), Name::dbb("Ground")))?;
        assert_box_facts(kb, &ground_ind, &gbox, ground.len())?;
        cache.borrow_mut().next_ground_id += 1;
    }

    let mut c = cache.borrow_mut();
    c.next_geo_id = base + elements.len();
    c.scenes.insert(dir.to_string(), detection.clone());
    Ok(detection)
}

/// `3D_swrlb_Processing:{Vertical,Horizontal}ElementDetection(?x, ?scene)`.
/// The second argument must be bound to a Scene individual carrying
/// `hasPointCloudDirectory`; the first is bound to each detected element
/// of the requested orientation.
pub struct ElementDetection {
    pub orientation: OrientationClass,
    pub params: DetectionParams,
    pub cache: SharedCache,
}

impl ElementDetection {
    pub fn builtin_name(orientation: OrientationClass) -> Name {
        let local = match orientation {
            OrientationClass::Vertical => "VerticalElementDetection",
            OrientationClass::Horizontal => "HorizontalElementDetection",
            OrientationClass::Undetermined => unreachable!("no built-in for undetermined"),
        };
        Name::new("3D_swrlb_Processing", local)
    }
}

impl BuiltinEval for ElementDetection {
    fn behavior(&self) -> BuiltinBehavior {
        BuiltinBehavior::Generative
    }

    fn arity(&self) -> usize {
        2
    }

    fn eval(
        &self,
        kb: &mut KnowledgeBase,
        args: &[ArgSlot],
    ) -> Result<Vec<Vec<Object>>, EngineError> {
        let scene = match &args[1] {
            ArgSlot::Bound(Object::Individual(n)) => n.clone(),
            ArgSlot::Bound(Object::Literal(_)) => return Err(EngineError::ExpectedIndividual),
            ArgSlot::Unbound => {
                return Err(EngineError::RequiredArgumentUnbound(
                    "scene argument of an element-detection built-in".into(),
                ))
            }
        };
        let dir = match kb.data_value(&scene, &Name::dbb("hasPointCloudDirectory")) {
            Some(Literal::Str(s)) => s.clone(),
            _ => return Err(EngineError::MissingDirectory(scene)),
        };

        let detection = detect_scene(kb, &self.cache, &dir, &self.params)?;
        let found = match self.orientation {
            OrientationClass::Vertical => &detection.vertical,
            OrientationClass::Horizontal => &detection.horizontal,
            OrientationClass::Undetermined => unreachable!(),
        };

        let rows: Vec<Vec<Object>> = match &args[0] {
            ArgSlot::Unbound => found
                .iter()
                .map(|ind| {
                    vec![
                        Object::Individual(ind.clone()),
                        Object::Individual(scene.clone()),
                    ]
                })
                .collect(),
            ArgSlot::Bound(v) => {
                // bound first argument degenerates to a membership test
                let set: BTreeSet<_> = found.iter().map(|n| Object::Individual(n.clone())).collect();
                if set.contains(v) {
                    vec![vec![v.clone(), Object::Individual(scene.clone())]]
                } else {
                    vec![]
                }
            }
        };
        Ok(rows)
    }
}
