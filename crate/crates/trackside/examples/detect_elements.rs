//! Cluster a small synthetic cloud into boxed elements and print each
//! detection with its orientation class.

use trackside::detect::{detect_elements, DetectionParams};
use trackside::geom::Point3;
use trackside::synth::{generate, GroundSpec, ObjectSpec, SceneSpec};

fn main() {
    let spec = SceneSpec {
        length_m: 60.0,
        objects: vec![
            ObjectSpec {
                class: "mast".into(),
                center: Point3::new(15.0, 3.0, 3.0),
                dims: [0.3, 0.3, 6.0],
            },
            ObjectSpec {
                class: "schaltanlage".into(),
                center: Point3::new(40.0, -3.5, 0.9),
                dims: [1.2, 0.8, 1.8],
            },
        ],
        ground: GroundSpec {
            x_range: [0.0, 60.0],
            y_range: [-5.0, 5.0],
            z: 0.0,
            points_per_m2: 40.0,
        },
        points_per_m2: 400.0,
        noise_sigma: 0.0,
        seed: 1,
    };
    let (cloud, _) = generate(&spec).expect("valid spec");

    // drop the ground slab, then cluster what remains
    let (_ground, rest) = trackside::cloud::remove_ground(&cloud, 0.30).expect("non-empty cloud");
    let elements = detect_elements(&rest, &DetectionParams::default()).expect("clustering");
    println!("{} elements detected from {} points:", elements.len(), cloud.len());
    for e in &elements {
        let (dx, dy, dz) = e.aabb.extents();
        println!(
            "  geo_{}: {:?}, {:.2} x {:.2} x {:.2} m, {} points",
            e.index, e.orientation, dx, dy, dz, e.point_count
        );
    }
}
