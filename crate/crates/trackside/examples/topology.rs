//! Exercise the topological predicates on a handful of boxes.

use trackside::geom::{Aabb, Point3};
use trackside::topo::{
    intersect, is_connected, is_distant_from, perpendicular, touch, upper, TopoParams,
};

fn cube(x: f64, y: f64, z: f64, side: f64) -> Aabb {
    Aabb::from_center_dims(Point3::new(x, y, z), (side, side, side))
}

fn main() {
    let p = TopoParams::default();
    let a = cube(0.0, 0.0, 0.0, 2.0);
    let b = cube(1.0, 0.0, 0.0, 2.0); // overlaps a
    let c = cube(2.05, 0.0, 0.0, 2.0); // touches a within contact_eps
    let d = cube(0.0, 0.0, 2.5, 2.0); // sits above a
    let mast = Aabb::from_center_dims(Point3::new(10.0, 0.0, 3.0), (0.3, 0.3, 6.0));
    let beam = Aabb::from_center_dims(Point3::new(10.0, 0.0, 6.1), (4.0, 0.3, 0.3));

    println!("intersect(a, b)      = {}", intersect(&a, &b));
    println!("touch(a, c)          = {}", touch(&a, &c, p.contact_eps));
    println!("upper(d, a)          = {}", upper(&d, &a, p.upper_eps));
    println!("perpendicular(mast, beam) = {}", perpendicular(&mast, &beam));
    println!("is_connected(mast, beam)  = {}", is_connected(&mast, &beam, p.contact_eps));

    let far = cube(1000.0, 0.0, 0.0, 2.0);
    println!(
        "is_distant_from(a, far, 1000 +- 50) = {}",
        is_distant_from(&a, &far, 1000.0, 50.0)
    );
}
