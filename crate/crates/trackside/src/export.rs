//! Output writers: the VRML97 world of colored boxes and the sorted
//! triple dump.

use std::fmt::Write as _;

use thiserror::Error;

use crate::annotate::ColorMap;
use crate::kb::{KnowledgeBase, Name};
use crate::topo::geometry_box;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("geometry individual {0} is missing a bounding-box data property")]
    MissingBox(Name),
}

pub const VRML_HEADER: &str = "#VRML V2.0 utf8";

/// One `Transform { ... Box ... }` per boxed geometry individual,
/// ordered by id, colored by the most specific annotated class.
pub fn export_vrml(kb: &KnowledgeBase, colors: &ColorMap) -> Result<String, ExportError> {
    let mut out = String::new();
    out.push_str(VRML_HEADER);
    out.push('\n');
    for ind in kb.individuals_of(&Name::dbb("Geometry")) {
        let aabb = geometry_box(kb, &ind).ok_or_else(|| ExportError::MissingBox(ind.clone()))?;
        let c = aabb.centroid();
        let (dx, dy, dz) = aabb.extents();
        let class = ColorMap::most_specific_class(kb, &ind).expect("typed individual");
        let rgb = colors.color_for(kb, &ind);
        writeln!(out, "# {ind} {class}").expect("string write");
        writeln!(
            out,
            "Transform {{ translation {:.4} {:.4} {:.4} children [ Shape {{ appearance Appearance {{ material Material {{ diffuseColor {:.4} {:.4} {:.4} }} }} geometry Box {{ size {:.4} {:.4} {:.4} }} }} ] }}",
            c.x, c.y, c.z, rgb[0], rgb[1], rgb[2], dx, dy, dz
        )
        .expect("string write");
    }
    Ok(out)
}

/// The KB triple dump (sorted, newline terminated).
pub fn export_triples(kb: &KnowledgeBase) -> String {
    kb.dump_triples()
}
