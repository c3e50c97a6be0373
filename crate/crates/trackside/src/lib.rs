//! Knowledge-driven annotation of trackside point clouds.
//!
//! The pipeline detects geometric elements in an unorganized point
//! cloud as axis-aligned bounding boxes, qualifies their topological
//! relations, infers domain labels with a forward-chaining Horn-rule
//! engine, and writes a colored VRML97 world plus a triple dump of the
//! resulting knowledge base.
//!
//! Start with [`pipeline::run_annotate`] for the full flow, or the
//! `examples/` directory for one runnable program per capability.

pub mod annotate;
pub mod cloud;
pub mod detect;
pub mod export;
pub mod geom;
pub mod kb;
pub mod pipeline;
pub mod registry;
pub mod rules;
pub mod synth;
pub mod topo;
