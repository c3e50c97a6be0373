//! The complete flow: synthesize the reference corridor, annotate it,
//! and write the VRML world plus the triple dump.
//!
//! Usage: cargo run --release --example full_pipeline -- [OUT_DIR]

use std::path::PathBuf;

use trackside::pipeline::{run_annotate, run_synth, AnnotateOptions};
use trackside::synth::reference_spec;

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let scene_dir = out_dir.join("trackside_scene");

    let spec = reference_spec();
    let (xyz, _) = run_synth(&spec, &scene_dir).expect("write scene");
    println!("scene written to {}", xyz.display());

    let mut opts = AnnotateOptions::new(&scene_dir);
    opts.out_wrl = Some(scene_dir.join("scene.wrl"));
    opts.out_kb = Some(scene_dir.join("scene.triples"));
    let report = run_annotate(&opts).expect("pipeline");

    println!(
        "fixpoint after {} passes, {} facts added",
        report.stats.iterations, report.stats.facts_added
    );
    for (class, count) in &report.summary {
        println!("  {class}: {count}");
    }
    println!("world: {}", scene_dir.join("scene.wrl").display());
}
