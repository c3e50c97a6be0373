//! Generate the built-in reference scene and print a few statistics.
//!
//! Usage: cargo run --example synthesize_scene -- [OUT_DIR]

use std::path::PathBuf;

use trackside::pipeline::run_synth;
use trackside::synth::{generate, reference_spec};

fn main() {
    let spec = reference_spec();
    let (cloud, truth) = generate(&spec).expect("reference spec is valid");
    println!(
        "reference scene: {} points, {} objects, {} ground points",
        cloud.len(),
        truth.objects.len(),
        truth.ground_range[1] - truth.ground_range[0]
    );
    for class in ["mast", "schaltanlage", "main_signal", "distant_signal"] {
        let n = truth.objects.iter().filter(|o| o.class == class).count();
        println!("  {class}: {n}");
    }

    if let Some(dir) = std::env::args().nth(1) {
        let out = PathBuf::from(dir);
        let (xyz, truth_path) = run_synth(&spec, &out).expect("write scene");
        println!("wrote {} and {}", xyz.display(), truth_path.display());
    }
}
