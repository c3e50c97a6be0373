//! Thin CLI over the library pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use trackside::detect::DetectionParams;
use trackside::pipeline::{self, AnnotateOptions, PipelineError};
use trackside::synth::{self, SceneSpec};
use trackside::topo::TopoParams;

#[derive(Parser)]
#[command(name = "trackside", about = "Knowledge-driven trackside point-cloud annotation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect, classify and export a scene
    Annotate {
        /// Directory of *.xyz point cloud files
        #[arg(long)]
        cloud_dir: PathBuf,
        /// Rule file (defaults to the shipped trackside rules)
        #[arg(long)]
        rules: Option<PathBuf>,
        /// VRML97 output path
        #[arg(long)]
        out: Option<PathBuf>,
        /// Triple dump output path
        #[arg(long)]
        kb_out: Option<PathBuf>,
        /// Color override file (`ClassName r g b` per line)
        #[arg(long)]
        colors: Option<PathBuf>,
        /// Voxel edge length in meters
        #[arg(long, default_value_t = DetectionParams::default().voxel_resolution)]
        voxel: f64,
        /// Minimum points per detected component
        #[arg(long, default_value_t = DetectionParams::default().min_points)]
        min_points: usize,
        /// Contact tolerance for touch/connected predicates, meters
        #[arg(long, default_value_t = TopoParams::default().contact_eps)]
        contact_eps: f64,
        /// Write one .wrl snapshot per engine pass
        #[arg(long)]
        snapshot_passes: bool,
        /// Engine pass budget
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
    },
    /// Generate a synthetic scene (point cloud + ground truth)
    Synth {
        /// Scene spec JSON; omit for the built-in reference scene
        #[arg(long, conflicts_with = "reference")]
        spec: Option<PathBuf>,
        /// Use the built-in reference scene
        #[arg(long)]
        reference: bool,
        /// Output directory
        #[arg(long)]
        out_dir: PathBuf,
        /// RNG seed override
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and safety-check a rule file
    CheckRules {
        #[arg(long)]
        rules: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Annotate {
            cloud_dir,
            rules,
            out,
            kb_out,
            colors,
            voxel,
            min_points,
            contact_eps,
            snapshot_passes,
            max_iters,
        } => {
            let mut opts = AnnotateOptions::new(cloud_dir);
            opts.rules_path = rules;
            opts.out_wrl = out;
            opts.out_kb = kb_out;
            opts.colors_path = colors;
            opts.detection.voxel_resolution = voxel;
            opts.detection.min_points = min_points;
            opts.topology.contact_eps = contact_eps;
            opts.snapshot_passes = snapshot_passes;
            opts.max_iters = max_iters;
            eprintln!(
                "annotate: dir={} voxel={} min_points={} contact_eps={} max_iters={}",
                opts.cloud_dir.display(), voxel, min_points, contact_eps, max_iters
            );
            let report = pipeline::run_annotate(&opts)?;
            eprintln!(
                "fixpoint after {} passes, {} facts added, {} rule firings",
                report.stats.iterations,
                report.stats.facts_added,
                report.stats.rule_fires.values().sum::<usize>()
            );
            for (class, count) in &report.summary {
                println!("{class} {count}");
            }
            Ok(())
        }
        Command::Synth {
            spec,
            reference: _,
            out_dir,
            seed,
        } => {
            let mut scene: SceneSpec = match spec {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
                    serde_json::from_str(&text)
                        .map_err(|e| PipelineError::Spec(format!("{}: {e}", path.display())))?
                }
                None => synth::reference_spec(),
            };
            if let Some(seed) = seed {
                scene.seed = seed;
            }
            let (xyz, truth) = pipeline::run_synth(&scene, &out_dir)?;
            println!("{}", xyz.display());
            println!("{}", truth.display());
            Ok(())
        }
        Command::CheckRules { rules } => {
            for (label, body, head) in pipeline::check_rules(&rules)? {
                println!("{label}: {body} body atoms, {head} head atoms");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
