//! End-to-end orchestration used by both the CLI binary and the tests:
//! scene KB setup, rule loading, fixpoint run and output writing.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::annotate::{self, ColorMap};
use crate::detect::DetectionParams;
use crate::export;
use crate::kb::{Assertion, KnowledgeBase, Literal, Name};
use crate::registry::default_registry;
use crate::rules::{
    ensure_rule_vocabulary, parse_rules, run_to_fixpoint_observed, EngineError, ParseError,
    RunStats,
};
use crate::synth::{self, SceneSpec};
use crate::topo::TopoParams;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("rule error: {0}")]
    Rules(#[from] ParseError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("fixpoint not reached: {0}")]
    Fixpoint(String),
    #[error("engine error: {0}")]
    Engine(String),
    #[error("invalid scene spec: {0}")]
    Spec(String),
}

impl PipelineError {
    /// Process exit code: 1 rule errors, 2 I/O, 3 fixpoint overrun.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Rules(_) | PipelineError::Spec(_) => 1,
            PipelineError::Io(_) => 2,
            PipelineError::Fixpoint(_) => 3,
            PipelineError::Engine(_) => 2,
        }
    }
}

impl From<EngineError> for PipelineError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::FixpointNotReached { .. } => PipelineError::Fixpoint(e.to_string()),
            EngineError::Cloud(c) => PipelineError::Io(c.to_string()),
            other => PipelineError::Engine(other.to_string()),
        }
    }
}

fn read_file(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), PipelineError> {
    fs::write(path, content).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct AnnotateOptions {
    pub cloud_dir: PathBuf,
    /// rule file; `None` uses the shipped defaults
    pub rules_path: Option<PathBuf>,
    pub out_wrl: Option<PathBuf>,
    pub out_kb: Option<PathBuf>,
    pub colors_path: Option<PathBuf>,
    pub detection: DetectionParams,
    pub topology: TopoParams,
    /// write one `.wrl` per engine pass next to `out_wrl`
    pub snapshot_passes: bool,
    pub max_iters: usize,
}

impl AnnotateOptions {
    pub fn new(cloud_dir: impl Into<PathBuf>) -> Self {
        AnnotateOptions {
            cloud_dir: cloud_dir.into(),
            rules_path: None,
            out_wrl: None,
            out_kb: None,
            colors_path: None,
            detection: DetectionParams::default(),
            topology: TopoParams::default(),
            snapshot_passes: false,
            max_iters: 100,
        }
    }
}

#[derive(Debug)]
pub struct AnnotateReport {
    pub kb: KnowledgeBase,
    pub stats: RunStats,
    pub summary: Vec<(Name, usize)>,
}

/// Build the scene KB, run the rules to fixpoint and write the
/// requested outputs.
pub fn run_annotate(opts: &AnnotateOptions) -> Result<AnnotateReport, PipelineError> {
    let rules_text = match &opts.rules_path {
        Some(p) => read_file(p)?,
        None => annotate::default_rules().to_string(),
    };
    let registry = default_registry(opts.detection, opts.topology);
    let rules = parse_rules(&rules_text, &registry)?;

    let mut colors = ColorMap::default();
    if let Some(p) = &opts.colors_path {
        let text = read_file(p)?;
        colors
            .apply_overrides(&text)
            .map_err(|e| PipelineError::Io(format!("{}: {e}", p.display())))?;
    }

    let mut kb = KnowledgeBase::with_schema();
    ensure_rule_vocabulary(&mut kb, &rules);
    let scene = Name::dbb("scene");
    kb.assert_fact(Assertion::typed(scene.clone(), Name::dbb("Scene")))
        .expect("schema declares Scene");
    kb.assert_fact(Assertion::data(
        scene,
        Name::dbb("hasPointCloudDirectory"),
        Literal::Str(opts.cloud_dir.display().to_string()),
    ))
    .expect("scene individual just registered");

    let mut snapshot_err = None;
    let stats = run_to_fixpoint_observed(&mut kb, &registry, &rules, opts.max_iters, |pass, kb| {
        if opts.snapshot_passes && snapshot_err.is_none() {
            if let Some(out) = &opts.out_wrl {
                let path = out.with_extension(format!("pass{pass}.wrl"));
                match export::export_vrml(kb, &colors) {
                    Ok(text) => {
                        if let Err(e) = write_file(&path, &text) {
                            snapshot_err = Some(e);
                        }
                    }
                    Err(e) => snapshot_err = Some(PipelineError::Engine(e.to_string())),
                }
            }
        }
    })?;
    if let Some(e) = snapshot_err {
        return Err(e);
    }

    if let Some(out) = &opts.out_wrl {
        let text = export::export_vrml(&kb, &colors)
            .map_err(|e| PipelineError::Engine(e.to_string()))?;
        write_file(out, &text)?;
    }
    if let Some(out) = &opts.out_kb {
        write_file(out, &export::export_triples(&kb))?;
    }

    let summary = annotate::summarize(&kb);
    Ok(AnnotateReport { kb, stats, summary })
}

/// Materialize a scene spec into `out_dir/scene.xyz` + `out_dir/truth.json`.
pub fn run_synth(
    spec: &SceneSpec,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf), PipelineError> {
    let (cloud, truth) =
        synth::generate(spec).map_err(|e| PipelineError::Spec(e.to_string()))?;
    fs::create_dir_all(out_dir)
        .map_err(|e| PipelineError::Io(format!("{}: {e}", out_dir.display())))?;
    let xyz = out_dir.join("scene.xyz");
    let truth_path = out_dir.join("truth.json");
    crate::cloud::write_xyz(&xyz, &cloud.points)
        .map_err(|e| PipelineError::Io(format!("{}: {e}", xyz.display())))?;
    let json = serde_json::to_string_pretty(&truth)
        .map_err(|e| PipelineError::Io(e.to_string()))?;
    write_file(&truth_path, &json)?;
    Ok((xyz, truth_path))
}

/// Parse and safety-check a rule file; returns per-rule (label, body
/// atoms, head atoms).
pub fn check_rules(path: &Path) -> Result<Vec<(String, usize, usize)>, PipelineError> {
    let text = read_file(path)?;
    let registry = default_registry(DetectionParams::default(), TopoParams::default());
    let rules = parse_rules(&text, &registry)?;
    Ok(rules
        .iter()
        .map(|r| (r.label.clone(), r.body.len(), r.head.len()))
        .collect())
}
