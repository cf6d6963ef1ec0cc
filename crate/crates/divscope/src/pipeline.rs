//! Staged end-to-end run: dist → gram → eigs → embed → (assign) → density.
//!
//! Each stage reads its inputs back from the files written by the previous
//! stage, so an output directory can be inspected (or a stage rerun) at any
//! point. The manifest records every file written, once.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use divscope_core::align::ScoringScheme;
use divscope_core::assign::{classify, ReferenceDb};
use divscope_core::density::{default_radius, hexbin, parallel_coords};
use divscope_core::distmat::{pairwise_cross, pairwise_self};
use divscope_core::mds::{embedding_from_spectrum, embedding_spectrum, gram_from_distances, GramMatrix};
use divscope_core::rsvd::SolverOptions;

use crate::formats::{self, FormatError};

pub const DISTANCES: &str = "distances.dvs";
pub const GRAM: &str = "gram.dvs";
pub const SPECTRUM: &str = "spectrum.dvs";
pub const EMBEDDING: &str = "embedding.tsv";
pub const CROSS: &str = "cross.dvs";
pub const ASSIGNMENTS: &str = "assignments.tsv";
pub const PCOORDS: &str = "pcoords.tsv";
pub const MANIFEST: &str = "manifest.json";

/// Axis pairs (1-based in file names) binned when the rank allows.
pub const HEXBIN_AXES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
/// Leading dimensions exported to the parallel-coordinates table.
pub const PCOORDS_DIMS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Dist,
    Gram,
    Eigs,
    Embed,
    Assign,
    Density,
    Manifest,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Dist => "dist",
            Stage::Gram => "gram",
            Stage::Eigs => "eigs",
            Stage::Embed => "embed",
            Stage::Assign => "assign",
            Stage::Density => "density",
            Stage::Manifest => "manifest",
        }
    }

    /// 2 for configuration errors, 3 and up for the stages in run order.
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Config => 2,
            Stage::Dist => 3,
            Stage::Gram => 4,
            Stage::Eigs => 5,
            Stage::Embed => 6,
            Stage::Assign => 7,
            Stage::Density => 8,
            Stage::Manifest => 9,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{} stage failed: {message}", stage.name())]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    fn new(stage: Stage, err: impl std::fmt::Display) -> Self {
        Self {
            stage,
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.stage.exit_code()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub refs: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub rank: usize,
    pub gap: f64,
    pub seed: u64,
    pub threads: usize,
    pub oversampling: usize,
    pub power_iters: usize,
    /// Hexagon circumradius; `None` picks (max axis range)/50 per grid.
    pub radius: Option<f64>,
    pub outdir: PathBuf,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, outdir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            refs: None,
            labels: None,
            rank: 50,
            gap: 0.97,
            seed: 0,
            threads: 1,
            oversampling: SolverOptions::DEFAULT_OVERSAMPLING,
            power_iters: SolverOptions::DEFAULT_POWER_ITERS,
            radius: None,
            outdir: outdir.into(),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: &str| Err(PipelineError::new(Stage::Config, msg));
        if self.rank == 0 {
            return fail("rank must be at least 1");
        }
        if !(self.gap > 0.0 && self.gap <= 1.0) {
            return fail("gap must lie in (0, 1]");
        }
        if self.threads == 0 {
            return fail("threads must be at least 1");
        }
        if self.refs.is_some() != self.labels.is_some() {
            return fail("--refs and --labels must be given together");
        }
        if let Some(r) = self.radius {
            if !(r.is_finite() && r > 0.0) {
                return fail("radius must be positive");
            }
        }
        Ok(())
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions::new(self.rank)
            .oversampling(self.oversampling)
            .power_iters(self.power_iters)
            .seed(self.seed)
            .threads(self.threads)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub path: String,
    pub stage: Stage,
    /// Wall time of the stage that wrote it, in seconds.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub config: PipelineConfig,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn paths_for(&self, stage: Stage) -> Vec<&str> {
        self.artifacts
            .iter()
            .filter(|a| a.stage == stage)
            .map(|a| a.path.as_str())
            .collect()
    }
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    artifacts: Vec<Artifact>,
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.outdir.join(name)
    }

    /// Times `body`, then records every path it reports as written.
    fn stage<T>(
        &mut self,
        stage: Stage,
        body: impl FnOnce(&Self) -> Result<(T, Vec<PathBuf>), PipelineError>,
    ) -> Result<T, PipelineError> {
        let start = Instant::now();
        let (value, written) = body(self)?;
        let wall_time = start.elapsed().as_secs_f64();
        for p in written {
            let rel = p.strip_prefix(&self.cfg.outdir).unwrap_or(&p);
            self.artifacts.push(Artifact {
                path: rel.display().to_string(),
                stage,
                wall_time,
            });
        }
        Ok(value)
    }
}

fn at(stage: Stage) -> impl Fn(FormatError) -> PipelineError {
    move |e| PipelineError::new(stage, e)
}

/// Runs every stage and writes `manifest.json` into the output directory.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.outdir).map_err(|e| PipelineError::new(Stage::Config, format!("{}: {e}", cfg.outdir.display())))?;
    let mut run = Run {
        cfg,
        artifacts: Vec::new(),
    };
    let scheme = ScoringScheme::DEFAULT;

    let reads = run.stage(Stage::Dist, |r| {
        let reads = formats::read_fasta(&cfg.input).map_err(at(Stage::Dist))?;
        let d = pairwise_self(&reads, &scheme, cfg.threads).map_err(|e| PipelineError::new(Stage::Dist, e))?;
        let out = r.path(DISTANCES);
        formats::write_matrix(&out, &d).map_err(at(Stage::Dist))?;
        Ok((reads, vec![out]))
    })?;
    let ids = reads.ids();

    run.stage(Stage::Gram, |r| {
        let d = formats::read_matrix(&r.path(DISTANCES)).map_err(at(Stage::Gram))?;
        let g = gram_from_distances(&d, cfg.threads).map_err(|e| PipelineError::new(Stage::Gram, e))?;
        let out = r.path(GRAM);
        formats::write_dense(&out, g.as_matrix()).map_err(at(Stage::Gram))?;
        Ok(((), vec![out]))
    })?;

    run.stage(Stage::Eigs, |r| {
        let g = formats::read_dense(&r.path(GRAM)).map_err(at(Stage::Eigs))?;
        let g = GramMatrix::from_matrix(g).map_err(|e| PipelineError::new(Stage::Eigs, e))?;
        let s = embedding_spectrum(&g, cfg.rank, &cfg.solver()).map_err(|e| PipelineError::new(Stage::Eigs, e))?;
        let written = formats::write_spectrum(&r.path(SPECTRUM), &s).map_err(at(Stage::Eigs))?;
        Ok(((), written.to_vec()))
    })?;

    run.stage(Stage::Embed, |r| {
        let s = formats::read_spectrum(&r.path(SPECTRUM)).map_err(at(Stage::Embed))?;
        let e = embedding_from_spectrum(&s, cfg.rank);
        let written = formats::write_embedding(&r.path(EMBEDDING), &e, &ids).map_err(at(Stage::Embed))?;
        Ok(((), written.to_vec()))
    })?;

    let labels = match (&cfg.refs, &cfg.labels) {
        (Some(refs), Some(labels)) => Some(run.stage(Stage::Assign, |r| {
            let fail = at(Stage::Assign);
            let refs = formats::read_fasta(refs).map_err(&fail)?;
            let labels = formats::read_labels(labels).map_err(&fail)?;
            let db = ReferenceDb::new(refs, labels).map_err(|e| PipelineError::new(Stage::Assign, e))?;
            let cross = pairwise_cross(&reads, db.reads(), &scheme, cfg.threads)
                .map_err(|e| PipelineError::new(Stage::Assign, e))?;
            let cross_path = r.path(CROSS);
            formats::write_matrix(&cross_path, &cross).map_err(&fail)?;
            let cross = formats::read_matrix(&cross_path).map_err(&fail)?;
            let asg = classify(&reads, &db, &cross, cfg.gap).map_err(|e| PipelineError::new(Stage::Assign, e))?;
            let out = r.path(ASSIGNMENTS);
            formats::write_atomic(&out, formats::assignments_tsv(&asg).as_bytes()).map_err(&fail)?;
            Ok((out, vec![cross_path.clone(), r.path(ASSIGNMENTS)]))
        })?),
        _ => None,
    };

    run.stage(Stage::Density, |r| {
        let fail = at(Stage::Density);
        let (ids, e) = formats::read_embedding(&r.path(EMBEDDING)).map_err(&fail)?;
        let mut written = Vec::new();
        for (i, j) in HEXBIN_AXES {
            if j >= e.rank() {
                continue;
            }
            let radius = cfg
                .radius
                .unwrap_or_else(|| default_radius(&e.coords.column(i), &e.coords.column(j)));
            let g = hexbin(&e, (i, j), radius, cfg.threads).map_err(|e| PipelineError::new(Stage::Density, e))?;
            let out = r.path(&hexbin_name(i, j));
            formats::write_atomic(&out, formats::hexbin_tsv(&g).as_bytes()).map_err(&fail)?;
            written.push(out);
        }
        let point_labels: Option<Vec<String>> = match &labels {
            Some(path) => {
                let map = formats::read_point_labels(path).map_err(&fail)?;
                Some(ids.iter().map(|id| map.get(id).cloned().unwrap_or_default()).collect())
            }
            None => None,
        };
        let k = PCOORDS_DIMS.min(e.rank());
        let t = parallel_coords(&e, &ids, k, point_labels.as_deref(), None)
            .map_err(|e| PipelineError::new(Stage::Density, e))?;
        let out = r.path(PCOORDS);
        formats::write_atomic(&out, formats::pcoords_tsv(&t).as_bytes()).map_err(&fail)?;
        written.push(out);
        Ok(((), written))
    })?;

    let mut manifest = Manifest {
        config: cfg.clone(),
        artifacts: run.artifacts,
    };
    manifest.artifacts.push(Artifact {
        path: MANIFEST.to_string(),
        stage: Stage::Manifest,
        wall_time: 0.0,
    });
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| PipelineError::new(Stage::Manifest, e))?;
    formats::write_atomic(&cfg.outdir.join(MANIFEST), json.as_bytes()).map_err(at(Stage::Manifest))?;
    Ok(manifest)
}

/// `hexbin_<i>_<j>.tsv` with 1-based axis numbers.
pub fn hexbin_name(i: usize, j: usize) -> String {
    format!("hexbin_{}_{}.tsv", i + 1, j + 1)
}

/// Default worker count: the machine's available parallelism.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn manifest_path(outdir: &Path) -> PathBuf {
    outdir.join(MANIFEST)
}
