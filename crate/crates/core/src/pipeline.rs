//! Config-driven experiment runs with a hash manifest.
//!
//! A run executes its stages in order and writes every artifact to one output
//! directory together with `manifest.json`, which embeds the effective config
//! and the SHA-256 of each output. Rerunning a manifest must reproduce every
//! output byte for byte, independent of the thread count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::fld::{self, DimensionParams, ReconstructConfig};
use crate::hausdorff::{self, DiameterGauge, GreedyOptions, ScanOptions, ScanTarget};
use crate::io::{self, Provenance};
use crate::metrics::{self, AdmFunction, LpNorm, SigmaMatrix};
use crate::model::{ModelSpacetime, ModelSpec};
use crate::omspace::{OrderMode, OrderedMeasureSpace};
use crate::pastsets::{self, SetSequence};
use crate::sprinkle::{self, SprinkleSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Encoding of dense matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFormat {
    #[default]
    Bin,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SigmaChoice {
    /// Closed-form model distances.
    Exact,
    #[default]
    Reconstructed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricKind {
    Beem,
    Lp { f: AdmFunction, p: LpNorm },
    /// Probe set: every point.
    Noldus,
}

fn default_dim_points() -> usize {
    50
}

fn default_n_grid() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}

fn default_deltas() -> Vec<f64> {
    vec![0.4, 0.2, 0.1]
}

fn default_threshold() -> f64 {
    0.1
}

fn default_fraction() -> f64 {
    0.5
}

fn default_prefix() -> usize {
    6
}

fn default_compare_count() -> usize {
    100
}

/// One pipeline stage with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageConfig {
    /// Writes `space.oms.json`.
    Sprinkle {
        /// Write the closed relations instead of covering pairs.
        #[serde(default)]
        closed: bool,
    },
    /// Writes `sigma.lormat` or `sigma.csv`.
    Sigma {
        #[serde(default)]
        source: SigmaChoice,
        #[serde(default)]
        reconstruct: ReconstructConfig,
    },
    /// Writes `dimension.json`.
    Dim {
        #[serde(default)]
        params: DimensionParams,
        #[serde(default = "default_dim_points")]
        n_points: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Writes `hausdorff_scan.csv` and `hausdorff_scan.json`.
    Measure {
        #[serde(default = "default_n_grid")]
        n_grid: Vec<f64>,
        #[serde(default = "default_deltas")]
        delta_schedule: Vec<f64>,
        #[serde(default)]
        gauge: DiameterGauge,
        #[serde(default = "default_fraction")]
        min_sigma_fraction: f64,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    /// Writes `metric_<label>.lormat` or `.csv`.
    Metric { metric: MetricKind },
    /// Writes `ip_report.json`.
    Ip {
        /// Coordinates the sequence converges to; defaults to the slab centre.
        #[serde(default)]
        target: Option<Vec<f64>>,
        #[serde(default = "default_prefix")]
        n_prefix: usize,
        #[serde(default)]
        causal: bool,
    },
    /// Compares the stage's sigma with the closed-form model distances; writes
    /// `sigma_compare.csv` and `sigma_compare.json`.
    Compare {
        #[serde(default = "default_compare_count")]
        min_count: usize,
    },
}

impl StageConfig {
    pub fn name(&self) -> &'static str {
        match self {
            StageConfig::Sprinkle { .. } => "sprinkle",
            StageConfig::Sigma { .. } => "sigma",
            StageConfig::Dim { .. } => "dim",
            StageConfig::Measure { .. } => "measure",
            StageConfig::Metric { .. } => "metric",
            StageConfig::Ip { .. } => "ip",
            StageConfig::Compare { .. } => "compare",
        }
    }

    fn requires(&self) -> &'static [&'static str] {
        match self {
            StageConfig::Sprinkle { .. } => &[],
            StageConfig::Sigma { .. } | StageConfig::Dim { .. } | StageConfig::Ip { .. } => &["sprinkle"],
            StageConfig::Measure { .. } | StageConfig::Compare { .. } => &["sprinkle", "sigma"],
            StageConfig::Metric { metric: MetricKind::Beem } => &["sprinkle"],
            StageConfig::Metric { .. } => &["sprinkle", "sigma"],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub model: ModelSpec,
    pub sprinkle: SprinkleSpec,
    #[serde(default)]
    pub matrix_format: MatrixFormat,
    pub stages: Vec<StageConfig>,
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the JSON path of the offending value.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = io::read_file(path)?;
        let text = String::from_utf8(bytes).map_err(|e| config_err(".", format!("not UTF-8: {e}")))?;
        Self::from_json(&text)
    }

    /// Compact JSON of the parsed config; its hash identifies the run.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Schema and parameter ranges. Stage order is checked separately by
    /// [`ExperimentConfig::check_dependencies`].
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(config_err("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        self.model.build().map_err(|e| config_err("model", e.to_string()))?;
        match (self.sprinkle.density, self.sprinkle.n_points) {
            (Some(d), None) if d > 0.0 && d.is_finite() => {}
            (Some(d), None) => return Err(config_err("sprinkle.density", format!("must be positive, got {d}"))),
            (None, Some(n)) if n > 0 => {}
            (None, Some(_)) => return Err(config_err("sprinkle.n_points", "must be positive")),
            _ => return Err(config_err("sprinkle", "set exactly one of `density` and `n_points`")),
        }
        if self.stages.is_empty() {
            return Err(config_err("stages", "at least one stage is required"));
        }
        for (k, s) in self.stages.iter().enumerate() {
            let at = |field: &str| format!("stages[{k}].{field}");
            match s {
                StageConfig::Sigma { reconstruct, .. } => {
                    if let fld::DimensionMode::Fixed { value } = reconstruct.dimension {
                        if !(value >= 1.0 && value.is_finite()) {
                            return Err(config_err(at("reconstruct.dimension.value"), "dimension must be >= 1"));
                        }
                    }
                    check_dim_params(&reconstruct.dim_params, &at("reconstruct.dim_params"))?;
                }
                StageConfig::Dim { params, n_points, .. } => {
                    check_dim_params(params, &at("params"))?;
                    if *n_points == 0 {
                        return Err(config_err(at("n_points"), "must be positive"));
                    }
                }
                StageConfig::Measure { n_grid, delta_schedule, min_sigma_fraction, threshold, .. } => {
                    if n_grid.is_empty() || n_grid.iter().any(|n| !(*n > 0.0 && n.is_finite())) || n_grid.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(config_err(at("n_grid"), "needs positive, strictly ascending values"));
                    }
                    if delta_schedule.is_empty() || delta_schedule.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                        return Err(config_err(at("delta_schedule"), "needs positive values"));
                    }
                    if !(0.0..1.0).contains(min_sigma_fraction) {
                        return Err(config_err(at("min_sigma_fraction"), "must lie in [0, 1)"));
                    }
                    if !(*threshold > 0.0) {
                        return Err(config_err(at("threshold"), "must be positive"));
                    }
                }
                StageConfig::Metric { metric: MetricKind::Lp { f, .. } } => {
                    f.validate().map_err(|e| config_err(at("metric.f"), e.to_string()))?;
                }
                StageConfig::Ip { target, n_prefix, .. } => {
                    if let Some(t) = target {
                        if Some(t.len()) != self.model.build().ok().map(|m| m.dimension()) {
                            return Err(config_err(at("target"), "length must equal the model dimension"));
                        }
                    }
                    if *n_prefix == 0 {
                        return Err(config_err(at("n_prefix"), "must be positive"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Every stage must come after the stages it reads from.
    pub fn check_dependencies(&self) -> Result<()> {
        let mut seen: Vec<&str> = Vec::new();
        for s in &self.stages {
            if let Some(missing) = s.requires().iter().find(|r| !seen.contains(r)) {
                return Err(Error::MissingStage { stage: s.name().into(), missing: (*missing).into() });
            }
            seen.push(s.name());
        }
        Ok(())
    }
}

fn check_dim_params(p: &DimensionParams, at: &str) -> Result<()> {
    if p.k_min > p.k_max {
        return Err(config_err(format!("{at}.k_min"), "must not exceed k_max"));
    }
    if p.n_pairs == 0 {
        return Err(config_err(format!("{at}.n_pairs"), "must be positive"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputRecord>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = io::read_file(path)?;
        let de = &mut serde_json::Deserializer::from_slice(&bytes);
        let m: Self = serde_path_to_error::deserialize(de).map_err(|e| config_err(e.path().to_string(), e.into_inner().to_string()))?;
        m.config.validate()?;
        Ok(m)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

struct RunState<'a> {
    dir: &'a Path,
    outputs: Vec<PathBuf>,
    model: ModelSpacetime,
    space: Option<OrderedMeasureSpace>,
    sigma: Option<SigmaMatrix>,
}

impl RunState<'_> {
    fn path(&mut self, file: &str) -> PathBuf {
        let p = self.dir.join(file);
        self.outputs.push(p.clone());
        p
    }

    fn space(&self) -> &OrderedMeasureSpace {
        self.space.as_ref().expect("dependency order checked")
    }

    fn sigma(&self) -> &SigmaMatrix {
        self.sigma.as_ref().expect("dependency order checked")
    }
}

/// Runs every stage and writes the manifest last.
pub fn run_pipeline(cfg: &ExperimentConfig, output_dir: &Path) -> Result<Manifest> {
    cfg.validate()?;
    cfg.check_dependencies()?;
    std::fs::create_dir_all(output_dir).map_err(|source| Error::Write { path: output_dir.to_path_buf(), source })?;
    let model = cfg.model.build()?;
    let mut st = RunState { dir: output_dir, outputs: Vec::new(), model, space: None, sigma: None };
    for stage in &cfg.stages {
        log::info!("stage {}", stage.name());
        run_stage(cfg, stage, &mut st)?;
    }
    let mut outputs = Vec::new();
    for p in &st.outputs {
        outputs.push(OutputRecord {
            file: p.file_name().expect("output file").to_string_lossy().into_owned(),
            sha256: sha256_hex(&io::read_file(p)?),
        });
    }
    let manifest = Manifest {
        schema: SCHEMA_VERSION,
        tool: "ordgeo".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(cfg.canonical_json().as_bytes()),
        seed: cfg.sprinkle.seed,
        config: cfg.clone(),
        outputs,
    };
    io::write_json(&output_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn run_stage(cfg: &ExperimentConfig, stage: &StageConfig, st: &mut RunState) -> Result<()> {
    let fmt = cfg.matrix_format;
    match stage {
        StageConfig::Sprinkle { closed } => {
            let space = sprinkle::sprinkle(&cfg.sprinkle.to_config(st.model.clone())?)?;
            let p = st.path("space.oms.json");
            io::save_oms(&space, &p, *closed)?;
            st.space = Some(space);
        }
        StageConfig::Sigma { source, reconstruct } => {
            let sigma = match source {
                SigmaChoice::Exact => SigmaMatrix::exact(st.space(), &st.model)?,
                SigmaChoice::Reconstructed => fld::reconstruct_sigma(st.space(), reconstruct)?,
            };
            match fmt {
                MatrixFormat::Bin => {
                    let p = st.path("sigma.lormat");
                    io::write_sigma_lormat(st.space(), &sigma, &p)?;
                }
                MatrixFormat::Csv => {
                    let p = st.path("sigma.csv");
                    io::write_sigma_csv(st.space(), &sigma, &p)?;
                }
            }
            st.sigma = Some(sigma);
        }
        StageConfig::Dim { params, n_points, seed } => {
            let est = fld::sample_dimensions(st.space(), params, *n_points, *seed);
            let records = io::dimension_records(st.space(), &est);
            let p = st.path("dimension.json");
            io::write_dimension_json(&records, &p)?;
        }
        StageConfig::Measure { n_grid, delta_schedule, gauge, min_sigma_fraction, threshold } => {
            let target = BitSet::full(st.space().len());
            let opts = ScanOptions {
                threshold: *threshold,
                greedy: GreedyOptions { gauge: *gauge, min_sigma_fraction: *min_sigma_fraction, seed: Vec::new() },
            };
            let scan = hausdorff::hausdorff_scan(
                &ScanTarget::Sample { space: st.space(), target: &target, sigma: st.sigma(), seed_region: None },
                n_grid,
                delta_schedule,
                &opts,
            )?;
            let p = st.path("hausdorff_scan.csv");
            io::write_scan_csv(&scan, &p)?;
            let p = st.path("hausdorff_scan.json");
            io::write_json(&p, &scan)?;
        }
        StageConfig::Metric { metric } => {
            let (label, d, prov) = match metric {
                MetricKind::Beem => ("beem".to_string(), metrics::beem_metric(st.space()), Provenance::Exact),
                MetricKind::Lp { f, p } => {
                    let d = metrics::lp_pullback(st.sigma(), st.space().weights(), *f, *p)?;
                    let p = match p {
                        LpNorm::One => "1",
                        LpNorm::Two => "2",
                        LpNorm::Inf => "inf",
                    };
                    (format!("lp_{}_{p}", f.label()), d, Provenance::of_sigma(st.sigma().source()))
                }
                MetricKind::Noldus => {
                    let all: Vec<usize> = (0..st.space().len()).collect();
                    ("noldus".to_string(), metrics::noldus_metric(st.sigma(), &all)?, Provenance::of_sigma(st.sigma().source()))
                }
            };
            let label: String = label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' }).collect();
            match fmt {
                MatrixFormat::Bin => {
                    let p = st.path(&format!("metric_{label}.lormat"));
                    io::write_distance_lormat(st.space(), &d, &p)?;
                }
                MatrixFormat::Csv => {
                    let p = st.path(&format!("metric_{label}.csv"));
                    io::write_distance_csv(st.space(), &d, prov, &p)?;
                }
            }
        }
        StageConfig::Ip { target, n_prefix, causal } => {
            let mode = if *causal { OrderMode::Causal } else { OrderMode::Chrono };
            let centre = target.clone().unwrap_or_else(|| slab_centre(&st.model));
            let report = ip_report(st.space(), &centre, *n_prefix, mode)?;
            let p = st.path("ip_report.json");
            io::write_json(&p, &report)?;
        }
        StageConfig::Compare { min_count } => {
            let exact = SigmaMatrix::exact(st.space(), &st.model)?;
            let cmp = io::compare_sigma(st.space(), st.sigma(), &exact, *min_count)?;
            let p = st.path("sigma_compare.csv");
            io::write_comparison_csv(&cmp, &p)?;
            let p = st.path("sigma_compare.json");
            io::write_json(&p, &cmp)?;
        }
    }
    Ok(())
}

/// Past-set limits along a sequence of principal pasts approaching a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IpReport {
    pub target_id: u64,
    pub prefix_ids: Vec<u64>,
    #[serde(flatten)]
    pub limits: pastsets::LimitReport,
}

/// The sequence of principal pasts of the `n_prefix` points nearest (in
/// coordinates) to the point closest to `centre`, farthest first, followed by
/// the constant tail at that point.
pub fn ip_report(space: &OrderedMeasureSpace, centre: &[f64], n_prefix: usize, mode: OrderMode) -> Result<IpReport> {
    let coords = space.coords().ok_or_else(|| Error::InvalidArgument("ip needs point coordinates".into()))?;
    if space.len() < 2 {
        return Err(Error::InsufficientData("ip needs at least two points".into()));
    }
    if coords[0].dim() != centre.len() {
        return Err(Error::ShapeMismatch(format!("target has {} coordinates, points have {}", centre.len(), coords[0].dim())));
    }
    let dist = |i: usize, c: &[f64]| coords[i].0.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let x = (0..space.len()).min_by(|&a, &b| dist(a, centre).total_cmp(&dist(b, centre)).then(a.cmp(&b))).expect("non-empty");
    let mut near: Vec<usize> = (0..space.len()).filter(|&i| i != x).collect();
    near.sort_by(|&a, &b| dist(a, &coords[x].0).total_cmp(&dist(b, &coords[x].0)).then(a.cmp(&b)));
    near.truncate(n_prefix);
    near.reverse();
    let prefix = near.iter().map(|&i| pastsets::principal(space, i, mode)).collect();
    let seq = SetSequence::new(space, prefix, vec![pastsets::principal(space, x, mode)])?;
    Ok(IpReport {
        target_id: space.id(x),
        prefix_ids: near.iter().map(|&i| space.id(i)).collect(),
        limits: pastsets::tau_plus_convergence_demo(space, &seq, mode),
    })
}

/// Centre of the model slab at mid time.
pub fn slab_centre(model: &ModelSpacetime) -> Vec<f64> {
    let (t0, t1) = model.time_interval();
    std::iter::once(0.5 * (t0 + t1)).chain(std::iter::repeat_n(0.0, model.dimension() - 1)).collect()
}

/// Outcome of [`rerun_manifest`].
#[derive(Clone, Debug, PartialEq)]
pub struct RerunReport {
    pub manifest: Manifest,
    /// Files whose hash differs from the original manifest.
    pub mismatches: Vec<String>,
}

impl RerunReport {
    pub fn identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Reruns the config embedded in a manifest into `output_dir` and compares the
/// output hashes.
pub fn rerun_manifest(manifest_path: &Path, output_dir: &Path) -> Result<RerunReport> {
    let original = Manifest::load(manifest_path)?;
    let manifest = run_pipeline(&original.config, output_dir)?;
    let mut mismatches: Vec<String> = original
        .outputs
        .iter()
        .filter(|o| !manifest.outputs.contains(o))
        .map(|o| o.file.clone())
        .collect();
    if manifest.config_sha256 != original.config_sha256 {
        mismatches.push("config".into());
    }
    Ok(RerunReport { manifest, mismatches })
}
