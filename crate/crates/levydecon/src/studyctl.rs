//! Experiment orchestration: JSON configuration, seeded parallel
//! replication, summary tables, and plot-data emission.
//!
//! A study simulates `replications` independent fields, runs the full
//! estimation pipeline for every requested band `l`, scores both the raw
//! and the sign-projected estimator against the analytic truth in
//! `L²(|x|^c dx)`, and tabulates mean/sd of the squared errors and wall
//! times per `(estimator, l)` row. Replications are distributed over a
//! worker pool; per-replication seeds come from the splitmix64 counter
//! scheme, so results are identical for any thread count and bit-identical
//! across runs with the same config and seed (timings aside).

use std::fmt::Write as FmtWrite;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{
    l2_error, run_pipeline, write_estimate_csv, EstimateError, EstimateResult, EstimatorConfig,
};
use crate::levy_model::{KernelSpec, LevyDensity};
use crate::logfourier::{LogGrid, SignedGridFunction};
use crate::multiplier::{multiplier_closed_form, MultiplierError, MultiplierFunction};
use crate::simulate::{
    derive_replication_seed, simulate_field, FieldSample, GridSpec, SimulateError,
};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "LEVYDECON_THREADS";

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("replication {index} failed: {source}")]
    Replication {
        index: usize,
        #[source]
        source: ReplicationError,
    },
    #[error("i/o error at {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Error)]
pub enum ReplicationError {
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

impl From<MultiplierError> for StudyError {
    fn from(e: MultiplierError) -> Self {
        StudyError::Config(format!("multiplier: {e}"))
    }
}

/// The integrator density catalog exposed to configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum V0Id {
    TemperedHalfgauss,
}

impl V0Id {
    pub fn density(self) -> LevyDensity {
        match self {
            V0Id::TemperedHalfgauss => LevyDensity::TemperedHalfGauss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletConfig {
    pub a0: f64,
    pub b0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kernel: KernelSpec,
    pub v0: V0Id,
    /// Optional explicit integrator drift/Gaussian part; the canonical
    /// pure-jump values are used when absent.
    #[serde(default)]
    pub triplet: Option<TripletConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for LogGridConfig {
    fn default() -> Self {
        Self { t_min: -12.0, t_max: 12.0, points: 4096 }
    }
}

impl LogGridConfig {
    pub fn build(&self) -> Result<LogGrid, StudyError> {
        LogGrid::new(self.t_min, self.t_max, self.points)
            .map_err(|e| StudyError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThreadCount {
    Auto(AutoThreads),
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoThreads {
    #[serde(rename = "auto")]
    Auto,
}

impl Default for ThreadCount {
    fn default() -> Self {
        ThreadCount::Auto(AutoThreads::Auto)
    }
}

impl ThreadCount {
    /// Explicit count, or the `LEVYDECON_THREADS` variable, or the pool
    /// default.
    pub fn resolve(self) -> Option<usize> {
        match self {
            ThreadCount::Count(n) => Some(n.max(1)),
            ThreadCount::Auto(_) => std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
                .map(|n| n.max(1)),
        }
    }
}

/// Full experiment description; unknown JSON fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub log_grid: LogGridConfig,
    pub grid: GridSpec,
    pub estimator: EstimatorConfig,
    /// Bands to run; defaults to the estimator's own `l`.
    #[serde(default)]
    pub l_values: Option<Vec<u32>>,
    pub replications: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub threads: ThreadCount,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self, StudyError> {
        let cfg: StudyConfig =
            serde_json::from_str(text).map_err(|e| StudyError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, StudyError> {
        let text = fs::read_to_string(path)
            .map_err(|source| StudyError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        if self.replications == 0 {
            return Err(StudyError::Config("replications must be at least 1".into()));
        }
        self.model.kernel.validate().map_err(|e| StudyError::Config(e.to_string()))?;
        self.grid.validate().map_err(|e| StudyError::Config(e.to_string()))?;
        if self.model.kernel.dimension() != self.grid.dimension {
            return Err(StudyError::Config(format!(
                "kernel dimension {} does not match grid dimension {}",
                self.model.kernel.dimension(),
                self.grid.dimension
            )));
        }
        if let Some(ls) = &self.l_values {
            if ls.is_empty() || ls.iter().any(|&l| l == 0) {
                return Err(StudyError::Config("l_values must be nonempty positive".into()));
            }
        }
        if self.estimator.l == 0 {
            return Err(StudyError::Config("estimator.l must be positive".into()));
        }
        if let crate::estimate::CutoffRule::Fixed(a_n) = self.estimator.a_n {
            if !(a_n > 0.0) || !a_n.is_finite() {
                return Err(StudyError::Config(format!(
                    "estimator.a_n must be positive, got {a_n}"
                )));
            }
        }
        self.log_grid.build()?;
        Ok(())
    }

    pub fn l_values(&self) -> Vec<u32> {
        self.l_values.clone().unwrap_or_else(|| vec![self.estimator.l])
    }

    /// FNV-1a hash of the canonical JSON encoding, for provenance.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in text.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimatorKind {
    Hat,
    Tilde,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Hat => "hat",
            EstimatorKind::Tilde => "tilde",
        }
    }
}

/// Per-replication, per-band scores.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RepRecord {
    pub replication: usize,
    pub seed: u64,
    pub l: u32,
    pub mse_hat: f64,
    pub mse_tilde: f64,
    pub time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub l: u32,
    pub mean_mse: f64,
    pub sd_mse: f64,
    pub mean_time_s: f64,
    pub sd_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyProvenance {
    pub config_hash: String,
    pub base_seed: u64,
    pub version: String,
    /// Integration domain of every error norm.
    pub log_grid: LogGridConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyResult {
    pub rows: Vec<SummaryRow>,
    pub provenance: StudyProvenance,
}

/// Everything a study produces in memory.
#[derive(Debug)]
pub struct StudyOutput {
    pub result: StudyResult,
    pub records: Vec<RepRecord>,
    pub first_sample: FieldSample,
    /// Estimate of the first replication at the estimator's preferred `l`.
    pub first_estimate: EstimateResult,
    pub truth: SignedGridFunction,
}

/// Tabulate the true weighted density `u·v0` on the grid.
pub fn truth_on_grid(
    v0: &LevyDensity,
    u: &crate::multiplier::MultiplicativeWeight,
    grid: LogGrid,
) -> SignedGridFunction {
    SignedGridFunction::from_real_fn(grid, |x| u.eval(x) * v0.eval(x))
}

struct RepOutcome {
    records: Vec<RepRecord>,
    sample: Option<FieldSample>,
    estimate: Option<EstimateResult>,
}

fn run_replication(
    index: usize,
    cfg: &StudyConfig,
    mu: &MultiplierFunction,
    truth: &SignedGridFunction,
    grid: LogGrid,
    keep_artifacts: bool,
) -> Result<RepOutcome, ReplicationError> {
    let seed = derive_replication_seed(cfg.base_seed, index as u64);
    let sim_start = Instant::now();
    let v0 = cfg.model.v0.density();
    let sample = simulate_field(&cfg.model.kernel, &v0, &cfg.grid, seed)?;
    let sim_time = sim_start.elapsed().as_secs_f64();

    let mut records = Vec::new();
    let mut kept_estimate = None;
    for l in cfg.l_values() {
        let est_start = Instant::now();
        let mut est_cfg = cfg.estimator;
        est_cfg.l = l;
        let result = run_pipeline(&sample, mu, &est_cfg, grid)?;
        let err_hat = l2_error(&result.uv0_hat, truth, cfg.estimator.c)?;
        let err_tilde = l2_error(&result.uv0_tilde, truth, cfg.estimator.c)?;
        // Wall time for this band, including this replication's simulation.
        let time_s = sim_time + est_start.elapsed().as_secs_f64();
        records.push(RepRecord {
            replication: index,
            seed,
            l,
            mse_hat: err_hat * err_hat,
            mse_tilde: err_tilde * err_tilde,
            time_s,
        });
        if keep_artifacts && l == cfg.estimator.l {
            kept_estimate = Some(result);
        }
    }
    if keep_artifacts && kept_estimate.is_none() {
        // Preferred l not among l_values: keep the first band instead.
        let mut est_cfg = cfg.estimator;
        est_cfg.l = cfg.l_values()[0];
        kept_estimate = Some(run_pipeline(&sample, mu, &est_cfg, grid)?);
    }
    Ok(RepOutcome { records, sample: keep_artifacts.then_some(sample), estimate: kept_estimate })
}

/// Run the full study: simulate, estimate for each `l`, score both
/// estimators, aggregate. A failed replication aborts the study with its
/// index attached.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput, StudyError> {
    cfg.validate()?;
    let grid = cfg.log_grid.build()?;
    let mu = multiplier_closed_form(&cfg.model.kernel, cfg.estimator.u, cfg.estimator.c)?;
    let v0 = cfg.model.v0.density();
    let truth = truth_on_grid(&v0, &cfg.estimator.u, grid);

    let work = || -> Result<Vec<RepOutcome>, StudyError> {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                run_replication(r, cfg, &mu, &truth, grid, r == 0)
                    .map_err(|source| StudyError::Replication { index: r, source })
            })
            .collect()
    };
    let outcomes = match cfg.threads.resolve() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| StudyError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }?;

    let mut records = Vec::with_capacity(cfg.replications * cfg.l_values().len());
    let mut first_sample = None;
    let mut first_estimate = None;
    for mut outcome in outcomes {
        records.append(&mut outcome.records);
        if outcome.sample.is_some() {
            first_sample = outcome.sample;
            first_estimate = outcome.estimate;
        }
    }
    records.sort_by_key(|r| (r.replication, r.l));

    let mut rows = Vec::new();
    for &l in &cfg.l_values() {
        for kind in [EstimatorKind::Hat, EstimatorKind::Tilde] {
            let series: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.l == l)
                .map(|r| {
                    let mse = match kind {
                        EstimatorKind::Hat => r.mse_hat,
                        EstimatorKind::Tilde => r.mse_tilde,
                    };
                    (mse, r.time_s)
                })
                .collect();
            let (mean_mse, sd_mse) = mean_sd(series.iter().map(|(m, _)| *m));
            let (mean_time_s, sd_time_s) = mean_sd(series.iter().map(|(_, t)| *t));
            rows.push(SummaryRow { estimator: kind, l, mean_mse, sd_mse, mean_time_s, sd_time_s });
        }
    }
    // Sign projection shrinks every per-sample error, hence the mean too.
    for l in cfg.l_values() {
        let pick = |kind: EstimatorKind| {
            rows.iter().find(|r| r.l == l && r.estimator == kind).map(|r| r.mean_mse).unwrap()
        };
        debug_assert!(
            pick(EstimatorKind::Tilde) <= pick(EstimatorKind::Hat) + 1e-15,
            "projection dominance violated at l={l}"
        );
    }

    Ok(StudyOutput {
        result: StudyResult {
            rows,
            provenance: StudyProvenance {
                config_hash: cfg.hash(),
                base_seed: cfg.base_seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                log_grid: cfg.log_grid,
            },
        },
        records,
        first_sample: first_sample.expect("replication 0 keeps its sample"),
        first_estimate: first_estimate.expect("replication 0 keeps its estimate"),
        truth,
    })
}

fn mean_sd(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.collect();
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn provenance_line(p: &StudyProvenance) -> String {
    format!(
        "# config_hash={} base_seed={} version={} log_grid=[{},{}]x{}",
        p.config_hash,
        p.base_seed,
        p.version,
        p.log_grid.t_min,
        p.log_grid.t_max,
        p.log_grid.points
    )
}

/// Plot-data bundle; every field optional so an empty study still emits
/// header-only CSVs.
#[derive(Default)]
pub struct PlotBundle<'a> {
    pub sample: Option<&'a FieldSample>,
    pub estimate: Option<&'a EstimateResult>,
    pub truth: Option<&'a SignedGridFunction>,
    pub summary: &'a [SummaryRow],
    pub provenance: Option<&'a StudyProvenance>,
}

impl StudyOutput {
    pub fn plot_bundle(&self) -> PlotBundle<'_> {
        PlotBundle {
            sample: Some(&self.first_sample),
            estimate: Some(&self.first_estimate),
            truth: Some(&self.truth),
            summary: &self.result.rows,
            provenance: Some(&self.result.provenance),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf, StudyError> {
    fs::write(path, contents)
        .map_err(|source| StudyError::Io { path: path.to_path_buf(), source })?;
    Ok(path.to_path_buf())
}

/// Emit `trajectory.csv`, `estimate.csv`, and `summary.csv` under `out_dir`.
pub fn emit_plotdata(bundle: &PlotBundle<'_>, out_dir: &Path) -> Result<Vec<PathBuf>, StudyError> {
    fs::create_dir_all(out_dir)
        .map_err(|source| StudyError::Io { path: out_dir.to_path_buf(), source })?;
    let mut written = Vec::new();

    let mut trajectory = String::new();
    if let Some(sample) = bundle.sample {
        let header = if sample.grid.dimension == 1 { "index,value" } else { "index1,index2,value" };
        trajectory.push_str(header);
        trajectory.push('\n');
        let mut raw = Vec::new();
        sample.write_csv(&mut raw).map_err(|source| StudyError::Io {
            path: out_dir.join("trajectory.csv"),
            source,
        })?;
        trajectory.push_str(&String::from_utf8(raw).expect("csv is utf-8"));
    } else {
        trajectory.push_str("index,value\n");
    }
    written.push(write_file(&out_dir.join("trajectory.csv"), &trajectory)?);

    let mut estimate = Vec::new();
    match bundle.estimate {
        Some(result) => write_estimate_csv(result, bundle.truth, &mut estimate)
            .map_err(|source| StudyError::Io { path: out_dir.join("estimate.csv"), source })?,
        None => estimate.extend_from_slice(b"x,uv1_hat,uv0_hat,uv0_tilde,uv0_true\n"),
    }
    written.push(write_file(
        &out_dir.join("estimate.csv"),
        &String::from_utf8(estimate).expect("csv is utf-8"),
    )?);

    written.push(write_file(&out_dir.join("summary.csv"), &summary_csv(bundle))?);
    Ok(written)
}

fn summary_csv(bundle: &PlotBundle<'_>) -> String {
    let mut text = String::new();
    if let Some(p) = bundle.provenance {
        text.push_str(&provenance_line(p));
        text.push('\n');
    }
    text.push_str("estimator,l,mean_mse,sd_mse,mean_time_s,sd_time_s\n");
    for row in bundle.summary {
        writeln!(
            text,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.estimator.as_str(),
            row.l,
            row.mean_mse,
            row.sd_mse,
            row.mean_time_s,
            row.sd_time_s
        )
        .expect("string write");
    }
    text
}

fn replications_csv(output: &StudyOutput) -> String {
    let mut text = provenance_line(&output.result.provenance);
    text.push('\n');
    text.push_str("replication,seed,l,estimator,mse,time_s\n");
    for r in &output.records {
        for (kind, mse) in [(EstimatorKind::Hat, r.mse_hat), (EstimatorKind::Tilde, r.mse_tilde)] {
            writeln!(
                text,
                "{},{},{},{},{:.16e},{:.16e}",
                r.replication,
                r.seed,
                r.l,
                kind.as_str(),
                mse,
                r.time_s
            )
            .expect("string write");
        }
    }
    text
}

/// Write the full study output: summary, per-replication records, and the
/// first replication's plot data.
pub fn write_study_outputs(
    output: &StudyOutput,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, StudyError> {
    let mut written = emit_plotdata(&output.plot_bundle(), out_dir)?;
    written.push(write_file(&out_dir.join("replications.csv"), &replications_csv(output))?);
    Ok(written)
}
