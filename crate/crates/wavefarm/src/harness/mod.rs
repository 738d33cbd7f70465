//! Experiment configuration, seeded multi-run execution and result files.
//!
//! An experiment is a TOML file:
//!
//! ```toml
//! algorithms = ["MS-bDE", "bDE"]   # or `algorithm = "bDE"`
//! n_buoys = 16
//! climate = "perth_like"           # a synthetic site or a climate CSV path
//! budget = 3000
//! seeds = [1, 2, 3]
//! output_dir = "results"
//! workers = 4
//!
//! [params.hybrid]
//! window = 5
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

pub mod analysis;
pub mod plot;
pub mod stats;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::climate::{load_climate_csv, Site, WaveClimate};
use crate::error::{Error, Result};
use crate::hydro::{BesselJ0, BuoySpec, FarmModel, HydroTable};
use crate::objective::{Budget, RunRecord};
use crate::opt::{self, Algorithm, OptimizerParams, Problem};

pub use stats::{friedman_ranks, FriedmanMode, SummaryStats};

/// A synthetic site name or a climate CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum ClimateRef {
    Synthetic(Site),
    Csv(PathBuf),
}

impl ClimateRef {
    /// Site names win; anything else is taken as a path.
    pub fn parse(text: &str) -> Self {
        match text.parse::<Site>() {
            Ok(site) => ClimateRef::Synthetic(site),
            Err(_) => ClimateRef::Csv(PathBuf::from(text)),
        }
    }

    pub fn load(&self) -> Result<WaveClimate> {
        match self {
            ClimateRef::Synthetic(site) => Ok(WaveClimate::synthetic(*site)),
            ClimateRef::Csv(path) => load_climate_csv(path),
        }
    }

    fn label(&self) -> String {
        match self {
            ClimateRef::Synthetic(Site::PerthLike) => "perth_like".into(),
            ClimateRef::Synthetic(Site::SydneyLike) => "sydney_like".into(),
            ClimateRef::Csv(path) => path.display().to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    algorithm: Option<String>,
    algorithms: Option<Vec<String>>,
    n_buoys: usize,
    climate: String,
    budget: usize,
    stage_fractions: Option<(f64, f64)>,
    seeds: Vec<u64>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    workers: usize,
    #[serde(default)]
    friedman_mode: FriedmanMode,
    hydro_table: Option<PathBuf>,
    #[serde(default)]
    params: OptimizerParams,
}

/// A validated experiment: algorithms × seeds on one problem.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub n_buoys: usize,
    pub climate: ClimateRef,
    pub budget: Budget,
    pub seeds: Vec<u64>,
    pub params: OptimizerParams,
    pub output_dir: Option<PathBuf>,
    /// Concurrent runs; 0 uses every core.
    pub workers: usize,
    pub friedman_mode: FriedmanMode,
    /// Coefficient table CSV; the bundled table when absent.
    pub hydro_table: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(algorithms: Vec<Algorithm>, n_buoys: usize, climate: ClimateRef, budget: Budget, seeds: Vec<u64>) -> Self {
        Self {
            algorithms,
            n_buoys,
            climate,
            budget,
            seeds,
            params: OptimizerParams::default(),
            output_dir: None,
            workers: 0,
            friedman_mode: FriedmanMode::default(),
            hydro_table: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses TOML text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        let ids: Vec<String> = match (raw.algorithm, raw.algorithms) {
            (Some(one), None) => vec![one],
            (None, Some(many)) => many,
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig("give either `algorithm` or `algorithms`, not both".into()))
            }
            (None, None) => return Err(Error::InvalidConfig("missing `algorithm`".into())),
        };
        let algorithms = ids.iter().map(|s| s.parse()).collect::<Result<Vec<Algorithm>>>()?;
        let resolve = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        let climate = match ClimateRef::parse(&raw.climate) {
            ClimateRef::Csv(p) => ClimateRef::Csv(resolve(p)),
            site => site,
        };
        let mut budget = Budget::new(raw.budget);
        if let Some(fractions) = raw.stage_fractions {
            budget.stage_fractions = fractions;
        }
        let cfg = Self {
            algorithms,
            n_buoys: raw.n_buoys,
            climate,
            budget,
            seeds: raw.seeds,
            params: raw.params,
            output_dir: raw.output_dir.map(resolve),
            workers: raw.workers,
            friedman_mode: raw.friedman_mode,
            hydro_table: raw.hydro_table.map(resolve),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithm given".into()));
        }
        let unique: BTreeSet<String> = self.algorithms.iter().map(|a| a.id()).collect();
        if unique.len() != self.algorithms.len() {
            return Err(Error::InvalidConfig("an algorithm is listed twice".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must not be empty".into()));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(Error::InvalidConfig("seeds must be distinct".into()));
        }
        self.budget.validate()?;
        self.params.validate()?;
        Problem::new(self.n_buoys).validate()
    }

    /// The power model the experiment optimizes.
    pub fn build_model(&self) -> Result<FarmModel> {
        let climate = self.climate.load()?;
        let table = match &self.hydro_table {
            Some(path) => HydroTable::load_csv(path)?,
            None => HydroTable::default_sphere(),
        };
        let spec = BuoySpec::for_climate(&table, &climate)?;
        FarmModel::new(spec, table, climate, Arc::new(BesselJ0))
    }
}

/// Runs and statistics of one experiment, grouped by algorithm in config order.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// `runs[a][s]` is algorithm `a` on seed `s`.
    pub runs: Vec<Vec<RunRecord>>,
    pub stats: Vec<SummaryStats>,
    pub friedman_mode: FriedmanMode,
    pub mean_ranks: Vec<f64>,
}

impl ExperimentResult {
    /// `[instance][algorithm]` matrix of final powers for the configured mode.
    pub fn final_matrix(&self) -> Vec<Vec<f64>> {
        match self.friedman_mode {
            FriedmanMode::PerRun => (0..self.seeds.len())
                .map(|s| self.runs.iter().map(|runs| runs[s].final_power).collect())
                .collect(),
            FriedmanMode::PerMethodMean => vec![self.stats.iter().map(|s| s.mean).collect()],
        }
    }

    /// `statistic,<alg>,…` with rows Max, Min, Mean, Median, Std.
    pub fn stats_csv(&self) -> String {
        let mut out = String::from("statistic");
        for a in &self.algorithms {
            out.push(',');
            out.push_str(&a.id());
        }
        out.push('\n');
        for row in 0..5 {
            out.push_str(self.stats[0].rows()[row].0);
            for s in &self.stats {
                out.push_str(&format!(",{}", s.rows()[row].1));
            }
            out.push('\n');
        }
        out
    }

    pub fn friedman_csv(&self) -> String {
        let mut out = String::from("algorithm,mean_rank\n");
        for (a, r) in self.algorithms.iter().zip(&self.mean_ranks) {
            out.push_str(&format!("{},{}\n", a.id(), r));
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from("algorithm,seed,final_power,evaluations,skipped,auxiliary_evaluations\n");
        for runs in &self.runs {
            for r in runs {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.algorithm, r.seed, r.final_power, r.evaluations, r.skipped, r.auxiliary_evaluations
                ));
            }
        }
        out
    }

    /// Writes every result file under `dir`; only `manifest.json` carries timings.
    pub fn write(&self, dir: &Path, config: &ExperimentConfig) -> Result<()> {
        create_dir(dir)?;
        for (alg, runs) in self.algorithms.iter().zip(&self.runs) {
            let sub = dir.join(slug(&alg.id()));
            create_dir(&sub)?;
            for r in runs {
                write_file(&sub.join(format!("seed-{}.csv", r.seed)), &curve_csv(r))?;
                r.final_layout.save(&sub.join(format!("seed-{}.layout.json", r.seed)))?;
            }
        }
        write_file(&dir.join("stats.csv"), &self.stats_csv())?;
        write_file(&dir.join("friedman.csv"), &self.friedman_csv())?;
        write_file(&dir.join("runs.csv"), &self.runs_csv())?;
        let manifest = Manifest {
            crate_version: env!("CARGO_PKG_VERSION"),
            algorithms: self.algorithms.iter().map(|a| a.id()).collect(),
            n_buoys: config.n_buoys,
            climate: config.climate.label(),
            budget: config.budget,
            seeds: self.seeds.clone(),
            friedman_mode: self.friedman_mode,
            params: &config.params,
            files: vec!["stats.csv".into(), "friedman.csv".into(), "runs.csv".into()],
            elapsed_seconds: self
                .runs
                .iter()
                .flatten()
                .map(|r| (r.algorithm.clone(), r.seed, r.elapsed_seconds))
                .collect(),
        };
        write_file(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    crate_version: &'static str,
    algorithms: Vec<String>,
    n_buoys: usize,
    climate: String,
    budget: Budget,
    seeds: Vec<u64>,
    friedman_mode: FriedmanMode,
    params: &'a OptimizerParams,
    files: Vec<String>,
    elapsed_seconds: Vec<(String, u64, f64)>,
}

/// `evaluation,best_power,stage`, one line per recorded evaluation.
pub fn curve_csv(record: &RunRecord) -> String {
    let mut out = String::from("evaluation,best_power,stage\n");
    for p in &record.curve {
        out.push_str(&format!("{},{},{}\n", p.evaluation, p.best_power, p.stage.name()));
    }
    out
}

/// Directory-safe form of an algorithm id: `MS-bDE` → `ms-bde`, `1+1EA` → `1p1ea`.
pub fn slug(id: &str) -> String {
    let mut out = String::new();
    for c in id.chars() {
        match c {
            c if c.is_ascii_alphanumeric() => out.push(c.to_ascii_lowercase()),
            '+' => out.push('p'),
            _ if !out.ends_with('-') => out.push('-'),
            _ => {}
        }
    }
    out.trim_matches('-').to_string()
}

/// Runs every (algorithm, seed) pair, at most `workers` at a time, then
/// aggregates. Writes the result files when an output directory is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let model = config.build_model()?;
    let problem = Problem::for_climate(config.n_buoys, model.climate());
    let jobs: Vec<(Algorithm, u64)> = config
        .algorithms
        .iter()
        .flat_map(|&a| config.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(alg, seed)| opt::run(alg, &model, &problem, &config.budget, &config.params, seed))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut runs: Vec<Vec<RunRecord>> = Vec::with_capacity(config.algorithms.len());
    let mut it = records.into_iter();
    for _ in &config.algorithms {
        runs.push(it.by_ref().take(config.seeds.len()).collect());
    }
    let stats = runs
        .iter()
        .map(|rs| SummaryStats::from_values(&rs.iter().map(|r| r.final_power).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let mut result = ExperimentResult {
        algorithms: config.algorithms.clone(),
        seeds: config.seeds.clone(),
        runs,
        stats,
        friedman_mode: config.friedman_mode,
        mean_ranks: Vec::new(),
    };
    result.mean_ranks = friedman_ranks(&result.final_matrix())?;
    if let Some(dir) = &config.output_dir {
        result.write(dir, config)?;
    }
    Ok(result)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
