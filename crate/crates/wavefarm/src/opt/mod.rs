//! Layout optimizers.
//!
//! * [`continuous`]: 1+1EA, DE, IDE, LS-NM and the continuous local search.
//! * [`discrete`]: grid-encoded bGA, bDE, bPSO and the discrete local searches.
//! * [`hybrid`]: surrogate sub-layouts, mosaic initialization, the rotation
//!   operator and the multi-strategy pipeline.
//!
//! [`run`] dispatches on an [`Algorithm`] id and is what the harness calls.

pub mod continuous;
pub mod discrete;
pub mod hybrid;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::climate::WaveClimate;
use crate::error::{Error, Result};
use crate::farm::{farm_side, repair, Layout, SAFETY_DISTANCE};
use crate::objective::{Budget, Objective, RunRecord};

/// Random source used by every optimizer.
pub type OptRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> OptRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of the search problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub n_buoys: usize,
    pub side: f64,
    /// Mean wave propagation direction (rad); orients the surrogate tile.
    pub dominant_direction: f64,
}

impl Problem {
    /// `n` buoys in the standard farm of `√(n·20000)` metres.
    pub fn new(n_buoys: usize) -> Self {
        Self {
            n_buoys,
            side: farm_side(n_buoys),
            dominant_direction: 0.0,
        }
    }

    pub fn for_climate(n_buoys: usize, climate: &WaveClimate) -> Self {
        Self {
            dominant_direction: climate.dominant_direction(),
            ..Self::new(n_buoys)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_buoys == 0 {
            return Err(Error::InvalidParams("at least one buoy is required".into()));
        }
        if !(self.side > 0.0 && self.side.is_finite()) {
            return Err(Error::InvalidParams(format!("farm side {} must be positive", self.side)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EaParams {
    /// Population size λ.
    pub population: usize,
    /// DE scale factor for rand/1/bin.
    pub scale: f64,
    /// Base scale F0 of the adaptive schedule.
    pub scale_base: f64,
    pub crossover: f64,
    /// Mutation standard deviation as a fraction of the farm side.
    pub sigma_fraction: f64,
}

impl Default for EaParams {
    fn default() -> Self {
        Self {
            population: 12,
            scale: 0.5,
            scale_base: 0.5,
            crossover: 0.8,
            sigma_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LsNmParams {
    /// Candidate positions drawn per buoy.
    pub samples: usize,
    /// Nelder-Mead iterations per buoy.
    pub nm_iterations: usize,
    /// Standard deviation of candidate offsets from the previous buoy (m).
    pub sigma: f64,
}

impl Default for LsNmParams {
    fn default() -> Self {
        Self {
            samples: 8,
            nm_iterations: 50,
            sigma: 70.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClsParams {
    pub sigma_start: f64,
    pub sigma_end: f64,
}

impl Default for ClsParams {
    fn default() -> Self {
        Self {
            sigma_start: 20.0,
            sigma_end: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub elite_fraction: f64,
    pub crossover: f64,
    pub mutation: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            elite_fraction: 0.1,
            crossover: 0.8,
            mutation: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub c1: f64,
    pub c2: f64,
    pub inertia_start: f64,
    pub inertia_end: f64,
    /// Clamp the scheduled inertia into `[min, max]` when set.
    pub inertia_window: Option<(f64, f64)>,
    pub max_velocity: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 2.0,
            inertia_start: 2.0,
            inertia_end: 1.5,
            inertia_window: None,
            max_velocity: 6.0,
        }
    }
}

impl PsoParams {
    /// Inertia at `progress` ∈ [0, 1] of the run.
    pub fn inertia(&self, progress: f64) -> f64 {
        let w = self.inertia_start + (self.inertia_end - self.inertia_start) * progress.clamp(0.0, 1.0);
        match self.inertia_window {
            Some((lo, hi)) => w.clamp(lo, hi),
            None => w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DlsParams {
    /// Standard deviation of the discrete normal step, in grid cells.
    pub sigma_cells: f64,
    /// Attempts per buoy before the move is dropped.
    pub max_resamples: usize,
    /// Per-buoy mutation probability; `None` means `1/N`.
    pub mutation_probability: Option<f64>,
}

impl Default for DlsParams {
    fn default() -> Self {
        Self {
            sigma_cells: 3.0,
            max_resamples: 10,
            mutation_probability: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridParams {
    /// Buoys per surrogate sub-layout.
    pub tile_buoys: usize,
    /// Generations in the improvement-rate window.
    pub window: usize,
    /// Minimum improvement rate to stay in the binary stage.
    pub binary_threshold: f64,
    /// Minimum improvement rate to stay in the discrete local search stage.
    pub dls_threshold: f64,
    pub rotation: bool,
    /// Radius of the symmetric samples around the previous buoy (m).
    pub sample_radius: f64,
}

impl Default for HybridParams {
    fn default() -> Self {
        Self {
            tile_buoys: 4,
            window: 5,
            binary_threshold: 1e-3,
            dls_threshold: 1e-5,
            rotation: true,
            sample_radius: SAFETY_DISTANCE,
        }
    }
}

/// Parameters of every optimizer, with the defaults used in the paper's
/// experiments where it states them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerParams {
    pub ea: EaParams,
    pub ls_nm: LsNmParams,
    pub cls: ClsParams,
    pub ga: GaParams,
    pub pso: PsoParams,
    pub dls: DlsParams,
    pub hybrid: HybridParams,
    /// Spacing of the placement grid (m).
    pub grid_spacing: f64,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            ea: EaParams::default(),
            ls_nm: LsNmParams::default(),
            cls: ClsParams::default(),
            ga: GaParams::default(),
            pso: PsoParams::default(),
            dls: DlsParams::default(),
            hybrid: HybridParams::default(),
            grid_spacing: SAFETY_DISTANCE,
        }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        let p = |x: f64| (0.0..=1.0).contains(&x);
        if self.ea.population == 0 {
            return bad("population must be at least 1");
        }
        if !p(self.ea.crossover) || !p(self.ga.crossover) || !p(self.ga.mutation) || !p(self.ga.elite_fraction) {
            return bad("probabilities must lie in [0, 1]");
        }
        if !(self.ea.scale_base > 0.0) || !(self.ea.scale >= 0.0) {
            return bad("DE scale factors must be positive");
        }
        if !(self.ea.sigma_fraction >= 0.0) || !(self.ls_nm.sigma >= 0.0) || !(self.dls.sigma_cells >= 0.0) {
            return bad("step sizes must be non-negative");
        }
        if !(self.cls.sigma_start >= 0.0 && self.cls.sigma_end >= 0.0) {
            return bad("CLS step sizes must be non-negative");
        }
        if self.dls.mutation_probability.is_some_and(|q| !p(q)) {
            return bad("DLS mutation probability must lie in [0, 1]");
        }
        if !(self.grid_spacing >= SAFETY_DISTANCE) {
            return bad("grid spacing must be at least the safety distance");
        }
        if !(self.pso.max_velocity > 0.0) {
            return bad("PSO velocity clamp must be positive");
        }
        if self.hybrid.tile_buoys == 0 || self.hybrid.window == 0 {
            return bad("hybrid tile size and window must be at least 1");
        }
        if !(self.hybrid.sample_radius >= SAFETY_DISTANCE) {
            return bad("surrogate sample radius must be at least the safety distance");
        }
        Ok(())
    }
}

/// Binary optimizer driving a hybrid or a plain discrete run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryVariant {
    Ga,
    De,
    Pso,
}

impl BinaryVariant {
    pub fn short(self) -> &'static str {
        match self {
            BinaryVariant::Ga => "bGA",
            BinaryVariant::De => "bDE",
            BinaryVariant::Pso => "bPSO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DlsVariant {
    /// One grid interval in one of eight directions.
    Neighbour,
    /// Discrete normal offset, started from the best of a random population.
    Normal,
}

/// Every implemented optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    OnePlusOneEa,
    De,
    Ide,
    LsNm,
    Binary(BinaryVariant),
    Dls(DlsVariant),
    /// Surrogate mosaic plus rotation, binary stage only.
    SlsNm(BinaryVariant),
    /// Surrogate mosaic, rotation, then discrete and continuous backtracking.
    MultiStrategy(BinaryVariant),
}

impl Algorithm {
    pub const ALL: [Algorithm; 15] = [
        Algorithm::OnePlusOneEa,
        Algorithm::De,
        Algorithm::Ide,
        Algorithm::LsNm,
        Algorithm::Binary(BinaryVariant::Ga),
        Algorithm::Binary(BinaryVariant::De),
        Algorithm::Binary(BinaryVariant::Pso),
        Algorithm::Dls(DlsVariant::Neighbour),
        Algorithm::Dls(DlsVariant::Normal),
        Algorithm::SlsNm(BinaryVariant::Ga),
        Algorithm::SlsNm(BinaryVariant::De),
        Algorithm::SlsNm(BinaryVariant::Pso),
        Algorithm::MultiStrategy(BinaryVariant::Ga),
        Algorithm::MultiStrategy(BinaryVariant::De),
        Algorithm::MultiStrategy(BinaryVariant::Pso),
    ];

    pub fn id(self) -> String {
        match self {
            Algorithm::OnePlusOneEa => "1+1EA".into(),
            Algorithm::De => "DE".into(),
            Algorithm::Ide => "IDE".into(),
            Algorithm::LsNm => "LS-NM".into(),
            Algorithm::Binary(v) => v.short().into(),
            Algorithm::Dls(DlsVariant::Neighbour) => "DLS(I)".into(),
            Algorithm::Dls(DlsVariant::Normal) => "DLS(II)".into(),
            Algorithm::SlsNm(v) => format!("SLSNM-{}", v.short()),
            Algorithm::MultiStrategy(v) => format!("MS-{}", v.short()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let known: Vec<String> = Algorithm::ALL.iter().map(|a| a.id()).collect();
                Error::UnknownAlgorithm(format!("`{s}` (known: {})", known.join(", ")))
            })
    }
}

/// Runs `algorithm` once with the given seed.
pub fn run(
    algorithm: Algorithm,
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    seed: u64,
) -> Result<RunRecord> {
    problem.validate()?;
    budget.validate()?;
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let rng = &mut rng;
    let id = algorithm.id();
    let record = match algorithm {
        Algorithm::OnePlusOneEa => continuous::one_plus_one_ea(objective, problem, budget, params, rng),
        Algorithm::De => continuous::de(objective, problem, budget, params, continuous::DeVariant::Rand1Bin, rng),
        Algorithm::Ide => {
            continuous::de(objective, problem, budget, params, continuous::DeVariant::Best1BinAdaptive, rng)
        }
        Algorithm::LsNm => continuous::ls_nm(objective, problem, budget, params, rng),
        Algorithm::Binary(v) => discrete::binary_run(v, objective, problem, budget, params, rng),
        Algorithm::Dls(v) => discrete::dls_run(v, objective, problem, budget, params, rng),
        Algorithm::SlsNm(v) => hybrid::slsnm_hybrid_run(v, objective, problem, budget, params, rng),
        Algorithm::MultiStrategy(v) => hybrid::ms_run(v, objective, problem, budget, params, rng),
    }?;
    Ok(RunRecord { algorithm: id, seed, ..record })
}

/// Uniformly random layout of `n` buoys meeting the safety distance.
///
/// Buoys are placed one at a time by rejection sampling; if a buoy cannot be
/// placed the whole layout is handed to [`repair`], and as a last resort
/// the attempt restarts.
pub fn random_feasible_layout<R: Rng + ?Sized>(n: usize, side: f64, rng: &mut R) -> Result<Layout> {
    const TRIES_PER_BUOY: usize = 200;
    const RESTARTS: usize = 20;
    for _ in 0..RESTARTS {
        let mut layout = Layout::new(side, Vec::with_capacity(n))?;
        let mut stuck = false;
        for _ in 0..n {
            let mut placed = false;
            for _ in 0..TRIES_PER_BUOY {
                let p = [rng.random::<f64>() * side, rng.random::<f64>() * side];
                if layout.clear_of(p, None) {
                    layout.push(p);
                    placed = true;
                    break;
                }
            }
            if !placed {
                layout.push([rng.random::<f64>() * side, rng.random::<f64>() * side]);
                stuck = true;
            }
        }
        if !stuck {
            return Ok(layout);
        }
        let fixed = repair(&layout, rng);
        if fixed.feasible {
            return Ok(fixed.layout);
        }
    }
    Err(Error::InvalidLayout(format!(
        "could not place {n} buoys {SAFETY_DISTANCE} m apart in a {side:.1} m farm"
    )))
}

/// Standard normal draw.
pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}
