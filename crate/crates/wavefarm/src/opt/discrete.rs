//! Binary-encoded optimizers on a placement grid and the discrete local
//! searches.
//!
//! A genome has one bit per grid cell (or per tile in the hybrid methods)
//! and exactly as many set bits as objects to place. Every operator is
//! followed by [`BinaryGenome::correct`], which restores that count by
//! flipping randomly chosen surplus or missing bits.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::farm::{Layout, Point};
use crate::objective::{Budget, Objective, RunRecord, Tracker};

use super::continuous::argmax;
use super::{normal, BinaryVariant, DlsParams, DlsVariant, GaParams, OptimizerParams, Problem, PsoParams};

/// Square grid of candidate buoy positions covering the farm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub spacing: f64,
    pub cells_per_side: usize,
}

impl GridSpec {
    /// Nodes at `0, spacing, 2·spacing, …` up to the farm side.
    pub fn new(side: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && side >= 0.0 && side.is_finite()) {
            return Err(Error::InvalidParams(format!("grid spacing {spacing} for side {side}")));
        }
        Ok(Self {
            spacing,
            cells_per_side: (side / spacing + 1e-9).floor() as usize + 1,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_side * self.cells_per_side
    }

    /// `(column, row)` of a cell index.
    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.cells_per_side, cell / self.cells_per_side)
    }

    pub fn position(&self, cell: usize) -> Point {
        let (c, r) = self.coords(cell);
        [c as f64 * self.spacing, r as f64 * self.spacing]
    }

    /// The cell whose node is within `1e-6` m of `p`.
    pub fn cell_of(&self, p: Point) -> Option<usize> {
        let c = (p[0] / self.spacing).round();
        let r = (p[1] / self.spacing).round();
        let on_node = (c * self.spacing - p[0]).abs() < 1e-6 && (r * self.spacing - p[1]).abs() < 1e-6;
        let inside = c >= 0.0 && r >= 0.0 && (c as usize) < self.cells_per_side && (r as usize) < self.cells_per_side;
        (on_node && inside).then(|| r as usize * self.cells_per_side + c as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryGenome {
    bits: Vec<bool>,
}

impl BinaryGenome {
    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// `ones` set bits at uniformly random positions.
    pub fn random<R: Rng + ?Sized>(len: usize, ones: usize, rng: &mut R) -> Self {
        let mut g = Self::zeros(len);
        for i in sample(rng, len, ones.min(len)) {
            g.bits[i] = true;
        }
        g
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect()
    }

    /// Flips uniformly chosen bits until exactly `required` are set.
    pub fn correct<R: Rng + ?Sized>(&mut self, required: usize, rng: &mut R) {
        let required = required.min(self.len());
        let count = self.popcount();
        if count == required {
            return;
        }
        let surplus = count > required;
        let pool: Vec<usize> = (0..self.len()).filter(|&i| self.bits[i] == surplus).collect();
        let flips = count.abs_diff(required);
        for k in sample(rng, pool.len(), flips) {
            self.bits[pool[k]] = !surplus;
        }
    }

    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }
}

/// Genome of a grid-aligned layout. Fails for positions off the grid nodes
/// or two buoys on one node.
pub fn encode(layout: &Layout, grid: &GridSpec) -> Result<BinaryGenome> {
    let mut g = BinaryGenome::zeros(grid.cell_count());
    for (i, &p) in layout.positions().iter().enumerate() {
        let cell = grid
            .cell_of(p)
            .ok_or_else(|| Error::InvalidLayout(format!("buoy {i} at ({}, {}) is off the grid", p[0], p[1])))?;
        if g.get(cell) {
            return Err(Error::InvalidLayout(format!("buoy {i} shares a grid node")));
        }
        g.set(cell, true);
    }
    Ok(g)
}

/// Layout with one buoy per set bit, in cell order.
pub fn decode(genome: &BinaryGenome, grid: &GridSpec, side: f64) -> Layout {
    let positions = genome.ones().into_iter().map(|c| grid.position(c)).collect();
    Layout::new(side, positions).expect("grid nodes are finite")
}

/// Two-point crossover: the children swap the segment `[a, b)`.
pub fn two_point_crossover<R: Rng + ?Sized>(
    x: &BinaryGenome,
    y: &BinaryGenome,
    rng: &mut R,
) -> (BinaryGenome, BinaryGenome) {
    let len = x.len();
    let (mut a, mut b) = (rng.random_range(0..=len), rng.random_range(0..=len));
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let (mut c1, mut c2) = (x.clone(), y.clone());
    c1.bits[a..b].copy_from_slice(&y.bits[a..b]);
    c2.bits[a..b].copy_from_slice(&x.bits[a..b]);
    (c1, c2)
}

/// Binary DE mutant: a bit where the two random partners differ takes the
/// first partner's value (the difference), and is set if that value is 1;
/// every other bit comes from the global best.
pub fn bde_mutant(r1: &BinaryGenome, r2: &BinaryGenome, gbest: &BinaryGenome) -> BinaryGenome {
    let bits = r1
        .bits
        .iter()
        .zip(&r2.bits)
        .zip(&gbest.bits)
        .map(|((&a, &b), &g)| {
            let diff = a != b && a;
            diff || g
        })
        .collect();
    BinaryGenome { bits }
}

/// Binomial crossover of a target with its mutant, one forced position,
/// then popcount correction.
pub fn bde_trial<R: Rng + ?Sized>(
    target: &BinaryGenome,
    mutant: &BinaryGenome,
    crossover: f64,
    required: usize,
    rng: &mut R,
) -> BinaryGenome {
    let mut trial = target.clone();
    if !trial.is_empty() {
        let j_rand = rng.random_range(0..trial.len());
        for j in 0..trial.len() {
            if j == j_rand || rng.random::<f64>() < crossover {
                trial.bits[j] = mutant.bits[j];
            }
        }
    }
    trial.correct(required, rng);
    trial
}

/// V-shaped transfer `|(2/π)·atan((π/2)·v)|` from velocity to flip
/// probability.
pub fn bpso_transfer(v: f64) -> f64 {
    ((2.0 / PI) * (FRAC_PI_2 * v).atan()).abs()
}

/// Velocity update for one particle, clamped to `±max_velocity`.
pub fn bpso_velocity<R: Rng + ?Sized>(
    velocity: &mut [f64],
    position: &BinaryGenome,
    personal: &BinaryGenome,
    global: &BinaryGenome,
    params: &PsoParams,
    inertia: f64,
    rng: &mut R,
) {
    let bit = |g: &BinaryGenome, j: usize| if g.bits[j] { 1.0 } else { 0.0 };
    for (j, v) in velocity.iter_mut().enumerate() {
        let x = bit(position, j);
        let (r1, r2) = (rng.random::<f64>(), rng.random::<f64>());
        let nv = inertia * *v + params.c1 * r1 * (bit(personal, j) - x) + params.c2 * r2 * (bit(global, j) - x);
        *v = nv.clamp(-params.max_velocity, params.max_velocity);
    }
}

/// Complements each bit with probability `T(v)`, then corrects the popcount.
pub fn bpso_flip<R: Rng + ?Sized>(position: &mut BinaryGenome, velocity: &[f64], required: usize, rng: &mut R) {
    for (j, &v) in velocity.iter().enumerate() {
        if rng.random::<f64>() < bpso_transfer(v) {
            position.flip(j);
        }
    }
    position.correct(required, rng);
}

/// Binary tournament: the fitter of two random individuals.
fn tournament<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> usize {
    let (a, b) = (rng.random_range(0..fitness.len()), rng.random_range(0..fitness.len()));
    if fitness[b] > fitness[a] {
        b
    } else {
        a
    }
}

/// An individual of a binary population with attached per-individual data
/// (the tile rotations in the hybrid methods).
#[derive(Debug, Clone)]
pub struct Individual<T> {
    pub genome: BinaryGenome,
    pub extra: T,
    pub fitness: f64,
}

/// A proposed genome; `slot` is the population index it competes with.
#[derive(Debug, Clone)]
pub struct Candidate<T> {
    pub genome: BinaryGenome,
    pub extra: T,
    pub slot: usize,
}

#[derive(Debug, Clone)]
struct Swarm<T> {
    velocities: Vec<Vec<f64>>,
    personal: Vec<Individual<T>>,
    global: Individual<T>,
}

/// Population state shared by bGA, bDE and bPSO.
#[derive(Debug, Clone)]
pub struct BinarySearch<T> {
    variant: BinaryVariant,
    required: usize,
    population: Vec<Individual<T>>,
    swarm: Option<Swarm<T>>,
}

impl<T: Clone> BinarySearch<T> {
    /// Starts from an evaluated population.
    pub fn new(variant: BinaryVariant, required: usize, population: Vec<Individual<T>>) -> Result<Self> {
        let min = match variant {
            BinaryVariant::Ga => 2,
            BinaryVariant::De => 3,
            BinaryVariant::Pso => 1,
        };
        if population.len() < min {
            return Err(Error::InvalidParams(format!(
                "{} needs a population of at least {min}",
                variant.short()
            )));
        }
        let swarm = (variant == BinaryVariant::Pso).then(|| {
            let best = argmax(&population.iter().map(|i| i.fitness).collect::<Vec<_>>());
            Swarm {
                velocities: vec![vec![0.0; population[0].genome.len()]; population.len()],
                personal: population.clone(),
                global: population[best].clone(),
            }
        });
        Ok(Self {
            variant,
            required,
            population,
            swarm,
        })
    }

    pub fn population(&self) -> &[Individual<T>] {
        &self.population
    }

    /// Best individual so far (the global-best archive for bPSO).
    pub fn best(&self) -> &Individual<T> {
        match &self.swarm {
            Some(s) => &s.global,
            None => {
                let fit: Vec<f64> = self.population.iter().map(|i| i.fitness).collect();
                &self.population[argmax(&fit)]
            }
        }
    }

    /// Replaces the best individual with `better` (caller checks that it is
    /// strictly better).
    pub fn replace_best(&mut self, better: Individual<T>) {
        match &mut self.swarm {
            Some(s) => {
                let owner = s
                    .personal
                    .iter()
                    .position(|p| p.genome == s.global.genome && p.fitness == s.global.fitness);
                if let Some(i) = owner {
                    s.personal[i] = better.clone();
                }
                s.global = better;
            }
            None => {
                let fit: Vec<f64> = self.population.iter().map(|i| i.fitness).collect();
                let i = argmax(&fit);
                self.population[i] = better;
            }
        }
    }

    /// Offspring for the next generation. `progress` ∈ [0, 1] drives the
    /// PSO inertia schedule.
    pub fn propose<R: Rng + ?Sized>(&mut self, params: &OptimizerParams, progress: f64, rng: &mut R) -> Vec<Candidate<T>> {
        let lambda = self.population.len();
        let required = self.required;
        match self.variant {
            BinaryVariant::Ga => {
                let ga = &params.ga;
                let fitness: Vec<f64> = self.population.iter().map(|i| i.fitness).collect();
                let count = lambda - elite_count(ga, lambda);
                let mut out = Vec::with_capacity(count);
                while out.len() < count {
                    let (a, b) = (tournament(&fitness, rng), tournament(&fitness, rng));
                    let (pa, pb) = (&self.population[a], &self.population[b]);
                    let (mut c1, mut c2) = if rng.random::<f64>() < ga.crossover {
                        two_point_crossover(&pa.genome, &pb.genome, rng)
                    } else {
                        (pa.genome.clone(), pb.genome.clone())
                    };
                    for (child, parent) in [(&mut c1, a), (&mut c2, b)] {
                        if rng.random::<f64>() < ga.mutation && !child.is_empty() {
                            let j = rng.random_range(0..child.len());
                            child.flip(j);
                        }
                        child.correct(required, rng);
                        if out.len() < count {
                            out.push(Candidate {
                                genome: child.clone(),
                                extra: self.population[parent].extra.clone(),
                                slot: out.len(),
                            });
                        }
                    }
                }
                out
            }
            BinaryVariant::De => {
                let fit: Vec<f64> = self.population.iter().map(|i| i.fitness).collect();
                let gbest = self.population[argmax(&fit)].genome.clone();
                (0..lambda)
                    .map(|i| {
                        let r = super::continuous::distinct_except(lambda, i, 2, rng);
                        let mutant = bde_mutant(&self.population[r[0]].genome, &self.population[r[1]].genome, &gbest);
                        let genome = bde_trial(&self.population[i].genome, &mutant, params.ea.crossover, required, rng);
                        Candidate {
                            genome,
                            extra: self.population[i].extra.clone(),
                            slot: i,
                        }
                    })
                    .collect()
            }
            BinaryVariant::Pso => {
                let inertia = params.pso.inertia(progress);
                let swarm = self.swarm.as_mut().expect("swarm exists for bPSO");
                (0..lambda)
                    .map(|i| {
                        let mut genome = self.population[i].genome.clone();
                        bpso_velocity(
                            &mut swarm.velocities[i],
                            &genome,
                            &swarm.personal[i].genome,
                            &swarm.global.genome,
                            &params.pso,
                            inertia,
                            rng,
                        );
                        bpso_flip(&mut genome, &swarm.velocities[i], required, rng);
                        Candidate {
                            genome,
                            extra: self.population[i].extra.clone(),
                            slot: i,
                        }
                    })
                    .collect()
            }
        }
    }

    /// Takes evaluated candidates (unevaluated ones carry `-inf`).
    pub fn accept(&mut self, candidates: Vec<Candidate<T>>, fitness: Vec<f64>) {
        match self.variant {
            BinaryVariant::Ga => {
                let mut ranked: Vec<usize> = (0..self.population.len()).collect();
                ranked.sort_by(|&a, &b| self.population[b].fitness.total_cmp(&self.population[a].fitness));
                let elites = self.population.len() - candidates.len();
                let mut next: Vec<Individual<T>> = ranked[..elites].iter().map(|&i| self.population[i].clone()).collect();
                next.extend(candidates.into_iter().zip(fitness).map(|(c, f)| Individual {
                    genome: c.genome,
                    extra: c.extra,
                    fitness: f,
                }));
                self.population = next;
            }
            BinaryVariant::De => {
                for (c, f) in candidates.into_iter().zip(fitness) {
                    if f >= self.population[c.slot].fitness {
                        self.population[c.slot] = Individual {
                            genome: c.genome,
                            extra: c.extra,
                            fitness: f,
                        };
                    }
                }
            }
            BinaryVariant::Pso => {
                let swarm = self.swarm.as_mut().expect("swarm exists for bPSO");
                for (c, f) in candidates.into_iter().zip(fitness) {
                    let ind = Individual {
                        genome: c.genome,
                        extra: c.extra,
                        fitness: f,
                    };
                    if f > swarm.personal[c.slot].fitness {
                        swarm.personal[c.slot] = ind.clone();
                    }
                    if f > swarm.global.fitness {
                        swarm.global = ind.clone();
                    }
                    self.population[c.slot] = ind;
                }
            }
        }
    }
}

fn elite_count(ga: &GaParams, lambda: usize) -> usize {
    ((ga.elite_fraction * lambda as f64).round() as usize).clamp(1, lambda - 1)
}

/// Plain binary optimizer over the placement grid.
pub fn binary_run<R: Rng + ?Sized>(
    variant: BinaryVariant,
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<RunRecord> {
    let (n, side) = (problem.n_buoys, problem.side);
    let grid = GridSpec::new(side, params.grid_spacing)?;
    if grid.cell_count() < n {
        return Err(Error::InvalidParams(format!(
            "{} grid cells cannot hold {n} buoys",
            grid.cell_count()
        )));
    }
    let lambda = params.ea.population;
    let mut t = Tracker::new(objective, budget.max_evaluations, n);
    let genomes: Vec<BinaryGenome> = (0..lambda).map(|_| BinaryGenome::random(grid.cell_count(), n, rng)).collect();
    let layouts: Vec<Layout> = genomes.iter().map(|g| decode(g, &grid, side)).collect();
    let fitness = t.evaluate_batch(&layouts);
    let population = genomes
        .into_iter()
        .zip(fitness)
        .map(|(genome, f)| Individual {
            genome,
            extra: (),
            fitness: f.unwrap_or(f64::NEG_INFINITY),
        })
        .collect();
    let mut search = BinarySearch::new(variant, n, population)?;
    let generations = (budget.max_evaluations / lambda).max(1);
    let mut g = 1;
    while !t.exhausted() {
        let candidates = search.propose(params, g as f64 / generations as f64, rng);
        let layouts: Vec<Layout> = candidates.iter().map(|c| decode(&c.genome, &grid, side)).collect();
        let fitness = t
            .evaluate_batch(&layouts)
            .into_iter()
            .map(|f| f.unwrap_or(f64::NEG_INFINITY))
            .collect();
        search.accept(candidates, fitness);
        t.log_generation(g, None);
        g += 1;
    }
    t.finish(variant.short(), 0)
}

/// One discrete local-search mutation of `layout`: every buoy moves with
/// probability `p` (at least one when `p > 0`) by a whole number of grid
/// intervals. A move that leaves the farm or comes within the safety
/// distance of another buoy is redrawn, up to `max_resamples` times.
/// Returns `None` when no buoy could move.
pub fn dls_step<R: Rng + ?Sized>(
    layout: &Layout,
    variant: DlsVariant,
    params: &DlsParams,
    spacing: f64,
    rng: &mut R,
) -> Option<Layout> {
    let n = layout.len();
    if n == 0 {
        return None;
    }
    let prob = params.mutation_probability.unwrap_or(1.0 / n as f64);
    if prob <= 0.0 {
        return None;
    }
    let mut chosen: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < prob).collect();
    if chosen.is_empty() {
        chosen.push(rng.random_range(0..n));
    }
    let mut current = layout.clone();
    let mut moved = false;
    for i in chosen {
        let p = current.positions()[i];
        for _ in 0..params.max_resamples.max(1) {
            let (dx, dy) = match variant {
                DlsVariant::Neighbour => NEIGHBOURS[rng.random_range(0..NEIGHBOURS.len())],
                DlsVariant::Normal => (
                    (params.sigma_cells * normal(rng)).round() as i64,
                    (params.sigma_cells * normal(rng)).round() as i64,
                ),
            };
            if dx == 0 && dy == 0 {
                continue;
            }
            let q = [p[0] + dx as f64 * spacing, p[1] + dy as f64 * spacing];
            if current.in_bounds(q) && current.clear_of(q, Some(i)) {
                let mut positions = current.positions().to_vec();
                positions[i] = q;
                current = current.with_positions(positions);
                moved = true;
                break;
            }
        }
    }
    moved.then_some(current)
}

const NEIGHBOURS: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Elitist discrete local search from `start` for at most `evaluations`
/// evaluations; `keep_going` is consulted after each generation of
/// `generation_size` evaluations.
#[allow(clippy::too_many_arguments)]
pub fn dls_stage<R: Rng + ?Sized>(
    t: &mut Tracker,
    start: Layout,
    start_power: f64,
    evaluations: usize,
    variant: DlsVariant,
    params: &DlsParams,
    spacing: f64,
    generation_size: usize,
    mut keep_going: impl FnMut(f64) -> bool,
    rng: &mut R,
) -> (Layout, f64) {
    let (mut best, mut best_f) = (start, start_power);
    let stop_at = t.used() + evaluations.min(t.remaining());
    let mut since_generation = 0;
    let mut misses = 0;
    while t.used() < stop_at && misses < 1000 {
        let Some(child) = dls_step(&best, variant, params, spacing, rng) else {
            t.skip();
            misses += 1;
            continue;
        };
        misses = 0;
        let Some(f) = t.evaluate(&child) else { break };
        if f >= best_f {
            best = child;
            best_f = f;
        }
        since_generation += 1;
        if since_generation == generation_size.max(1) {
            since_generation = 0;
            if !keep_going(best_f) {
                break;
            }
        }
    }
    (best, best_f)
}

/// Standalone DLS on the placement grid. Variant I starts from one random
/// grid layout; variant II from the best of an initial random population.
pub fn dls_run<R: Rng + ?Sized>(
    variant: DlsVariant,
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<RunRecord> {
    let (n, side) = (problem.n_buoys, problem.side);
    let grid = GridSpec::new(side, params.grid_spacing)?;
    if grid.cell_count() < n {
        return Err(Error::InvalidParams(format!(
            "{} grid cells cannot hold {n} buoys",
            grid.cell_count()
        )));
    }
    let mut t = Tracker::new(objective, budget.max_evaluations, n);
    let starts = match variant {
        DlsVariant::Neighbour => 1,
        DlsVariant::Normal => params.ea.population,
    };
    let layouts: Vec<Layout> = (0..starts)
        .map(|_| decode(&BinaryGenome::random(grid.cell_count(), n, rng), &grid, side))
        .collect();
    let fitness: Vec<f64> = t
        .evaluate_batch(&layouts)
        .into_iter()
        .map(|f| f.unwrap_or(f64::NEG_INFINITY))
        .collect();
    let i = argmax(&fitness);
    let name = match variant {
        DlsVariant::Neighbour => "DLS(I)",
        DlsVariant::Normal => "DLS(II)",
    };
    let rest = t.remaining();
    dls_stage(
        &mut t,
        layouts[i].clone(),
        fitness[i],
        rest,
        variant,
        &params.dls,
        params.grid_spacing,
        usize::MAX,
        |_| true,
        rng,
    );
    t.finish(name, 0)
}
