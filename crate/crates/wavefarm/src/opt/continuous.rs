//! Optimizers over the continuous `2N`-dimensional vector of buoy coordinates.
//!
//! Infeasible candidates go through [`repair`] before they are evaluated; a
//! candidate that cannot be repaired is skipped and counted in the record.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::farm::{repair, Layout, Point};
use crate::objective::{Budget, Objective, RunRecord, Stage, Tracker};
use crate::simplex::{self, Bounds, SimplexConfig};

use super::{normal, random_feasible_layout, ClsParams, OptimizerParams, Problem};

/// Consecutive unrepairable candidates tolerated before a run gives up.
const MAX_CONSECUTIVE_SKIPS: usize = 1000;

/// Moves each buoy with probability `prob` by a normal offset of standard
/// deviation `sigma` per axis. When `prob > 0` at least one buoy moves.
pub fn perturb<R: Rng + ?Sized>(layout: &Layout, prob: f64, sigma: f64, rng: &mut R) -> Layout {
    let mut positions = layout.positions().to_vec();
    let n = positions.len();
    if n == 0 || prob <= 0.0 {
        return layout.clone();
    }
    let mut moved = false;
    for p in positions.iter_mut() {
        if rng.random::<f64>() < prob {
            p[0] += sigma * normal(rng);
            p[1] += sigma * normal(rng);
            moved = true;
        }
    }
    if !moved {
        let p = &mut positions[rng.random_range(0..n)];
        p[0] += sigma * normal(rng);
        p[1] += sigma * normal(rng);
    }
    layout.with_positions(positions)
}

/// The layout itself if feasible, else its repair, else `None`.
pub fn make_feasible<R: Rng + ?Sized>(layout: Layout, rng: &mut R) -> Option<Layout> {
    if layout.is_feasible() {
        return Some(layout);
    }
    let out = repair(&layout, rng);
    out.feasible.then_some(out.layout)
}

/// 1+1 evolutionary algorithm: one parent, one mutated child per
/// evaluation, the child replaces the parent when it is at least as good.
pub fn one_plus_one_ea<R: Rng + ?Sized>(
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<RunRecord> {
    let n = problem.n_buoys;
    let mut t = Tracker::new(objective, budget.max_evaluations, n);
    let mut parent = random_feasible_layout(n, problem.side, rng)?;
    let Some(mut parent_f) = t.evaluate(&parent) else {
        return t.finish("1+1EA", 0);
    };
    let sigma = params.ea.sigma_fraction * problem.side;
    let mut misses = 0;
    while !t.exhausted() && misses < MAX_CONSECUTIVE_SKIPS {
        let child = perturb(&parent, 1.0 / n as f64, sigma, rng);
        let Some(child) = make_feasible(child, rng) else {
            t.skip();
            misses += 1;
            continue;
        };
        misses = 0;
        let f = t.evaluate(&child).expect("budget checked");
        if f >= parent_f {
            parent = child;
            parent_f = f;
        }
    }
    t.finish("1+1EA", 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeVariant {
    /// Classic DE/rand/1/bin with a fixed scale factor.
    Rand1Bin,
    /// DE/best/1/bin with the adaptive scale factor of [`ide_scale`].
    Best1BinAdaptive,
}

/// Adaptive DE scale `F0·2^(e^(1 − Gm/(Gm + 1 − G)))` at generation `g`
/// (1-based) of `gm`. Starts at `2·F0` and decays towards `F0`.
pub fn ide_scale(f0: f64, g: usize, gm: usize) -> f64 {
    let gm = gm.max(1) as f64;
    let g = (g.max(1) as f64).min(gm);
    f0 * 2f64.powf((1.0 - gm / (gm + 1.0 - g)).exp())
}

/// Differential evolution over flattened layouts.
pub fn de<R: Rng + ?Sized>(
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    variant: DeVariant,
    rng: &mut R,
) -> Result<RunRecord> {
    let lambda = params.ea.population;
    let needed = match variant {
        DeVariant::Rand1Bin => 4,
        DeVariant::Best1BinAdaptive => 3,
    };
    if lambda < needed {
        return Err(Error::InvalidParams(format!(
            "{variant:?} needs a population of at least {needed}, got {lambda}"
        )));
    }
    let (n, side) = (problem.n_buoys, problem.side);
    let name = match variant {
        DeVariant::Rand1Bin => "DE",
        DeVariant::Best1BinAdaptive => "IDE",
    };
    let mut t = Tracker::new(objective, budget.max_evaluations, n);

    let mut pop = Vec::with_capacity(lambda);
    for _ in 0..lambda {
        pop.push(random_feasible_layout(n, side, rng)?);
    }
    let mut fit: Vec<f64> = t
        .evaluate_batch(&pop)
        .into_iter()
        .map(|f| f.unwrap_or(f64::NEG_INFINITY))
        .collect();
    let mut flat: Vec<Vec<f64>> = pop.iter().map(Layout::flatten).collect();
    let dim = 2 * n;
    let gm = budget.max_evaluations.saturating_sub(lambda).div_ceil(lambda).max(1);

    let mut g = 1;
    let mut misses = 0;
    while !t.exhausted() && misses < MAX_CONSECUTIVE_SKIPS {
        let scale = match variant {
            DeVariant::Rand1Bin => params.ea.scale,
            DeVariant::Best1BinAdaptive => ide_scale(params.ea.scale_base, g, gm),
        };
        let best = argmax(&fit);
        let mut trials = Vec::with_capacity(lambda);
        let mut owners = Vec::with_capacity(lambda);
        for i in 0..lambda {
            let others = distinct_except(lambda, i, needed - 1, rng);
            let (base, a, b) = match variant {
                DeVariant::Rand1Bin => (others[0], others[1], others[2]),
                DeVariant::Best1BinAdaptive => (best, others[0], others[1]),
            };
            let j_rand = rng.random_range(0..dim);
            let mut trial = flat[i].clone();
            for j in 0..dim {
                if j == j_rand || rng.random::<f64>() < params.ea.crossover {
                    trial[j] = (flat[base][j] + scale * (flat[a][j] - flat[b][j])).clamp(0.0, side);
                }
            }
            match make_feasible(Layout::from_flat(side, &trial)?, rng) {
                Some(l) => {
                    trials.push(l);
                    owners.push(i);
                }
                None => t.skip(),
            }
        }
        if trials.is_empty() {
            misses += lambda;
            continue;
        }
        misses = 0;
        for ((layout, f), i) in trials.iter().zip(t.evaluate_batch(&trials)).zip(owners) {
            if let Some(f) = f {
                if f >= fit[i] {
                    fit[i] = f;
                    flat[i] = layout.flatten();
                }
            }
        }
        t.log_generation(g, None);
        g += 1;
    }
    t.finish(name, 0)
}

/// Sequential placement with local search and Nelder-Mead refinement.
///
/// The first buoy is the best of uniform samples over the farm; each later
/// buoy is the best of normal samples around its predecessor. Every chosen
/// position is then refined by Nelder-Mead with the other buoys frozen.
/// Partial farms are evaluated with only the buoys placed so far. If the
/// budget runs out early, the remaining buoys are put on free grid nodes and
/// the completed layout receives the last evaluation.
pub fn ls_nm<R: Rng + ?Sized>(
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<RunRecord> {
    let (n, side) = (problem.n_buoys, problem.side);
    let p = &params.ls_nm;
    let mut t = Tracker::new(objective, budget.max_evaluations, n);
    let mut layout = Layout::new(side, Vec::with_capacity(n))?;

    // Partial farms must leave one evaluation for the completed layout.
    let can_eval = |t: &Tracker, len: usize| if len < n { t.remaining() > 1 } else { t.remaining() >= 1 };

    for i in 0..n {
        if !can_eval(&t, i + 1) {
            break;
        }
        let mut candidates: Vec<Point> = Vec::with_capacity(p.samples);
        for _ in 0..p.samples.max(1) {
            for _ in 0..10 {
                let c = match layout.positions().last() {
                    None => [rng.random::<f64>() * side, rng.random::<f64>() * side],
                    Some(prev) => [
                        (prev[0] + p.sigma * normal(rng)).clamp(0.0, side),
                        (prev[1] + p.sigma * normal(rng)).clamp(0.0, side),
                    ],
                };
                if layout.clear_of(c, None) {
                    candidates.push(c);
                    break;
                }
            }
        }
        if candidates.is_empty() {
            match free_position(&layout, rng) {
                Some(c) => candidates.push(c),
                None => break,
            }
        }

        let mut best: Option<(Point, f64)> = None;
        for c in candidates {
            if !can_eval(&t, i + 1) {
                break;
            }
            let mut trial = layout.clone();
            trial.push(c);
            let f = t.evaluate(&trial).expect("budget checked");
            if best.is_none_or(|(_, bf)| f > bf) {
                best = Some((c, f));
            }
        }
        let Some((mut pos, pos_f)) = best else { break };

        if p.nm_iterations > 0 && can_eval(&t, i + 1) {
            let cfg = SimplexConfig {
                initial_edge: (p.sigma / 2.0).max(1.0),
                max_iters: p.nm_iterations,
                f_tolerance: 1e-9 * pos_f.abs().max(1.0),
                ..SimplexConfig::default()
            };
            let start_f = pos_f;
            let result = simplex::minimize(
                |x| {
                    let q = [x[0], x[1]];
                    if q == pos {
                        return -start_f;
                    }
                    if !layout.clear_of(q, None) || !can_eval(&t, i + 1) {
                        return f64::INFINITY;
                    }
                    let mut cand = layout.clone();
                    cand.push(q);
                    -t.evaluate(&cand).expect("budget checked")
                },
                &pos,
                &Bounds::uniform(2, 0.0, side),
                &cfg,
                rng,
            )?;
            if -result.f > pos_f {
                pos = [result.x[0], result.x[1]];
            }
        }
        layout.push(pos);
    }

    if layout.len() < n {
        layout = grid_fill(layout, n, rng)?;
        if t.remaining() >= 1 {
            t.evaluate(&layout);
        } else {
            t.skip();
        }
    }
    t.finish("LS-NM", 0)
}

/// A uniformly random position clear of every buoy, if one turns up.
fn free_position<R: Rng + ?Sized>(layout: &Layout, rng: &mut R) -> Option<Point> {
    let side = layout.side();
    (0..500)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
        .find(|&c| layout.clear_of(c, None))
}

/// Completes `layout` to `n` buoys on free nodes of a safety-distance grid.
fn grid_fill<R: Rng + ?Sized>(mut layout: Layout, n: usize, rng: &mut R) -> Result<Layout> {
    let side = layout.side();
    let step = crate::farm::SAFETY_DISTANCE;
    let per_side = (side / step).floor() as usize + 1;
    'outer: for iy in 0..per_side {
        for ix in 0..per_side {
            if layout.len() >= n {
                break 'outer;
            }
            let c = [ix as f64 * step, iy as f64 * step];
            if layout.clear_of(c, None) {
                layout.push(c);
            }
        }
    }
    while layout.len() < n {
        let c = free_position(&layout, rng).unwrap_or([rng.random::<f64>() * side, rng.random::<f64>() * side]);
        layout.push(c);
    }
    make_feasible(layout, rng).ok_or_else(|| Error::InvalidLayout("could not complete the layout".into()))
}

/// Continuous local search: per-buoy normal steps whose standard deviation
/// falls linearly from `sigma_start` to `sigma_end` over `evaluations`
/// evaluations. Elitist; consumes at most `evaluations` from the tracker.
pub fn cls_stage<R: Rng + ?Sized>(
    t: &mut Tracker,
    start: Layout,
    start_power: f64,
    evaluations: usize,
    params: &ClsParams,
    rng: &mut R,
) -> (Layout, f64) {
    let (mut best, mut best_f) = (start, start_power);
    let n = best.len();
    if n == 0 {
        return (best, best_f);
    }
    let steps = evaluations.min(t.remaining());
    let mut k = 0;
    let mut misses = 0;
    while k < steps && misses < MAX_CONSECUTIVE_SKIPS {
        let sigma = cls_sigma(params, k, steps);
        let child = perturb(&best, 1.0 / n as f64, sigma, rng);
        let Some(child) = make_feasible(child, rng) else {
            t.skip();
            misses += 1;
            continue;
        };
        misses = 0;
        let Some(f) = t.evaluate(&child) else { break };
        k += 1;
        if f >= best_f {
            best = child;
            best_f = f;
        }
    }
    (best, best_f)
}

/// Step size of the `k`-th of `steps` CLS evaluations.
pub fn cls_sigma(params: &ClsParams, k: usize, steps: usize) -> f64 {
    if steps <= 1 {
        return params.sigma_start;
    }
    let frac = k as f64 / (steps - 1) as f64;
    params.sigma_start + (params.sigma_end - params.sigma_start) * frac
}

/// Continuous local search from a given feasible layout as a standalone run.
pub fn cls<R: Rng + ?Sized>(
    start: &Layout,
    objective: &dyn Objective,
    budget: &Budget,
    params: &ClsParams,
    rng: &mut R,
) -> Result<RunRecord> {
    if !start.is_feasible() {
        return Err(Error::InvalidLayout("local search must start from a feasible layout".into()));
    }
    let mut t = Tracker::new(objective, budget.max_evaluations, start.len());
    t.set_stage(Stage::Cls);
    if let Some(f) = t.evaluate(start) {
        let rest = t.remaining();
        cls_stage(&mut t, start.clone(), f, rest, params, rng);
    }
    t.finish("CLS", 0)
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// `count` distinct indices in `0..len`, none equal to `skip`.
pub(crate) fn distinct_except<R: Rng + ?Sized>(len: usize, skip: usize, count: usize, rng: &mut R) -> Vec<usize> {
    sample(rng, len - 1, count)
        .into_iter()
        .map(|k| if k >= skip { k + 1 } else { k })
        .collect()
}
