//! Surrogate-driven hybrids.
//!
//! A small sub-layout (four buoys by default) is optimized once in a tile of
//! the farm. The farm is cut into a grid of such tiles and a binary genome
//! selects which tiles receive a copy of the sub-layout, so every decoded
//! layout is a mosaic of good local arrangements. After every generation the
//! best mosaic gets a rotation mutation: one or more of its tiles are turned
//! by a multiple of 45° about the tile centre.
//!
//! The multi-strategy variant then hands the best mosaic to a discrete local
//! search on the 50 m grid and finally to a continuous local search with a
//! shrinking step.

use std::f64::consts::{FRAC_PI_4, PI};

use rand::Rng;

use crate::error::{Error, Result};
use crate::farm::{distance, Layout, Point, AREA_PER_BUOY, SAFETY_DISTANCE};
use crate::objective::{Budget, ImprovementWindow, Objective, RunRecord, Stage, Tracker};
use crate::simplex::{self, Bounds, SimplexConfig};

use super::continuous::cls_stage;
use super::discrete::{dls_stage, BinaryGenome, BinarySearch, Individual};
use super::{BinaryVariant, DlsVariant, OptimizerParams, Problem};

/// Distance kept between a tile's buoys and its edges, so that buoys in
/// neighbouring tiles are always at least the safety distance apart.
pub const TILE_MARGIN: f64 = SAFETY_DISTANCE / 2.0;

/// Number of distinct tile orientations (multiples of 45°).
pub const ROTATIONS: u8 = 8;

/// Square, axis-aligned tiling of the farm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileGrid {
    pub side: f64,
    pub tiles_per_side: usize,
    pub tile_side: f64,
}

impl TileGrid {
    /// Tiles a little smaller than the area allotted to `tile_buoys` buoys:
    /// `floor(side / native) + 1` tiles per side, where `native` is the side
    /// of a square of `tile_buoys · 20000` m².
    pub fn new(side: f64, tile_buoys: usize) -> Result<Self> {
        if tile_buoys == 0 || !(side > 0.0 && side.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "cannot tile a {side} m farm for {tile_buoys} buoys"
            )));
        }
        let native = (tile_buoys as f64 * AREA_PER_BUOY).sqrt();
        let tiles_per_side = (side / native).floor() as usize + 1;
        Ok(Self {
            side,
            tiles_per_side,
            tile_side: side / tiles_per_side as f64,
        })
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_per_side * self.tiles_per_side
    }

    /// Lower-left corner of a tile.
    pub fn origin(&self, tile: usize) -> Point {
        let (c, r) = (tile % self.tiles_per_side, tile / self.tiles_per_side);
        [c as f64 * self.tile_side, r as f64 * self.tile_side]
    }

    /// The tile containing `p` (points on a shared edge go to the upper one).
    pub fn tile_of(&self, p: Point) -> Option<usize> {
        if !(0.0..=self.side).contains(&p[0]) || !(0.0..=self.side).contains(&p[1]) {
            return None;
        }
        let last = self.tiles_per_side - 1;
        let c = ((p[0] / self.tile_side).floor() as usize).min(last);
        let r = ((p[1] / self.tile_side).floor() as usize).min(last);
        Some(r * self.tiles_per_side + c)
    }
}

/// Buoy offsets inside one tile, relative to its lower-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct SubLayout {
    pub offsets: Vec<Point>,
    pub tile_side: f64,
    /// Power of the sub-layout on its own (W).
    pub power: f64,
    /// Objective evaluations spent building it.
    pub evaluations: usize,
}

impl SubLayout {
    pub fn as_layout(&self) -> Layout {
        Layout::new(self.tile_side, self.offsets.clone()).expect("offsets are finite")
    }
}

fn inner_box(tile_side: f64) -> (f64, f64) {
    (TILE_MARGIN, tile_side - TILE_MARGIN)
}

fn inside_inner(p: Point, tile_side: f64) -> bool {
    let (lo, hi) = inner_box(tile_side);
    let eps = 1e-9;
    p[0] >= lo - eps && p[0] <= hi + eps && p[1] >= lo - eps && p[1] <= hi + eps
}

/// Builds the surrogate sub-layout one buoy at a time.
///
/// The first buoy sits at the midpoint of the up-wave edge of the tile's
/// usable area. Each next buoy is the best of eight samples on a circle
/// around the previous one, at angles mirrored about the wave direction.
/// After each placement Nelder-Mead refines the coordinates of every buoy
/// placed so far. If no sample is feasible the circle grows by half, at
/// most three times.
pub fn sls_nm_surrogate<R: Rng + ?Sized>(
    eval: &mut dyn FnMut(&Layout) -> f64,
    tile_side: f64,
    tile_buoys: usize,
    dominant_direction: f64,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<SubLayout> {
    let (lo, hi) = inner_box(tile_side);
    if hi < lo {
        return Err(Error::InvalidParams(format!("tile of {tile_side:.1} m has no room for buoys")));
    }
    let centre = tile_side / 2.0;
    let (ux, uy) = (dominant_direction.cos(), dominant_direction.sin());
    let first = if tile_buoys == 1 {
        [centre, centre]
    } else {
        let h = (hi - centre) / ux.abs().max(uy.abs());
        [(centre - h * ux).clamp(lo, hi), (centre - h * uy).clamp(lo, hi)]
    };
    let mut evaluations = 0;
    let mut layout = Layout::new(tile_side, vec![first])?;
    let mut power = eval(&layout);
    evaluations += 1;

    let angles: Vec<f64> = (0..4)
        .flat_map(|m| {
            let a = PI / 8.0 + m as f64 * FRAC_PI_4;
            [dominant_direction + a, dominant_direction - a]
        })
        .collect();

    for _ in 1..tile_buoys {
        let prev = *layout.positions().last().expect("at least one buoy");
        let mut best: Option<(Point, f64)> = None;
        let mut radius = params.hybrid.sample_radius;
        for _ in 0..=3 {
            for &a in &angles {
                let c = [prev[0] + radius * a.cos(), prev[1] + radius * a.sin()];
                if !inside_inner(c, tile_side) || !clear(&layout, c) {
                    continue;
                }
                let mut trial = layout.clone();
                trial.push(c);
                let f = eval(&trial);
                evaluations += 1;
                if best.is_none_or(|(_, bf)| f > bf) {
                    best = Some((c, f));
                }
            }
            if best.is_some() {
                break;
            }
            radius *= 1.5;
        }
        if best.is_none() {
            // cramped tile: fall back to every clear node of a 10 m lattice
            let steps = ((hi - lo) / 10.0).floor() as usize;
            for iy in 0..=steps {
                for ix in 0..=steps {
                    let c = [lo + ix as f64 * 10.0, lo + iy as f64 * 10.0];
                    if !clear(&layout, c) {
                        continue;
                    }
                    let mut trial = layout.clone();
                    trial.push(c);
                    let f = eval(&trial);
                    evaluations += 1;
                    if best.is_none_or(|(_, bf)| f > bf) {
                        best = Some((c, f));
                    }
                }
            }
        }
        let Some((pos, pos_f)) = best else {
            return Err(Error::InvalidLayout(format!(
                "no feasible position for buoy {} of the {tile_buoys}-buoy sub-layout",
                layout.len() + 1
            )));
        };

        layout.push(pos);
        power = pos_f;

        // Nelder-Mead over the whole arrangement placed so far.
        if params.ls_nm.nm_iterations > 0 {
            let cfg = SimplexConfig {
                initial_edge: 10.0,
                max_iters: params.ls_nm.nm_iterations,
                f_tolerance: 1e-9 * power.abs().max(1.0),
                ..SimplexConfig::default()
            };
            let x0 = layout.flatten();
            let start_f = power;
            let result = simplex::minimize(
                |x| {
                    if x == x0.as_slice() {
                        return -start_f;
                    }
                    let trial = Layout::from_flat(tile_side, x).expect("finite");
                    if !crate::farm::measure_violations(&trial).is_clean() {
                        return f64::INFINITY;
                    }
                    evaluations += 1;
                    -eval(&trial)
                },
                &x0,
                &Bounds::uniform(x0.len(), lo, hi),
                &cfg,
                rng,
            )?;
            if -result.f > power {
                layout = Layout::from_flat(tile_side, &result.x)?;
                power = -result.f;
            }
        }
    }

    Ok(SubLayout {
        offsets: layout.positions().to_vec(),
        tile_side,
        power,
        evaluations,
    })
}

fn clear(layout: &Layout, p: Point) -> bool {
    layout.positions().iter().all(|&q| distance(p, q) >= SAFETY_DISTANCE)
}

/// Rotates points clockwise by `steps · 45°` about `centre`.
pub fn rotate_points(points: &[Point], centre: Point, steps: u8) -> Vec<Point> {
    let theta = -f64::from(steps % ROTATIONS) * FRAC_PI_4;
    let (s, c) = theta.sin_cos();
    points
        .iter()
        .map(|p| {
            let (dx, dy) = (p[0] - centre[0], p[1] - centre[1]);
            [centre[0] + c * dx - s * dy, centre[1] + s * dx + c * dy]
        })
        .collect()
}

/// Rotates the buoys lying in `tile` clockwise by `steps · 45°` about the
/// tile centre. Returns `None` when a rotated buoy would leave the tile's
/// usable area or come within the safety distance of another buoy, in which
/// case the caller keeps the original layout.
pub fn rotate_sublayout(layout: &Layout, grid: &TileGrid, tile: usize, steps: u8) -> Option<Layout> {
    let o = grid.origin(tile);
    let centre = [o[0] + grid.tile_side / 2.0, o[1] + grid.tile_side / 2.0];
    let members: Vec<usize> = (0..layout.len())
        .filter(|&i| grid.tile_of(layout.positions()[i]) == Some(tile))
        .collect();
    let pts: Vec<Point> = members.iter().map(|&i| layout.positions()[i]).collect();
    let rotated = rotate_points(&pts, centre, steps);
    let mut positions = layout.positions().to_vec();
    for (&i, &p) in members.iter().zip(&rotated) {
        if !inside_inner([p[0] - o[0], p[1] - o[1]], grid.tile_side) {
            return None;
        }
        positions[i] = p;
    }
    let out = layout.with_positions(positions);
    out.is_feasible().then_some(out)
}

/// Mosaic of the sub-layout: one copy per set bit, each turned by its tile's
/// rotation. With a partial last tile, the last occupied tile receives only
/// the first buoys of the sub-layout.
pub fn decode_tiles(genome: &BinaryGenome, rotations: &[u8], sub: &SubLayout, grid: &TileGrid, n_buoys: usize) -> Layout {
    let centre = [grid.tile_side / 2.0; 2];
    let mut positions = Vec::with_capacity(n_buoys);
    for tile in genome.ones() {
        let o = grid.origin(tile);
        for p in rotate_points(&sub.offsets, centre, rotations[tile]) {
            if positions.len() == n_buoys {
                break;
            }
            positions.push([o[0] + p[0], o[1] + p[1]]);
        }
    }
    Layout::new(grid.side, positions).expect("tile positions are finite")
}

/// Orientations that keep the sub-layout inside its tile's usable area.
pub fn valid_rotations(sub: &SubLayout) -> Vec<bool> {
    let centre = [sub.tile_side / 2.0; 2];
    (0..ROTATIONS)
        .map(|k| rotate_points(&sub.offsets, centre, k).iter().all(|&p| inside_inner(p, sub.tile_side)))
        .collect()
}

/// Tiles needed for `n_buoys` buoys.
pub fn tiles_needed(n_buoys: usize, tile_buoys: usize) -> usize {
    n_buoys.div_ceil(tile_buoys)
}

/// `lambda` genomes with exactly `occupied` random tiles set.
pub fn smart_init<R: Rng + ?Sized>(grid: &TileGrid, occupied: usize, lambda: usize, rng: &mut R) -> Vec<BinaryGenome> {
    (0..lambda)
        .map(|_| BinaryGenome::random(grid.tile_count(), occupied, rng))
        .collect()
}

/// Turns each occupied tile of `rotations` with probability `1/N_b` (at
/// least one tile is tried) by a random non-zero multiple of 45°.
/// Orientations that would leave the tile are discarded. Returns `None`
/// when nothing changed.
pub fn rotation_mutation<R: Rng + ?Sized>(
    genome: &BinaryGenome,
    rotations: &[u8],
    valid: &[bool],
    rng: &mut R,
) -> Option<Vec<u8>> {
    let tiles = genome.ones();
    if tiles.is_empty() {
        return None;
    }
    let p = 1.0 / tiles.len() as f64;
    let mut chosen: Vec<usize> = tiles.iter().copied().filter(|_| rng.random::<f64>() < p).collect();
    if chosen.is_empty() {
        chosen.push(tiles[rng.random_range(0..tiles.len())]);
    }
    let mut out = rotations.to_vec();
    let mut changed = false;
    for tile in chosen {
        let k = (out[tile] + rng.random_range(1..ROTATIONS)) % ROTATIONS;
        if valid[k as usize] {
            out[tile] = k;
            changed = true;
        }
    }
    changed.then_some(out)
}

/// Surrogate mosaic with binary search and rotation, then (for the full
/// pipeline) discrete and continuous local search.
pub fn ms_run<R: Rng + ?Sized>(
    variant: BinaryVariant,
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<RunRecord> {
    hybrid_run(variant, true, objective, problem, budget, params, rng)
}

/// The binary-and-rotation stage of [`ms_run`] on its own, for the whole
/// budget.
pub fn slsnm_hybrid_run<R: Rng + ?Sized>(
    variant: BinaryVariant,
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<RunRecord> {
    hybrid_run(variant, false, objective, problem, budget, params, rng)
}

fn hybrid_run<R: Rng + ?Sized>(
    variant: BinaryVariant,
    backtracking: bool,
    objective: &dyn Objective,
    problem: &Problem,
    budget: &Budget,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<RunRecord> {
    let (n, side) = (problem.n_buoys, problem.side);
    let hp = &params.hybrid;
    let grid = TileGrid::new(side, hp.tile_buoys)?;
    let occupied = tiles_needed(n, hp.tile_buoys);
    if occupied > grid.tile_count() {
        return Err(Error::InvalidParams(format!(
            "{occupied} sub-layouts do not fit in {} tiles",
            grid.tile_count()
        )));
    }
    let name = if backtracking {
        format!("MS-{}", variant.short())
    } else {
        format!("SLSNM-{}", variant.short())
    };
    let lambda = params.ea.population;
    let mut t = Tracker::new(objective, budget.max_evaluations, n);
    t.set_stage(Stage::Binary);

    let sub = sls_nm_surrogate(
        &mut |l| t.evaluate_auxiliary(l),
        grid.tile_side,
        hp.tile_buoys.min(n),
        problem.dominant_direction,
        params,
        rng,
    )?;
    let valid = valid_rotations(&sub);

    let genomes = smart_init(&grid, occupied, lambda, rng);
    let zero = vec![0u8; grid.tile_count()];
    let layouts: Vec<Layout> = genomes.iter().map(|g| decode_tiles(g, &zero, &sub, &grid, n)).collect();
    let fitness = t.evaluate_batch(&layouts);
    let population = genomes
        .into_iter()
        .zip(fitness)
        .map(|(genome, f)| Individual {
            genome,
            extra: zero.clone(),
            fitness: f.unwrap_or(f64::NEG_INFINITY),
        })
        .collect();
    let mut search = BinarySearch::new(variant, occupied, population)?;

    let stage1_cap = if backtracking {
        budget.stage1_end()
    } else {
        budget.max_evaluations
    };
    // schedule over the whole budget so both pipelines share their stage-1 trace
    let generations = (budget.max_evaluations / (lambda + 1)).max(1);
    let mut window = ImprovementWindow::new(hp.window);
    window.push(search.best().fitness);
    let mut g = 1;
    while !t.exhausted() && t.used() < stage1_cap && (!backtracking || window.keeps_going(hp.binary_threshold)) {
        let candidates = search.propose(params, g as f64 / generations as f64, rng);
        let layouts: Vec<Layout> = candidates
            .iter()
            .map(|c| decode_tiles(&c.genome, &c.extra, &sub, &grid, n))
            .collect();
        let fitness = t
            .evaluate_batch(&layouts)
            .into_iter()
            .map(|f| f.unwrap_or(f64::NEG_INFINITY))
            .collect();
        search.accept(candidates, fitness);

        if hp.rotation && !t.exhausted() {
            let best = search.best().clone();
            match rotation_mutation(&best.genome, &best.extra, &valid, rng) {
                Some(rot) => {
                    let layout = decode_tiles(&best.genome, &rot, &sub, &grid, n);
                    let f = t.evaluate(&layout).expect("budget checked");
                    if f > best.fitness {
                        search.replace_best(Individual {
                            genome: best.genome,
                            extra: rot,
                            fitness: f,
                        });
                    }
                }
                None => t.skip(),
            }
        }
        window.push(search.best().fitness);
        t.log_generation(g, window.rate());
        g += 1;
    }

    if backtracking && !t.exhausted() {
        let best = search.best().clone();
        let start = decode_tiles(&best.genome, &best.extra, &sub, &grid, n);

        t.set_stage(Stage::Dls);
        let allotted = budget.stage2_end().saturating_sub(t.used());
        let mut window = ImprovementWindow::new(hp.window);
        window.push(best.fitness);
        let threshold = hp.dls_threshold;
        let (layout, power) = dls_stage(
            &mut t,
            start,
            best.fitness,
            allotted,
            DlsVariant::Neighbour,
            &params.dls,
            params.grid_spacing,
            lambda,
            |f| {
                window.push(f);
                window.keeps_going(threshold)
            },
            rng,
        );
        t.log_generation(g, window.rate());

        t.set_stage(Stage::Cls);
        let rest = t.remaining();
        cls_stage(&mut t, layout, power, rest, &params.cls, rng);
        t.log_generation(g + 1, None);
    }
    t.finish(&name, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farm::farm_side;
    use crate::objective::FnObjective;
    use crate::opt::rng_from_seed;

    fn pairwise(points: &[Point]) -> Vec<f64> {
        let mut d = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                d.push(distance(points[i], points[j]));
            }
        }
        d
    }

    #[test]
    fn sixteen_buoys_get_nine_tiles() {
        let g = TileGrid::new(farm_side(16), 4).unwrap();
        assert_eq!(g.tile_count(), 9);
        assert!((g.tile_side - farm_side(16) / 3.0).abs() < 1e-12);
        assert_eq!(tiles_needed(16, 4), 4);
        assert_eq!(tiles_needed(9, 4), 3);
    }

    #[test]
    fn four_quarter_turns_are_identity() {
        let pts = vec![[30.0, 40.0], [100.0, 35.0], [70.0, 120.0]];
        let mut q = pts.clone();
        for _ in 0..4 {
            q = rotate_points(&q, [94.0, 94.0], 2);
        }
        for (a, b) in pts.iter().zip(&q) {
            assert!(distance(*a, *b) < 1e-9);
        }
    }

    #[test]
    fn rotation_preserves_distances() {
        let pts = vec![[30.0, 40.0], [100.0, 35.0], [70.0, 120.0], [140.0, 150.0]];
        let before = pairwise(&pts);
        for k in 0..8 {
            let after = pairwise(&rotate_points(&pts, [94.0, 94.0], k));
            for (a, b) in before.iter().zip(&after) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quarter_turn_of_square_is_same_set() {
        let sq = vec![[50.0, 50.0], [150.0, 50.0], [150.0, 150.0], [50.0, 150.0]];
        let r = rotate_points(&sq, [100.0, 100.0], 2);
        for p in &sq {
            assert!(r.iter().any(|q| distance(*p, *q) < 1e-9));
        }
    }

    #[test]
    fn surrogate_is_feasible_and_up_wave() {
        let obj = FnObjective(|l: &Layout| l.len() as f64 + l.positions().iter().map(|p| p[1] * 1e-3).sum::<f64>());
        let mut evals = 0;
        let sub = sls_nm_surrogate(
            &mut |l| {
                evals += 1;
                obj.0(l)
            },
            188.56,
            4,
            0.0,
            &OptimizerParams::default(),
            &mut rng_from_seed(1),
        )
        .unwrap();
        assert_eq!(sub.offsets.len(), 4);
        assert!(sub.as_layout().is_feasible());
        assert!(sub.offsets.iter().all(|&p| inside_inner(p, 188.56)));
        assert_eq!(sub.evaluations, evals);

        // without refinement the first buoy stays where it was placed
        let mut params = OptimizerParams::default();
        params.ls_nm.nm_iterations = 0;
        let placed = sls_nm_surrogate(&mut |l| obj.0(l), 188.56, 4, 0.0, &params, &mut rng_from_seed(1)).unwrap();
        assert_eq!(placed.offsets[0], [TILE_MARGIN, 188.56 / 2.0]);
    }

    #[test]
    fn single_buoy_surrogate_is_centred() {
        let sub = sls_nm_surrogate(&mut |_| 1.0, 100.0, 1, 0.3, &OptimizerParams::default(), &mut rng_from_seed(1)).unwrap();
        assert_eq!(sub.offsets, vec![[50.0, 50.0]]);
        assert_eq!(sub.power, 1.0);
    }

    #[test]
    fn mosaic_decodes_feasibly() {
        let grid = TileGrid::new(farm_side(16), 4).unwrap();
        let sub = SubLayout {
            offsets: vec![[25.0, 25.0], [25.0, 163.0], [163.0, 25.0], [100.0, 100.0]],
            tile_side: grid.tile_side,
            power: 0.0,
            evaluations: 0,
        };
        let mut rng = rng_from_seed(3);
        let valid = valid_rotations(&sub);
        assert!(valid[0] && valid[2] && valid[4] && valid[6]);
        for g in smart_init(&grid, 4, 12, &mut rng) {
            assert_eq!(g.popcount(), 4);
            let rot: Vec<u8> = (0..9).map(|_| rng.random_range(0..4u8) * 2).collect();
            let l = decode_tiles(&g, &rot, &sub, &grid, 16);
            assert_eq!(l.len(), 16);
            assert!(l.is_feasible());
            let partial = decode_tiles(&g, &rot, &sub, &grid, 14);
            assert_eq!(partial.len(), 14);
        }
    }

    #[test]
    fn rotate_sublayout_on_layout() {
        let grid = TileGrid::new(farm_side(16), 4).unwrap();
        let o = grid.origin(4);
        let l = Layout::new(grid.side, vec![[o[0] + 40.0, o[1] + 40.0], [o[0] + 120.0, o[1] + 60.0], [10.0, 10.0]]).unwrap();
        let r = rotate_sublayout(&l, &grid, 4, 2).unwrap();
        assert_eq!(r.positions()[2], [10.0, 10.0]);
        assert!((distance(r.positions()[0], r.positions()[1]) - distance(l.positions()[0], l.positions()[1])).abs() < 1e-9);
        // corners leave the usable area under a 45° turn
        let c = Layout::new(grid.side, vec![[o[0] + 26.0, o[1] + 26.0]]).unwrap();
        assert!(rotate_sublayout(&c, &grid, 4, 1).is_none());
    }

    #[test]
    fn runs_are_elitist_and_staged() {
        let p = Problem::new(16);
        let obj = FnObjective(|l: &Layout| l.positions().iter().map(|q| (q[0] * 0.013).sin() + (q[1] * 0.007).cos()).sum::<f64>());
        let budget = Budget::new(600);
        for v in [BinaryVariant::Ga, BinaryVariant::De, BinaryVariant::Pso] {
            let r = ms_run(v, &obj, &p, &budget, &OptimizerParams::default(), &mut rng_from_seed(2)).unwrap();
            assert!(r.curve.windows(2).all(|w| w[1].best_power >= w[0].best_power));
            assert!(r.final_layout.is_feasible());
            assert_eq!(r.evaluations, 600);
            let stages: Vec<Stage> = r.stages.iter().map(|m| m.stage).collect();
            assert_eq!(stages.first(), Some(&Stage::Binary));
            assert_eq!(stages.last(), Some(&Stage::Cls));
            let s = slsnm_hybrid_run(v, &obj, &p, &budget, &OptimizerParams::default(), &mut rng_from_seed(2)).unwrap();
            assert!(s.stages.iter().all(|m| m.stage == Stage::Binary));
            let prefix = r.stages.get(1).map_or(r.curve.len(), |m| m.start_evaluation);
            assert_eq!(&r.curve[..prefix], &s.curve[..prefix]);
        }
    }
}
