//! Farm geometry: layouts, the minimum-distance constraint and its repair.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{self, Bounds, SimplexConfig};

/// Minimum allowed centre-to-centre distance between two buoys (m).
pub const SAFETY_DISTANCE: f64 = 50.0;

/// Farm area allotted to every buoy (m²).
pub const AREA_PER_BUOY: f64 = 20_000.0;

pub type Point = [f64; 2];

/// Side length of the square farm that holds `n` buoys.
pub fn farm_side(n: usize) -> f64 {
    (n as f64 * AREA_PER_BUOY).sqrt()
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Buoy positions inside a square farm `[0, side]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    #[serde(rename = "farm_size_m")]
    side: f64,
    positions: Vec<Point>,
}

impl Layout {
    pub fn new(side: f64, positions: Vec<Point>) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidLayout(format!("farm side {side} is not positive")));
        }
        if let Some(i) = positions
            .iter()
            .position(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(Error::InvalidLayout(format!(
                "buoy {i} has a non-finite position {:?}",
                positions[i]
            )));
        }
        Ok(Self { side, positions })
    }

    /// An empty farm sized for `n` buoys.
    pub fn empty_for(n: usize) -> Self {
        Self {
            side: farm_side(n.max(1)),
            positions: Vec::new(),
        }
    }

    /// Rebuilds a layout from `[x0, y0, x1, y1, ...]`.
    pub fn from_flat(side: f64, flat: &[f64]) -> Result<Self> {
        Self::new(side, flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn with_positions(&self, positions: Vec<Point>) -> Self {
        Self {
            side: self.side,
            positions,
        }
    }

    pub fn push(&mut self, p: Point) {
        self.positions.push(p);
    }

    /// The layout without buoy `index`.
    pub fn without(&self, index: usize) -> Self {
        let mut positions = self.positions.clone();
        positions.remove(index);
        self.with_positions(positions)
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        (0.0..=self.side).contains(&p[0]) && (0.0..=self.side).contains(&p[1])
    }

    /// Every buoy in the box and every pair at least [`SAFETY_DISTANCE`] apart.
    pub fn is_feasible(&self) -> bool {
        self.positions.iter().all(|&p| self.in_bounds(p)) && measure_violations(self).is_clean()
    }

    /// Whether `p` keeps the safety distance to every buoy except `skip`.
    pub fn clear_of(&self, p: Point, skip: Option<usize>) -> bool {
        self.positions
            .iter()
            .enumerate()
            .all(|(j, &q)| Some(j) == skip || distance(p, q) >= SAFETY_DISTANCE)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading layout {}", path.display()), e))?;
        let layout: Layout = serde_json::from_str(&text)?;
        Layout::new(layout.side, layout.positions)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::io(format!("writing layout {}", path.display()), e))
    }
}

/// One pair of buoys closer than the safety distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    pub shortfall: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViolationReport {
    pub sum_dist: f64,
    pub violating_pairs: Vec<PairViolation>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violating_pairs.is_empty()
    }

    /// Indices of buoys appearing in at least one violating pair, ascending.
    pub fn violators(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .violating_pairs
            .iter()
            .flat_map(|p| [p.i, p.j])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Total shortfall below the safety distance over all buoy pairs.
pub fn measure_violations(layout: &Layout) -> ViolationReport {
    let mut report = ViolationReport::default();
    let pos = layout.positions();
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            let d = distance(pos[i], pos[j]);
            if d < SAFETY_DISTANCE {
                let shortfall = SAFETY_DISTANCE - d;
                report.sum_dist += shortfall;
                report.violating_pairs.push(PairViolation { i, j, shortfall });
            }
        }
    }
    report
}

fn sum_dist(positions: &[Point]) -> f64 {
    let mut total = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = distance(positions[i], positions[j]);
            if d < SAFETY_DISTANCE {
                total += SAFETY_DISTANCE - d;
            }
        }
    }
    total
}

pub fn penalty(sum_dist: f64) -> f64 {
    (sum_dist + 1.0).powi(20)
}

/// Moves every out-of-box coordinate back onto the farm boundary.
pub fn clamp_to_farm(layout: &Layout) -> Layout {
    let side = layout.side();
    layout.with_positions(
        layout
            .positions()
            .iter()
            .map(|p| [p[0].clamp(0.0, side), p[1].clamp(0.0, side)])
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairOutcome {
    pub layout: Layout,
    /// `false` means the layout still violates the distance constraint and
    /// must not be evaluated.
    pub feasible: bool,
    pub report: ViolationReport,
}

const REPAIR_ROUNDS: usize = 4;
const JITTER: f64 = 0.1;

/// Clamps the layout into the farm and then runs Nelder-Mead on the penalty
/// `(sum_dist + 1)^20`, moving only buoys involved in a violation.
pub fn repair<R: Rng + ?Sized>(layout: &Layout, rng: &mut R) -> RepairOutcome {
    let mut current = clamp_to_farm(layout);
    let side = current.side();

    // Coincident buoys give the simplex nothing to push against.
    let n = current.len();
    for i in 0..n {
        for j in i + 1..n {
            if current.positions[i] == current.positions[j] {
                let angle = rng.random::<f64>() * std::f64::consts::TAU;
                let p = &mut current.positions[j];
                p[0] = (p[0] + JITTER * angle.cos()).clamp(0.0, side);
                p[1] = (p[1] + JITTER * angle.sin()).clamp(0.0, side);
            }
        }
    }

    for _ in 0..REPAIR_ROUNDS {
        let report = measure_violations(&current);
        if report.is_clean() {
            return RepairOutcome {
                layout: current,
                feasible: true,
                report,
            };
        }
        let free = report.violators();
        let x0: Vec<f64> = free
            .iter()
            .flat_map(|&i| current.positions[i])
            .collect();
        let dims = x0.len();
        let cfg = SimplexConfig {
            initial_edge: 10.0,
            max_iters: 200 * dims,
            f_tolerance: 0.0,
            target: Some(1.0),
            ..SimplexConfig::default()
        };
        let mut scratch = current.positions.clone();
        let result = simplex::minimize(
            |x| {
                for (k, &i) in free.iter().enumerate() {
                    scratch[i] = [x[2 * k], x[2 * k + 1]];
                }
                penalty(sum_dist(&scratch))
            },
            &x0,
            &Bounds::uniform(dims, 0.0, side),
            &cfg,
            rng,
        );
        match result {
            Ok(r) => {
                for (k, &i) in free.iter().enumerate() {
                    current.positions[i] = [r.x[2 * k], r.x[2 * k + 1]];
                }
                current = clamp_to_farm(&current);
            }
            Err(_) => break,
        }
    }

    let report = measure_violations(&current);
    RepairOutcome {
        feasible: report.is_clean(),
        layout: current,
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layout(side: f64, pts: &[Point]) -> Layout {
        Layout::new(side, pts.to_vec()).unwrap()
    }

    #[test]
    fn farm_side_values() {
        assert!((farm_side(49) - 989.949_493_661_166_5).abs() < 1e-9);
        assert!((farm_side(100) - 1414.213_562_373_095).abs() < 1e-9);
        assert!((farm_side(1) - 141.421_356_237_309_5).abs() < 1e-9);
    }

    #[test]
    fn violations_from_pair_distances() {
        // pairs at 40, 45 and 60 m from a common buoy, others far apart
        let l = layout(1000.0, &[[500.0, 500.0], [540.0, 500.0], [500.0, 455.0], [440.0, 500.0]]);
        let r = measure_violations(&l);
        // (0,1)=40, (0,2)=45, (0,3)=60; (1,2)=60.2, (1,3)=100, (2,3)=75
        assert!((r.sum_dist - 15.0).abs() < 1e-12);
        assert_eq!(r.violating_pairs.len(), 2);
    }

    #[test]
    fn collinear_three_buoys() {
        let l = layout(100.0, &[[0.0, 0.0], [30.0, 0.0], [60.0, 0.0]]);
        let r = measure_violations(&l);
        assert!((r.sum_dist - 40.0).abs() < 1e-12);
        assert_eq!(r.violators(), vec![0, 1, 2]);
    }

    #[test]
    fn clean_layout_reports_zero() {
        let l = layout(200.0, &[[0.0, 0.0], [50.0, 0.0], [0.0, 50.0]]);
        let r = measure_violations(&l);
        assert_eq!(r.sum_dist, 0.0);
        assert!(r.is_clean());
    }

    #[test]
    fn penalty_values() {
        assert_eq!(penalty(0.0), 1.0);
        assert_eq!(penalty(1.0), 1_048_576.0);
        assert!((penalty(0.5) - 3325.256_730_079_651).abs() < 1e-9);
    }

    #[test]
    fn clamp_examples() {
        let l = layout(990.0, &[[-10.0, 500.0], [995.0, 1200.0], [3.0, 4.0]]);
        let c = clamp_to_farm(&l);
        assert_eq!(c.positions(), &[[0.0, 500.0], [990.0, 990.0], [3.0, 4.0]]);
        assert_eq!(clamp_to_farm(&c), c);
    }

    #[test]
    fn non_finite_positions_rejected() {
        assert!(Layout::new(10.0, vec![[f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn repair_leaves_feasible_layout_alone() {
        let l = layout(300.0, &[[10.0, 10.0], [100.0, 100.0]]);
        let out = repair(&l, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(out.feasible);
        assert_eq!(out.layout, l);
    }

    #[test]
    fn repair_separates_close_pair() {
        let l = layout(1000.0, &[[500.0, 500.0], [530.0, 500.0]]);
        let out = repair(&l, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(out.feasible);
        let p = out.layout.positions();
        assert!(distance(p[0], p[1]) >= SAFETY_DISTANCE);
        assert!(p.iter().all(|&q| out.layout.in_bounds(q)));
    }

    #[test]
    fn repair_handles_coincident_buoys() {
        let l = layout(400.0, &[[200.0, 200.0], [200.0, 200.0], [200.0, 200.0]]);
        let out = repair(&l, &mut ChaCha8Rng::seed_from_u64(9));
        assert!(out.feasible, "{:?}", out.report);
    }

    #[test]
    fn layout_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("layout.json");
        let l = layout(565.0, &[[1.5, 2.0], [100.0, 300.25]]);
        l.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("farm_size_m") && text.contains("positions"));
        assert_eq!(Layout::load(&path).unwrap(), l);
    }
}
