//! Post-hoc analyses of a finished layout: buoy removal and power landscapes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::farm::{distance, Layout, Point, SAFETY_DISTANCE};
use crate::hydro::FarmModel;

/// One point of the removal curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovalStep {
    pub remaining: usize,
    pub power: f64,
    pub q: f64,
    /// Position of the buoy removed after this step, if any.
    pub removed: Option<Point>,
}

/// Evaluates the layout, drops its weakest buoy (lowest index on ties) and
/// repeats until one buoy is left.
pub fn buoy_removal(model: &FarmModel, layout: &Layout) -> Result<Vec<RemovalStep>> {
    let mut current = layout.clone();
    let mut steps = Vec::with_capacity(layout.len());
    while !current.is_empty() {
        let power = model.evaluate(&current)?;
        let q = model.q_from_total(&current, power.total)?;
        let weakest = power
            .per_buoy
            .iter()
            .enumerate()
            .fold(0, |best, (i, &p)| if p < power.per_buoy[best] { i } else { best });
        let last = current.len() == 1;
        steps.push(RemovalStep {
            remaining: current.len(),
            power: power.total,
            q,
            removed: (!last).then(|| current.positions()[weakest]),
        });
        if last {
            break;
        }
        current = current.without(weakest);
    }
    Ok(steps)
}

pub fn removal_csv(steps: &[RemovalStep]) -> String {
    let mut out = String::from("remaining,power,q\n");
    for s in steps {
        out.push_str(&format!("{},{},{}\n", s.remaining, s.power, s.q));
    }
    out
}

/// Power with a probe buoy added at one grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSample {
    pub buoy_power: f64,
    pub total_power: f64,
}

/// Grid of probe samples; `None` marks nodes inside a safety circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Landscape {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: `cells[iy * xs.len() + ix]`.
    pub cells: Vec<Option<ProbeSample>>,
}

impl Landscape {
    pub fn get(&self, ix: usize, iy: usize) -> Option<ProbeSample> {
        self.cells[iy * self.xs.len() + ix]
    }

    /// The node with the largest probe power and its sample.
    pub fn best(&self) -> Option<(Point, ProbeSample)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|s| (i, s)))
            .max_by(|a, b| a.1.buoy_power.total_cmp(&b.1.buoy_power))
            .map(|(i, s)| ([self.xs[i % self.xs.len()], self.ys[i / self.xs.len()]], s))
    }

    pub fn masked_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// `x,y,buoy_power,total_power` with empty fields on masked nodes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,buoy_power,total_power\n");
        for (iy, y) in self.ys.iter().enumerate() {
            for (ix, x) in self.xs.iter().enumerate() {
                match self.get(ix, iy) {
                    Some(s) => out.push_str(&format!("{x},{y},{},{}\n", s.buoy_power, s.total_power)),
                    None => out.push_str(&format!("{x},{y},,\n")),
                }
            }
        }
        out
    }
}

/// Grid nodes `0, step, 2·step, …` up to the farm side.
pub fn grid_axis(side: f64, step: f64) -> Vec<f64> {
    let count = (side / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| i as f64 * step).collect()
}

/// Places one extra buoy at every grid node of `fixed`'s farm and records its
/// power and the farm total. Nodes closer than the safety distance to a fixed
/// buoy are masked.
pub fn landscape_scan(model: &FarmModel, fixed: &Layout, step: f64) -> Result<Landscape> {
    let xs = grid_axis(fixed.side(), step);
    let ys = xs.clone();
    let nodes: Vec<Point> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect();
    let cells = nodes
        .par_iter()
        .map(|&p| {
            if !fixed.in_bounds(p) || fixed.positions().iter().any(|&q| distance(p, q) < SAFETY_DISTANCE) {
                return Ok(None);
            }
            let mut probe = fixed.clone();
            probe.push(p);
            let power = model.evaluate(&probe)?;
            Ok(Some(ProbeSample {
                buoy_power: power.per_buoy[fixed.len()],
                total_power: power.total,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Landscape { xs, ys, cells })
}
