//! The objective seen by optimizers and the bookkeeping of one optimizer run.
//!
//! Every optimizer draws evaluations through a [`Tracker`], which enforces the
//! evaluation budget, keeps the best layout seen so far and records the
//! best-so-far curve that ends up in the [`RunRecord`].

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::Layout;
use crate::hydro::FarmModel;

/// Annual power of a layout, to be maximized.
///
/// Implementations return `f64::NEG_INFINITY` for layouts they cannot
/// evaluate so that such candidates always lose selection.
pub trait Objective: Sync {
    fn power(&self, layout: &Layout) -> f64;
}

impl Objective for FarmModel {
    fn power(&self, layout: &Layout) -> f64 {
        self.annual_power(layout).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Wraps a closure as an [`Objective`], mostly for cheap analytic stand-ins.
pub struct FnObjective<F>(pub F);

impl<F> Objective for FnObjective<F>
where
    F: Fn(&Layout) -> f64 + Sync,
{
    fn power(&self, layout: &Layout) -> f64 {
        let v = (self.0)(layout);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// Evaluation budget and the stage boundaries of multi-stage algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_evaluations: usize,
    /// Fractions of the budget at which stage 1 and stage 2 end.
    #[serde(default = "Budget::default_fractions")]
    pub stage_fractions: (f64, f64),
}

impl Budget {
    fn default_fractions() -> (f64, f64) {
        (1.0 / 3.0, 2.0 / 3.0)
    }

    pub fn new(max_evaluations: usize) -> Self {
        Self {
            max_evaluations,
            stage_fractions: Self::default_fractions(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (s1, s2) = self.stage_fractions;
        if self.max_evaluations == 0 {
            return Err(Error::InvalidBudget("budget must allow at least one evaluation".into()));
        }
        if !(0.0 < s1 && s1 < s2 && s2 < 1.0) {
            return Err(Error::InvalidBudget(format!(
                "stage fractions ({s1}, {s2}) must satisfy 0 < s1 < s2 < 1"
            )));
        }
        Ok(())
    }

    /// Evaluation index at which stage 1 ends.
    pub fn stage1_end(&self) -> usize {
        (self.stage_fractions.0 * self.max_evaluations as f64).floor() as usize
    }

    /// Evaluation index at which stage 2 ends.
    pub fn stage2_end(&self) -> usize {
        (self.stage_fractions.1 * self.max_evaluations as f64).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Search,
    Binary,
    Dls,
    Cls,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Search => "search",
            Stage::Binary => "binary",
            Stage::Dls => "dls",
            Stage::Cls => "cls",
        }
    }
}

/// Best power after one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// 1-based evaluation count.
    pub evaluation: usize,
    pub best_power: f64,
    pub stage: Stage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageMarker {
    pub stage: Stage,
    /// Evaluations consumed before the stage began.
    pub start_evaluation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub stage: Stage,
    pub evaluations: usize,
    pub best_power: f64,
    /// Relative gain of the best over the improvement window; `None` until
    /// the window is full.
    pub improvement_rate: Option<f64>,
}

/// Trace of one seeded optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub seed: u64,
    pub curve: Vec<CurvePoint>,
    pub final_layout: Layout,
    pub final_power: f64,
    pub evaluations: usize,
    /// Candidates dropped without evaluation (unrepairable or no legal move).
    pub skipped: usize,
    /// Evaluations spent on sub-layouts outside the main budget.
    pub auxiliary_evaluations: usize,
    pub stages: Vec<StageMarker>,
    pub generations: Vec<GenerationLog>,
    pub elapsed_seconds: f64,
}

impl RunRecord {
    /// Best power at the end of each stage, in stage order.
    pub fn stage_finals(&self) -> Vec<(Stage, f64)> {
        let mut out: Vec<(Stage, f64)> = Vec::new();
        for p in &self.curve {
            match out.last_mut() {
                Some((s, v)) if *s == p.stage => *v = p.best_power,
                _ => out.push((p.stage, p.best_power)),
            }
        }
        out
    }

    /// Best power after the first `count` evaluations.
    pub fn best_after(&self, count: usize) -> Option<f64> {
        if count == 0 {
            return None;
        }
        self.curve.get(count.min(self.curve.len()) - 1).map(|p| p.best_power)
    }
}

/// Budgeted access to the objective for one run.
///
/// Layouts with fewer buoys than the target count (partial farms built up
/// one buoy at a time) never displace a complete layout as the incumbent.
pub struct Tracker<'a> {
    objective: &'a dyn Objective,
    budget: usize,
    target_len: usize,
    used: usize,
    skipped: usize,
    auxiliary: usize,
    best: Option<(Layout, f64)>,
    stage: Stage,
    curve: Vec<CurvePoint>,
    stages: Vec<StageMarker>,
    generations: Vec<GenerationLog>,
    started: Instant,
}

impl<'a> Tracker<'a> {
    pub fn new(objective: &'a dyn Objective, budget: usize, target_len: usize) -> Self {
        Self {
            objective,
            budget,
            target_len,
            used: 0,
            skipped: 0,
            auxiliary: 0,
            best: None,
            stage: Stage::Search,
            curve: Vec::with_capacity(budget),
            stages: vec![StageMarker {
                stage: Stage::Search,
                start_evaluation: 0,
            }],
            generations: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn objective(&self) -> &'a dyn Objective {
        self.objective
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.used
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn set_stage(&mut self, stage: Stage) {
        if stage == self.stage {
            return;
        }
        self.stage = stage;
        match self.stages.last_mut() {
            // a stage that consumed nothing is replaced outright
            Some(m) if m.start_evaluation == self.used => {
                *m = StageMarker {
                    stage,
                    start_evaluation: self.used,
                }
            }
            _ => self.stages.push(StageMarker {
                stage,
                start_evaluation: self.used,
            }),
        }
    }

    pub fn best(&self) -> Option<(&Layout, f64)> {
        self.best.as_ref().map(|(l, f)| (l, *f))
    }

    pub fn best_power(&self) -> f64 {
        self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1)
    }

    /// Evaluates one layout, or returns `None` once the budget is spent.
    pub fn evaluate(&mut self, layout: &Layout) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let f = self.objective.power(layout);
        self.record(layout, f);
        Some(f)
    }

    /// Evaluates as many of `layouts` as the budget allows, in parallel.
    /// Results are recorded in input order, so runs stay reproducible.
    pub fn evaluate_batch(&mut self, layouts: &[Layout]) -> Vec<Option<f64>> {
        let take = layouts.len().min(self.remaining());
        let values: Vec<f64> = layouts[..take].par_iter().map(|l| self.objective.power(l)).collect();
        let mut out = Vec::with_capacity(layouts.len());
        for (layout, f) in layouts.iter().zip(values) {
            self.record(layout, f);
            out.push(Some(f));
        }
        out.resize(layouts.len(), None);
        out
    }

    /// Evaluates a layout outside the main budget (surrogate sub-layouts).
    pub fn evaluate_auxiliary(&mut self, layout: &Layout) -> f64 {
        self.auxiliary += 1;
        self.objective.power(layout)
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn log_generation(&mut self, generation: usize, improvement_rate: Option<f64>) {
        self.generations.push(GenerationLog {
            generation,
            stage: self.stage,
            evaluations: self.used,
            best_power: self.best_power(),
            improvement_rate,
        });
    }

    fn record(&mut self, layout: &Layout, f: f64) {
        self.used += 1;
        let better = match &self.best {
            None => true,
            Some((b, bf)) => {
                let (bl, l) = (b.len().min(self.target_len), layout.len().min(self.target_len));
                l > bl || (l == bl && f > *bf)
            }
        };
        if better {
            self.best = Some((layout.clone(), f));
        }
        self.curve.push(CurvePoint {
            evaluation: self.used,
            best_power: self.best_power(),
            stage: self.stage,
        });
    }

    pub fn finish(self, algorithm: &str, seed: u64) -> Result<RunRecord> {
        let (final_layout, final_power) = self
            .best
            .ok_or_else(|| Error::InvalidBudget(format!("{algorithm} finished without evaluating a layout")))?;
        let mut stages = self.stages;
        if stages.len() > 1 && stages.last().is_some_and(|m| m.start_evaluation == self.used) {
            stages.pop();
        }
        Ok(RunRecord {
            algorithm: algorithm.to_string(),
            seed,
            curve: self.curve,
            final_layout,
            final_power,
            evaluations: self.used,
            skipped: self.skipped,
            auxiliary_evaluations: self.auxiliary,
            stages,
            generations: self.generations,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
        })
    }
}

/// Relative gain of the best power over a sliding window of generations.
#[derive(Debug, Clone)]
pub struct ImprovementWindow {
    window: usize,
    history: Vec<f64>,
}

impl ImprovementWindow {
    pub fn new(window: usize) -> Self {
        Self {
            window: window.max(1),
            history: Vec::new(),
        }
    }

    pub fn push(&mut self, best: f64) {
        self.history.push(best);
    }

    /// `(best_now − best_W_ago) / best_W_ago`, or `None` until `W`
    /// generations have been pushed after the first.
    pub fn rate(&self) -> Option<f64> {
        let n = self.history.len();
        if n <= self.window {
            return None;
        }
        let (then, now) = (self.history[n - 1 - self.window], self.history[n - 1]);
        if then.abs() > 0.0 && then.is_finite() {
            Some(((now - then) / then.abs()).max(0.0))
        } else {
            Some(0.0)
        }
    }

    /// Whether the stage should continue under `threshold`.
    pub fn keeps_going(&self, threshold: f64) -> bool {
        self.rate().is_none_or(|r| r >= threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Layout {
        Layout::new(1000.0, (0..n).map(|i| [i as f64 * 60.0, 0.0]).collect()).unwrap()
    }

    #[test]
    fn budget_is_enforced() {
        let obj = FnObjective(|l: &Layout| l.positions()[0][0]);
        let mut t = Tracker::new(&obj, 3, 1);
        let ls: Vec<Layout> = (0..5).map(|i| Layout::new(10.0, vec![[i as f64, 0.0]]).unwrap()).collect();
        let r = t.evaluate_batch(&ls);
        assert_eq!(r, vec![Some(0.0), Some(1.0), Some(2.0), None, None]);
        assert!(t.exhausted());
        assert_eq!(t.evaluate(&ls[4]), None);
        let rec = t.finish("x", 0).unwrap();
        assert_eq!(rec.final_power, 2.0);
        assert_eq!(rec.curve.len(), 3);
    }

    #[test]
    fn curve_is_best_so_far() {
        let vals = [3.0, 1.0, 5.0, 4.0];
        let obj = FnObjective(move |l: &Layout| vals[l.positions()[0][0] as usize]);
        let mut t = Tracker::new(&obj, 10, 1);
        for i in 0..4 {
            t.evaluate(&Layout::new(10.0, vec![[i as f64, 0.0]]).unwrap());
        }
        let rec = t.finish("x", 0).unwrap();
        let c: Vec<f64> = rec.curve.iter().map(|p| p.best_power).collect();
        assert_eq!(c, vec![3.0, 3.0, 5.0, 5.0]);
    }

    #[test]
    fn partial_layouts_never_beat_complete_ones() {
        let obj = FnObjective(|l: &Layout| if l.len() == 1 { 100.0 } else { 1.0 });
        let mut t = Tracker::new(&obj, 10, 2);
        t.evaluate(&line(1));
        t.evaluate(&line(2));
        t.evaluate(&line(1));
        let rec = t.finish("x", 0).unwrap();
        assert_eq!(rec.final_layout.len(), 2);
        assert_eq!(rec.final_power, 1.0);
    }

    #[test]
    fn stage_markers() {
        let obj = FnObjective(|_: &Layout| 1.0);
        let mut t = Tracker::new(&obj, 10, 1);
        t.set_stage(Stage::Binary);
        t.evaluate(&line(1));
        t.set_stage(Stage::Dls);
        t.set_stage(Stage::Cls);
        t.evaluate(&line(1));
        let rec = t.finish("x", 0).unwrap();
        let s: Vec<(Stage, usize)> = rec.stages.iter().map(|m| (m.stage, m.start_evaluation)).collect();
        assert_eq!(s, vec![(Stage::Binary, 0), (Stage::Cls, 1)]);
    }

    #[test]
    fn improvement_window() {
        let mut w = ImprovementWindow::new(2);
        w.push(100.0);
        w.push(100.0);
        assert_eq!(w.rate(), None);
        assert!(w.keeps_going(0.5));
        w.push(100.0);
        assert_eq!(w.rate(), Some(0.0));
        w.push(110.0);
        assert!((w.rate().unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::new(0).validate().is_err());
        let mut b = Budget::new(300);
        assert_eq!((b.stage1_end(), b.stage2_end()), (100, 200));
        b.stage_fractions = (0.7, 0.5);
        assert!(b.validate().is_err());
    }
}
