//! Nelder-Mead simplex minimizer over an axis-aligned box.
//!
//! Trial vertices are clamped into the box before they are evaluated, so the
//! objective never sees a point outside `[lower, upper]`. The only randomness
//! is the orientation of the initial simplex (one random sign per axis), which
//! makes runs reproducible from the seed.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexConfig {
    /// Reflection coefficient, `> 0`.
    pub reflection: f64,
    /// Expansion coefficient, `> 1`.
    pub expansion: f64,
    /// Contraction coefficient, in `(0, 1)`.
    pub contraction: f64,
    /// Shrink coefficient, in `(0, 1)`.
    pub shrink: f64,
    /// Edge length of the initial simplex along every axis.
    pub initial_edge: f64,
    pub max_iters: usize,
    /// Stop once the spread of objective values across the simplex falls to
    /// this value or below.
    pub f_tolerance: f64,
    /// Stop as soon as the best vertex reaches this value.
    pub target: Option<f64>,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_edge: 1.0,
            max_iters: 1000,
            f_tolerance: 1e-12,
            target: None,
        }
    }
}

impl SimplexConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.reflection > 0.0
            && self.expansion > 1.0
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.initial_edge > 0.0
            && self.f_tolerance >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "simplex coefficients out of range: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best objective value after each iteration (index 0 is the start).
    pub history: Vec<f64>,
}

/// Box constraints for [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    /// The same interval on every axis.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Self {
        Self {
            lower: vec![lower; dim],
            upper: vec![upper; dim],
        }
    }

    pub fn unbounded(dim: usize) -> Self {
        Self::uniform(dim, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((v, lo), hi)| *v >= *lo && *v <= *hi)
    }
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

/// Minimizes `f` starting from `x0`.
///
/// Non-finite objective values away from the start are treated as `+inf`.
pub fn minimize<F, R>(
    mut f: F,
    x0: &[f64],
    bounds: &Bounds,
    cfg: &SimplexConfig,
    rng: &mut R,
) -> Result<SimplexResult>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let dim = x0.len();
    if dim == 0 || bounds.dim() != dim {
        return Err(Error::InvalidParams(format!(
            "simplex dimension mismatch: start has {dim} coordinates, box has {}",
            bounds.dim()
        )));
    }
    if !bounds.contains(x0) {
        return Err(Error::InvalidStart);
    }

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let f0 = eval(x0);
    if !f0.is_finite() {
        return Err(Error::InvalidStart);
    }

    let mut simplex = Vec::with_capacity(dim + 1);
    simplex.push(Vertex {
        x: x0.to_vec(),
        f: f0,
    });
    for axis in 0..dim {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let mut x = x0.to_vec();
        x[axis] += sign * cfg.initial_edge;
        bounds.clamp(&mut x);
        if x[axis] == x0[axis] {
            // start sits on the wall this edge points into
            x[axis] = x0[axis] - sign * cfg.initial_edge;
            bounds.clamp(&mut x);
        }
        let fx = eval(&x);
        simplex.push(Vertex { x, f: fx });
    }

    let mut history = vec![f0];
    let mut iterations = 0;
    let n = dim as f64;
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];

    // Stable sort keeps x0 ahead of equally good vertices.
    simplex.sort_by(|a, b| a.f.total_cmp(&b.f));

    while iterations < cfg.max_iters {
        let best = simplex[0].f;
        let worst = simplex[dim].f;
        if cfg.target.is_some_and(|t| best <= t) {
            break;
        }
        if (worst - best).abs() <= cfg.f_tolerance {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for v in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(&v.x) {
                *c += xi / n;
            }
        }

        let along = |t: &mut [f64], from: &[f64], coef: f64| {
            for ((ti, ci), fi) in t.iter_mut().zip(&centroid).zip(from) {
                *ti = ci + coef * (fi - ci);
            }
        };

        // reflection
        along(&mut trial, &simplex[dim].x, -cfg.reflection);
        bounds.clamp(&mut trial);
        let reflected = Vertex {
            x: trial.clone(),
            f: eval(&trial),
        };

        if reflected.f < simplex[0].f {
            along(&mut trial, &reflected.x, cfg.expansion);
            bounds.clamp(&mut trial);
            let fe = eval(&trial);
            simplex[dim] = if fe < reflected.f {
                Vertex {
                    x: trial.clone(),
                    f: fe,
                }
            } else {
                reflected
            };
        } else if reflected.f < simplex[dim - 1].f {
            simplex[dim] = reflected;
        } else {
            let outside = reflected.f < simplex[dim].f;
            if outside {
                along(&mut trial, &reflected.x, cfg.contraction);
            } else {
                along(&mut trial, &simplex[dim].x, cfg.contraction);
            }
            bounds.clamp(&mut trial);
            let fc = eval(&trial);
            let reference = reflected.f.min(simplex[dim].f);
            if fc < reference {
                simplex[dim] = Vertex {
                    x: trial.clone(),
                    f: fc,
                };
            } else if outside {
                simplex[dim] = reflected;
                shrink(&mut simplex, cfg.shrink, bounds, &mut eval);
            } else {
                shrink(&mut simplex, cfg.shrink, bounds, &mut eval);
            }
        }

        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        history.push(simplex[0].f);

        let spread = simplex[1..].iter().fold(0.0f64, |acc, v| {
            v.x.iter()
                .zip(&simplex[0].x)
                .fold(acc, |a, (p, q)| a.max((p - q).abs()))
        });
        if spread == 0.0 {
            break;
        }
    }

    let best = simplex.swap_remove(0);
    Ok(SimplexResult {
        x: best.x,
        f: best.f,
        iterations,
        evaluations,
        history,
    })
}

fn shrink<E: FnMut(&[f64]) -> f64>(
    simplex: &mut [Vertex],
    sigma: f64,
    bounds: &Bounds,
    eval: &mut E,
) {
    let (head, tail) = simplex.split_at_mut(1);
    let best = &head[0].x;
    for v in tail {
        for (xi, bi) in v.x.iter_mut().zip(best) {
            *xi = bi + sigma * (*xi - bi);
        }
        bounds.clamp(&mut v.x);
        v.f = eval(&v.x);
    }
}
