use std::sync::Arc;

use num_complex::Complex64;

use crate::climate::WaveClimate;
use crate::error::{Error, Result};
use crate::farm::{distance, Layout};

use super::{wavenumber, BesselJ0, BuoySpec, CouplingKernel, HydroTable};

/// Annual average power of a layout and its split over buoys (W).
#[derive(Debug, Clone, PartialEq)]
pub struct FarmPower {
    pub total: f64,
    pub per_buoy: Vec<f64>,
}

/// DOFs whose coefficients coincide at a frequency share one factorization.
#[derive(Debug, Clone)]
struct DofClass {
    multiplicity: f64,
    /// Uncoupled impedance `−ω²(m+A) + K + iω(B+D)`.
    diagonal: Complex64,
    /// `iω·B_ii`, multiplied by the kernel factor off the diagonal.
    coupling: Complex64,
    excitation: f64,
    /// `½·D·ω²`, power per unit `|X|²`.
    power_gain: f64,
}

#[derive(Debug, Clone)]
struct Direction {
    cos: f64,
    sin: f64,
    weight: f64,
}

#[derive(Debug, Clone)]
struct FrequencyNode {
    wavenumber: f64,
    classes: Vec<DofClass>,
    directions: Vec<Direction>,
}

/// Annual-power evaluator for one buoy design, coefficient table and climate.
///
/// Because only like DOFs interact and the impedance does not depend on the
/// wave direction, each frequency needs one `N×N` LU factorization per
/// distinct DOF class; every direction is then a pair of triangular solves.
/// The climate's sea states are folded into one weight per (ω, β) node.
#[derive(Debug, Clone)]
pub struct FarmModel {
    spec: BuoySpec,
    table: HydroTable,
    climate: WaveClimate,
    kernel: Arc<dyn CouplingKernel>,
    nodes: Vec<FrequencyNode>,
}

impl FarmModel {
    pub fn new(
        spec: BuoySpec,
        table: HydroTable,
        climate: WaveClimate,
        kernel: Arc<dyn CouplingKernel>,
    ) -> Result<Self> {
        spec.validate()?;
        let weights = climate.annual_weights();
        let betas = climate.betas();
        let nb = betas.len();
        let mut nodes = Vec::with_capacity(climate.omegas().len());
        for (i, &omega) in climate.omegas().iter().enumerate() {
            let coeffs = table.coefficients(omega)?;
            let directions: Vec<Direction> = betas
                .iter()
                .enumerate()
                .filter(|(j, _)| weights[i * nb + j] != 0.0)
                .map(|(j, b)| Direction {
                    cos: b.cos(),
                    sin: b.sin(),
                    weight: weights[i * nb + j],
                })
                .collect();
            if directions.is_empty() {
                continue;
            }
            let mut classes: Vec<DofClass> = Vec::new();
            for d in 0..3 {
                let c = coeffs[d];
                let class = DofClass {
                    multiplicity: 1.0,
                    diagonal: Complex64::new(
                        -omega * omega * (spec.mass + c.added_mass) + spec.pto_stiffness[d],
                        omega * (c.damping + spec.pto_damping[d]),
                    ),
                    coupling: Complex64::new(0.0, omega * c.damping),
                    excitation: c.excitation,
                    power_gain: 0.5 * spec.pto_damping[d] * omega * omega,
                };
                match classes.iter_mut().find(|k| {
                    k.diagonal == class.diagonal
                        && k.coupling == class.coupling
                        && k.excitation == class.excitation
                        && k.power_gain == class.power_gain
                }) {
                    Some(k) => k.multiplicity += 1.0,
                    None => classes.push(class),
                }
            }
            nodes.push(FrequencyNode {
                wavenumber: wavenumber(omega),
                classes,
                directions,
            });
        }
        Ok(Self {
            spec,
            table,
            climate,
            kernel,
            nodes,
        })
    }

    /// Bundled coefficient table, J₀ coupling and a buoy tuned to the climate.
    pub fn with_defaults(climate: WaveClimate) -> Result<Self> {
        let table = HydroTable::default_sphere();
        let spec = BuoySpec::for_climate(&table, &climate)?;
        Self::new(spec, table, climate, Arc::new(BesselJ0))
    }

    /// Same physics with a different coupling kernel.
    pub fn with_kernel(&self, kernel: Arc<dyn CouplingKernel>) -> Self {
        Self {
            kernel,
            ..self.clone()
        }
    }

    pub fn spec(&self) -> &BuoySpec {
        &self.spec
    }

    pub fn table(&self) -> &HydroTable {
        &self.table
    }

    pub fn climate(&self) -> &WaveClimate {
        &self.climate
    }

    pub fn kernel(&self) -> &dyn CouplingKernel {
        self.kernel.as_ref()
    }

    pub fn evaluate(&self, layout: &Layout) -> Result<FarmPower> {
        let pos = layout.positions();
        let n = pos.len();
        let mut per_buoy = vec![0.0; n];
        if n == 0 {
            return Ok(FarmPower { total: 0.0, per_buoy });
        }

        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = distance(pos[i], pos[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }

        let mut kernel = vec![0.0; n * n];
        let mut z = vec![Complex64::default(); n * n];
        let mut pivots = vec![0usize; n];
        let mut rhs = vec![Complex64::default(); n];
        let mut phases: Vec<Vec<Complex64>> = Vec::new();

        for node in &self.nodes {
            let k = node.wavenumber;
            for i in 0..n {
                for j in i + 1..n {
                    let f = self.kernel.factor(k, dist[i * n + j]);
                    kernel[i * n + j] = f;
                    kernel[j * n + i] = f;
                }
            }
            phases.clear();
            phases.extend(node.directions.iter().map(|dir| {
                pos.iter()
                    .map(|p| Complex64::cis(k * (p[0] * dir.cos + p[1] * dir.sin)))
                    .collect()
            }));

            for class in &node.classes {
                for i in 0..n {
                    for j in 0..n {
                        z[i * n + j] = if i == j {
                            class.diagonal
                        } else {
                            class.coupling * kernel[i * n + j]
                        };
                    }
                }
                let omega = (k * super::GRAVITY).sqrt();
                lu_factor(&mut z, n, &mut pivots).ok_or(Error::Solver {
                    omega,
                    condition: f64::INFINITY,
                })?;
                let gain = class.multiplicity * class.power_gain * class.excitation * class.excitation;
                for (dir, phase) in node.directions.iter().zip(&phases) {
                    rhs.copy_from_slice(phase);
                    lu_solve(&z, n, &pivots, &mut rhs);
                    let scale = dir.weight * gain;
                    for (p, u) in per_buoy.iter_mut().zip(&rhs) {
                        *p += scale * u.norm_sqr();
                    }
                }
            }
        }
        let total = per_buoy.iter().sum();
        Ok(FarmPower { total, per_buoy })
    }

    pub fn annual_power(&self, layout: &Layout) -> Result<f64> {
        self.evaluate(layout).map(|p| p.total)
    }

    /// Annual power of one buoy alone at `position`.
    pub fn isolated_power(&self, position: [f64; 2]) -> Result<f64> {
        let single = Layout::new(position[0].abs().max(position[1].abs()).max(1.0), vec![position])?;
        self.annual_power(&single)
    }

    pub fn q_factor(&self, layout: &Layout) -> Result<f64> {
        if layout.is_empty() {
            return Err(Error::InvalidLayout("q-factor of an empty layout".into()));
        }
        let farm = self.annual_power(layout)?;
        self.q_from_total(layout, farm)
    }

    /// q-factor for a farm power already in hand.
    pub fn q_from_total(&self, layout: &Layout, farm_power: f64) -> Result<f64> {
        let isolated = self.isolated_power(layout.positions()[0])?;
        if isolated <= 0.0 {
            return Err(Error::UndefinedQFactor);
        }
        Ok(farm_power / (layout.len() as f64 * isolated))
    }
}

/// In-place LU factorization with partial pivoting of a row-major `n×n`
/// matrix. Returns `None` if a pivot is exactly zero or not finite.
fn lu_factor(a: &mut [Complex64], n: usize, pivots: &mut [usize]) -> Option<()> {
    for col in 0..n {
        let (mut best, mut best_abs) = (col, a[col * n + col].norm_sqr());
        for row in col + 1..n {
            let v = a[row * n + col].norm_sqr();
            if v > best_abs {
                best = row;
                best_abs = v;
            }
        }
        if !(best_abs > 0.0 && best_abs.is_finite()) {
            return None;
        }
        pivots[col] = best;
        if best != col {
            for j in 0..n {
                a.swap(col * n + j, best * n + j);
            }
        }
        let inv = a[col * n + col].inv();
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            a[row * n + col] = factor;
            if factor != Complex64::default() {
                for j in col + 1..n {
                    let u = a[col * n + j];
                    a[row * n + j] -= factor * u;
                }
            }
        }
    }
    Some(())
}

fn lu_solve(lu: &[Complex64], n: usize, pivots: &[usize], b: &mut [Complex64]) {
    for (i, &p) in pivots.iter().enumerate().take(n) {
        if p != i {
            b.swap(i, p);
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= lu[i * n + j] * b[j];
        }
        b[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= lu[i * n + j] * b[j];
        }
        b[i] = s / lu[i * n + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::climate::{Site, SpectrumGrid};
    use crate::hydro::{annual_power_by_buoy, NoCoupling};

    fn small_climate() -> WaveClimate {
        let grid = SpectrumGrid {
            n_omega: 8,
            n_beta: 6,
            ..SpectrumGrid::default()
        };
        WaveClimate::synthetic_on(Site::SydneyLike, &grid)
    }

    #[test]
    fn lu_solves_small_system() {
        let n = 3;
        let a: Vec<Complex64> = [(2.0, 1.0), (1.0, 0.0), (0.0, 0.5), (0.0, 0.0), (1.0, -1.0), (3.0, 0.0), (4.0, 0.0), (0.5, 0.5), (1.0, 0.0)]
            .iter()
            .map(|&(r, i)| Complex64::new(r, i))
            .collect();
        let x = [Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 3.0)];
        let mut b: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect();
        let mut lu = a.clone();
        let mut piv = vec![0; n];
        lu_factor(&mut lu, n, &mut piv).unwrap();
        lu_solve(&lu, n, &piv, &mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn fast_route_matches_dense_reference() {
        let model = FarmModel::with_defaults(small_climate()).unwrap();
        let layout = Layout::new(400.0, vec![[0.0, 0.0], [60.0, 20.0], [130.0, 75.0], [30.0, 140.0]]).unwrap();
        let fast = model.evaluate(&layout).unwrap();
        let slow = annual_power_by_buoy(&layout, model.spec(), model.table(), model.climate(), model.kernel()).unwrap();
        assert!((fast.total - slow.total).abs() <= 1e-9 * slow.total);
        for (a, b) in fast.per_buoy.iter().zip(&slow.per_buoy) {
            assert!((a - b).abs() <= 1e-9 * slow.total);
        }
    }

    #[test]
    fn decoupled_farm_is_n_times_isolated() {
        let model = FarmModel::with_defaults(small_climate()).unwrap().with_kernel(Arc::new(NoCoupling));
        let layout = Layout::new(400.0, vec![[0.0, 0.0], [55.0, 0.0], [0.0, 55.0]]).unwrap();
        let p = model.annual_power(&layout).unwrap();
        let iso = model.isolated_power([0.0, 0.0]).unwrap();
        assert!((p - 3.0 * iso).abs() <= 1e-12 * p);
    }

    #[test]
    fn single_buoy_q_is_exactly_one() {
        let model = FarmModel::with_defaults(small_climate()).unwrap();
        let layout = Layout::new(100.0, vec![[37.0, 81.5]]).unwrap();
        assert_eq!(model.q_factor(&layout).unwrap(), 1.0);
    }

    #[test]
    fn empty_layout_has_zero_power() {
        let model = FarmModel::with_defaults(small_climate()).unwrap();
        assert_eq!(model.annual_power(&Layout::empty_for(4)).unwrap(), 0.0);
    }
}
