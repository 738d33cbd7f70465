//! Dense reference route: full `3N×3N` matrices, one solve per (ω, β) node.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::climate::{SeaState, WaveClimate, OCCURRENCE_TOLERANCE};
use crate::error::{Error, Result};
use crate::farm::{distance, Layout};

use super::{wavenumber, BuoySpec, CouplingKernel, HydroTable};

/// Condition estimate above which the impedance matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Matrices of the coupled equation of motion at one frequency and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FarmSystem {
    dofs_per_buoy: usize,
    pub mass: DMatrix<f64>,
    pub added_mass: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    pub pto_stiffness: DMatrix<f64>,
    pub pto_damping: DMatrix<f64>,
    pub excitation: DVector<Complex64>,
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.amax().max(1.0);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * scale))
}

impl FarmSystem {
    pub fn from_parts(
        dofs_per_buoy: usize,
        mass: DMatrix<f64>,
        added_mass: DMatrix<f64>,
        damping: DMatrix<f64>,
        pto_stiffness: DMatrix<f64>,
        pto_damping: DMatrix<f64>,
        excitation: DVector<Complex64>,
    ) -> Result<Self> {
        let n = excitation.len();
        if dofs_per_buoy == 0 || n == 0 || n % dofs_per_buoy != 0 {
            return Err(Error::InvalidLayout(format!(
                "system of dimension {n} cannot hold buoys with {dofs_per_buoy} DOFs"
            )));
        }
        for m in [&mass, &added_mass, &damping, &pto_stiffness, &pto_damping] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidLayout(format!(
                    "matrix is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        for (name, m) in [("B", &damping), ("K_pto", &pto_stiffness), ("D_pto", &pto_damping)] {
            if !is_symmetric(m) {
                return Err(Error::InvalidLayout(format!("{name} is not symmetric")));
            }
        }
        Ok(Self {
            dofs_per_buoy,
            mass,
            added_mass,
            damping,
            pto_stiffness,
            pto_damping,
            excitation,
        })
    }

    pub fn dim(&self) -> usize {
        self.excitation.len()
    }

    pub fn n_buoys(&self) -> usize {
        self.dim() / self.dofs_per_buoy
    }

    pub fn dofs_per_buoy(&self) -> usize {
        self.dofs_per_buoy
    }

    /// `Z(ω) = −ω²(M+A) + iω(B+D_pto) + K_pto`.
    pub fn impedance(&self, omega: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(
                -omega * omega * (self.mass[(i, j)] + self.added_mass[(i, j)]) + self.pto_stiffness[(i, j)],
                omega * (self.damping[(i, j)] + self.pto_damping[(i, j)]),
            )
        })
    }
}

pub fn assemble_farm_system(
    layout: &Layout,
    spec: &BuoySpec,
    table: &HydroTable,
    omega: f64,
    beta: f64,
    kernel: &dyn CouplingKernel,
) -> Result<FarmSystem> {
    if layout.is_empty() {
        return Err(Error::InvalidLayout("layout has no buoys".into()));
    }
    let positions = Layout::new(layout.side(), layout.positions().to_vec())?;
    let coeffs = table.coefficients(omega)?;
    let k = wavenumber(omega);
    let n = positions.len();
    let dim = 3 * n;
    let pos = positions.positions();

    let mass = DMatrix::from_diagonal_element(dim, dim, spec.mass);
    let added_mass = DMatrix::from_fn(dim, dim, |r, c| if r == c { coeffs[r % 3].added_mass } else { 0.0 });
    let damping = DMatrix::from_fn(dim, dim, |r, c| {
        let (bi, di) = (r / 3, r % 3);
        let (bj, dj) = (c / 3, c % 3);
        if di != dj {
            0.0
        } else if bi == bj {
            coeffs[di].damping
        } else {
            coeffs[di].damping * kernel.factor(k, distance(pos[bi], pos[bj]))
        }
    });
    let pto_stiffness = DMatrix::from_fn(dim, dim, |r, c| if r == c { spec.pto_stiffness[r % 3] } else { 0.0 });
    let pto_damping = DMatrix::from_fn(dim, dim, |r, c| if r == c { spec.pto_damping[r % 3] } else { 0.0 });
    let (cb, sb) = (beta.cos(), beta.sin());
    let excitation = DVector::from_fn(dim, |r, _| {
        let p = pos[r / 3];
        Complex64::from_polar(coeffs[r % 3].excitation, k * (p[0] * cb + p[1] * sb))
    });

    FarmSystem::from_parts(3, mass, added_mass, damping, pto_stiffness, pto_damping, excitation)
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Complex displacement amplitudes `X` solving `Z(ω)·X = F_exc`.
pub fn solve_motion(sys: &FarmSystem, omega: f64) -> Result<DVector<Complex64>> {
    let z = sys.impedance(omega);
    let lu = z.clone().lu();
    let singular = Error::Solver {
        omega,
        condition: f64::INFINITY,
    };
    let inverse = lu.try_inverse().ok_or(singular)?;
    let condition = norm1(&z) * norm1(&inverse);
    if !(condition.is_finite() && condition <= MAX_CONDITION) {
        return Err(Error::Solver { omega, condition });
    }
    lu.solve(&sys.excitation).ok_or(Error::Solver { omega, condition })
}

/// Farm power and its split over buoys.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularPower {
    pub total: f64,
    pub per_buoy: Vec<f64>,
}

/// Absorbed power `½·Ẋ*·D_pto·Ẋ` with `Ẋ = iωX`.
pub fn power_regular(sys: &FarmSystem, x: &DVector<Complex64>, omega: f64) -> Result<RegularPower> {
    if x.len() != sys.dim() {
        return Err(Error::InvalidLayout(format!(
            "displacement has {} entries for a {}-DOF system",
            x.len(),
            sys.dim()
        )));
    }
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) || !omega.is_finite() {
        return Err(Error::InvalidLayout("non-finite displacement or frequency".into()));
    }
    let velocity = x.map(|z| Complex64::new(0.0, omega) * z);
    let d = sys.pto_damping.map(|v| Complex64::new(v, 0.0));
    let total = 0.5 * (velocity.adjoint() * &d * &velocity)[(0, 0)].re;

    let m = sys.dofs_per_buoy;
    let per_buoy = (0..sys.n_buoys())
        .map(|b| {
            let r = b * m;
            let v = velocity.rows(r, m);
            let block = d.view((r, r), (m, m));
            0.5 * (v.adjoint() * block * v)[(0, 0)].re
        })
        .collect();
    Ok(RegularPower { total, per_buoy })
}

/// Unit-amplitude power at every buoy for one (ω, β) node.
fn node_power(
    layout: &Layout,
    spec: &BuoySpec,
    table: &HydroTable,
    omega: f64,
    beta: f64,
    kernel: &dyn CouplingKernel,
) -> Result<RegularPower> {
    let sys = assemble_farm_system(layout, spec, table, omega, beta, kernel)?;
    let x = solve_motion(&sys, omega)?;
    power_regular(&sys, &x, omega)
}

fn sea_state_by_buoy(
    layout: &Layout,
    spec: &BuoySpec,
    table: &HydroTable,
    state: &SeaState,
    kernel: &dyn CouplingKernel,
) -> Result<RegularPower> {
    if state.omegas.is_empty() || state.betas.is_empty() || state.density.is_empty() {
        return Err(Error::InvalidClimate("empty spectrum grid".into()));
    }
    let mut acc = RegularPower {
        total: 0.0,
        per_buoy: vec![0.0; layout.len()],
    };
    for (i, &w) in state.omegas.iter().enumerate() {
        for (j, &b) in state.betas.iter().enumerate() {
            let s = state.at(i, j);
            if s == 0.0 {
                continue;
            }
            let weight = s * state.d_omega * state.d_beta;
            let p = node_power(layout, spec, table, w, b, kernel)?;
            acc.total += weight * p.total;
            for (a, q) in acc.per_buoy.iter_mut().zip(&p.per_buoy) {
                *a += weight * q;
            }
        }
    }
    Ok(acc)
}

/// `P = Σ_ω Σ_β S(ω,β)·p(ω,β)·Δω·Δβ` for one sea state.
pub fn power_sea_state(
    layout: &Layout,
    spec: &BuoySpec,
    table: &HydroTable,
    state: &SeaState,
    kernel: &dyn CouplingKernel,
) -> Result<f64> {
    sea_state_by_buoy(layout, spec, table, state, kernel).map(|p| p.total)
}

/// Annual average power split over buoys.
pub fn annual_power_by_buoy(
    layout: &Layout,
    spec: &BuoySpec,
    table: &HydroTable,
    climate: &WaveClimate,
    kernel: &dyn CouplingKernel,
) -> Result<RegularPower> {
    let total_occurrence: f64 = climate.states().iter().map(|(_, o)| o).sum();
    if (total_occurrence - 1.0).abs() > OCCURRENCE_TOLERANCE {
        return Err(Error::InvalidClimate(format!(
            "occurrence probabilities sum to {total_occurrence}"
        )));
    }
    let mut acc = RegularPower {
        total: 0.0,
        per_buoy: vec![0.0; layout.len()],
    };
    for (state, occurrence) in climate.states() {
        let p = sea_state_by_buoy(layout, spec, table, state, kernel)?;
        acc.total += occurrence * p.total;
        for (a, q) in acc.per_buoy.iter_mut().zip(&p.per_buoy) {
            *a += occurrence * q;
        }
    }
    Ok(acc)
}

/// `P_Σ = Σ P(Hs,Tp)·O(Hs,Tp)`.
pub fn annual_power(
    layout: &Layout,
    spec: &BuoySpec,
    table: &HydroTable,
    climate: &WaveClimate,
    kernel: &dyn CouplingKernel,
) -> Result<f64> {
    annual_power_by_buoy(layout, spec, table, climate, kernel).map(|p| p.total)
}

/// Farm power over the summed power of the same buoys in isolation.
pub fn q_factor(
    layout: &Layout,
    spec: &BuoySpec,
    table: &HydroTable,
    climate: &WaveClimate,
    kernel: &dyn CouplingKernel,
) -> Result<f64> {
    let farm = annual_power(layout, spec, table, climate, kernel)?;
    let single = layout.with_positions(vec![layout.positions()[0]]);
    let isolated = annual_power(&single, spec, table, climate, kernel)?;
    if isolated <= 0.0 {
        return Err(Error::UndefinedQFactor);
    }
    Ok(farm / (layout.len() as f64 * isolated))
}
