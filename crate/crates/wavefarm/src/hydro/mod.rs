//! Frequency-domain power model of a farm of submerged point absorbers.
//!
//! Each buoy moves in surge, sway and heave. The coupled equation of motion
//! `[−ω²(M+A) + iω(B+D_pto) + K_pto]·X = F_exc` is solved per wave frequency
//! and direction, the absorbed power `½·Ẋ*·D_pto·Ẋ` is integrated against the
//! directional spectrum of every sea state, and sea states are weighted by
//! their probability of occurrence.
//!
//! Two routes compute the same numbers:
//!
//! * [`system`] builds the full `3N×3N` matrices and solves them densely; it is
//!   the reference and mirrors the physics one step at a time.
//! * [`FarmModel`] exploits the structure (coupling only between like DOFs,
//!   an impedance matrix that does not depend on direction) to factor one
//!   `N×N` matrix per frequency and DOF class. Optimizers use this route.

mod model;
pub mod system;
mod table;

use std::fmt::Debug;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::climate::WaveClimate;
use crate::error::{Error, Result};

pub use model::{FarmModel, FarmPower};
pub use system::{
    annual_power, annual_power_by_buoy, assemble_farm_system, power_regular, power_sea_state, q_factor, solve_motion,
    FarmSystem, RegularPower,
};
pub use table::{DofCoefficients, HydroTable};

pub const RHO_WATER: f64 = 1025.0;
pub const GRAVITY: f64 = 9.81;

/// Deep-water wavenumber `ω²/g`.
pub fn wavenumber(omega: f64) -> f64 {
    omega * omega / GRAVITY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dof {
    Surge = 0,
    Sway = 1,
    Heave = 2,
}

impl Dof {
    pub const ALL: [Dof; 3] = [Dof::Surge, Dof::Sway, Dof::Heave];

    pub fn name(self) -> &'static str {
        match self {
            Dof::Surge => "surge",
            Dof::Sway => "sway",
            Dof::Heave => "heave",
        }
    }
}

impl FromStr for Dof {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "surge" => Ok(Dof::Surge),
            "1" | "sway" => Ok(Dof::Sway),
            "2" | "heave" => Ok(Dof::Heave),
            other => Err(Error::InvalidTable(format!("unknown DOF `{other}`"))),
        }
    }
}

/// Interaction factor between two buoys as a function of wavenumber and
/// separation. Off-diagonal radiation damping is `B_ij = B_ii(ω)·factor`.
pub trait CouplingKernel: Debug + Send + Sync {
    fn factor(&self, wavenumber: f64, distance: f64) -> f64;
}

/// Point-absorber cylindrical-wave kernel `J₀(k·d)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BesselJ0;

impl CouplingKernel for BesselJ0 {
    fn factor(&self, wavenumber: f64, distance: f64) -> f64 {
        libm::j0(wavenumber * distance)
    }
}

/// No hydrodynamic interaction: every buoy behaves as if isolated.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCoupling;

impl CouplingKernel for NoCoupling {
    fn factor(&self, _wavenumber: f64, _distance: f64) -> f64 {
        0.0
    }
}

/// Physical and power take-off parameters shared by every buoy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuoySpec {
    pub radius: f64,
    pub mass: f64,
    pub submergence_depth: f64,
    /// PTO stiffness per DOF (surge, sway, heave), N/m.
    pub pto_stiffness: [f64; 3],
    /// PTO damping per DOF, kg/s.
    pub pto_damping: [f64; 3],
}

impl BuoySpec {
    pub const DEFAULT_RADIUS: f64 = 5.0;
    pub const DEFAULT_DEPTH: f64 = 7.0;

    pub fn default_mass(radius: f64) -> f64 {
        0.7 * RHO_WATER * 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidBuoy(format!("radius {} must be positive", self.radius)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidBuoy(format!("mass {} must be positive", self.mass)));
        }
        if self.pto_damping.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidBuoy("PTO damping must be non-negative".into()));
        }
        if self.pto_stiffness.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidBuoy("PTO stiffness must be finite".into()));
        }
        Ok(())
    }

    /// PTO tuned for an isolated buoy at `omega`: stiffness puts the
    /// resonance at `omega` and damping matches the radiation damping there.
    pub fn tuned(radius: f64, mass: f64, depth: f64, table: &HydroTable, omega: f64) -> Result<Self> {
        let c = table.coefficients(omega)?;
        let spec = Self {
            radius,
            mass,
            submergence_depth: depth,
            pto_stiffness: std::array::from_fn(|d| omega * omega * (mass + c[d].added_mass)),
            pto_damping: std::array::from_fn(|d| c[d].damping),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Default 5 m buoy tuned to the climate's modal frequency.
    pub fn for_climate(table: &HydroTable, climate: &WaveClimate) -> Result<Self> {
        let r = Self::DEFAULT_RADIUS;
        Self::tuned(r, Self::default_mass(r), Self::DEFAULT_DEPTH, table, climate.modal_frequency())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_first_zero() {
        // first root of J0
        let z = 2.404_825_557_695_773;
        assert!(BesselJ0.factor(1.0, z).abs() < 1e-15);
        assert_eq!(BesselJ0.factor(0.3, 0.0), 1.0);
        assert!(BesselJ0.factor(1.0, 1e6).abs() < 1e-3);
    }

    #[test]
    fn tuned_spec_is_valid() {
        let t = HydroTable::default_sphere();
        let s = BuoySpec::tuned(5.0, 3e5, 7.0, &t, 0.6).unwrap();
        let c = t.coefficients(0.6).unwrap();
        assert!((s.pto_stiffness[2] - 0.36 * (3e5 + c[2].added_mass)).abs() < 1e-6);
        assert_eq!(s.pto_damping[0], c[0].damping);
    }

    #[test]
    fn spec_rejects_bad_values() {
        let t = HydroTable::default_sphere();
        let mut s = BuoySpec::tuned(5.0, 3e5, 7.0, &t, 0.6).unwrap();
        s.pto_damping[1] = -1.0;
        assert!(s.validate().is_err());
        s.pto_damping[1] = 1.0;
        s.mass = 0.0;
        assert!(s.validate().is_err());
    }
}
