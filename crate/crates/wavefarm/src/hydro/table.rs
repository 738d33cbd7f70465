use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{Dof, GRAVITY, RHO_WATER};

/// Hydrodynamic coefficients of one degree of freedom at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofCoefficients {
    pub added_mass: f64,
    pub damping: f64,
    pub excitation: f64,
}

/// Single-buoy added mass, radiation damping and excitation magnitude per
/// DOF, tabulated on ascending angular frequencies. Values between nodes are
/// interpolated linearly; frequencies outside the table are refused.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroTable {
    frequencies: Vec<f64>,
    added_mass: [Vec<f64>; 3],
    damping: [Vec<f64>; 3],
    excitation: [Vec<f64>; 3],
}

impl HydroTable {
    pub fn new(
        frequencies: Vec<f64>,
        added_mass: [Vec<f64>; 3],
        damping: [Vec<f64>; 3],
        excitation: [Vec<f64>; 3],
    ) -> Result<Self> {
        let n = frequencies.len();
        if n < 2 {
            return Err(Error::InvalidTable(format!("need at least 2 frequencies, got {n}")));
        }
        if frequencies.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidTable("frequencies must be finite and positive".into()));
        }
        if frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable("frequencies must be strictly increasing".into()));
        }
        for arr in added_mass.iter().chain(&damping).chain(&excitation) {
            if arr.len() != n {
                return Err(Error::InvalidTable(format!(
                    "coefficient column has {} entries for {n} frequencies",
                    arr.len()
                )));
            }
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTable("coefficients must be finite".into()));
            }
        }
        if damping.iter().flatten().any(|b| *b < 0.0) {
            return Err(Error::InvalidTable("radiation damping must be non-negative".into()));
        }
        if excitation.iter().flatten().any(|f| *f < 0.0) {
            return Err(Error::InvalidTable("excitation magnitude must be non-negative".into()));
        }
        Ok(Self {
            frequencies,
            added_mass,
            damping,
            excitation,
        })
    }

    /// Closed-form placeholder coefficients for a submerged sphere of radius
    /// `radius` with its centre `depth` metres below the surface:
    ///
    /// * added mass `(2/3)πρa³`, constant;
    /// * damping `B_peak·x·e^{1−x}` with `x = ka`, peaking at `ka = 1` where
    ///   `B_peak = ½ρV√(g/a)`;
    /// * excitation `ρgV·k·e^{−k·depth}` per metre of wave amplitude.
    ///
    /// Every DOF gets the same coefficients. `k = ω²/g`.
    pub fn sphere_placeholder(radius: f64, depth: f64, frequencies: Vec<f64>) -> Result<Self> {
        let volume = 4.0 / 3.0 * PI * radius.powi(3);
        let added = 2.0 / 3.0 * PI * RHO_WATER * radius.powi(3);
        let b_peak = 0.5 * RHO_WATER * volume * (GRAVITY / radius).sqrt();
        let mut a = Vec::with_capacity(frequencies.len());
        let mut b = Vec::with_capacity(frequencies.len());
        let mut f = Vec::with_capacity(frequencies.len());
        for &w in &frequencies {
            let k = w * w / GRAVITY;
            let x = k * radius;
            a.push(added);
            b.push(b_peak * x * (1.0 - x).exp());
            f.push(RHO_WATER * GRAVITY * volume * k * (-k * depth).exp());
        }
        Self::new(
            frequencies,
            [a.clone(), a.clone(), a],
            [b.clone(), b.clone(), b],
            [f.clone(), f.clone(), f],
        )
    }

    /// The bundled table: 5 m sphere, centre 7 m deep, ω from 0.1 to 3.0 rad/s.
    pub fn default_sphere() -> Self {
        let freqs = (0..=58).map(|i| 0.1 + 0.05 * i as f64).collect();
        Self::sphere_placeholder(5.0, 7.0, freqs).expect("placeholder table is valid")
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn range(&self) -> (f64, f64) {
        (self.frequencies[0], *self.frequencies.last().unwrap())
    }

    /// Linearly interpolated coefficients of every DOF at `omega`.
    pub fn coefficients(&self, omega: f64) -> Result<[DofCoefficients; 3]> {
        let (lo, hi) = self.range();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::ExtrapolationRefused { omega, min: lo, max: hi });
        }
        let i = match self.frequencies.partition_point(|&w| w <= omega) {
            0 => 0,
            p if p >= self.frequencies.len() => self.frequencies.len() - 2,
            p => p - 1,
        };
        let (w0, w1) = (self.frequencies[i], self.frequencies[i + 1]);
        let t = (omega - w0) / (w1 - w0);
        let lerp = |v: &[f64]| v[i] + t * (v[i + 1] - v[i]);
        Ok(std::array::from_fn(|d| DofCoefficients {
            added_mass: lerp(&self.added_mass[d]),
            damping: lerp(&self.damping[d]),
            excitation: lerp(&self.excitation[d]),
        }))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,dof,added_mass,damping,excitation\n");
        for (i, w) in self.frequencies.iter().enumerate() {
            for dof in Dof::ALL {
                let d = dof as usize;
                let _ = writeln!(
                    out,
                    "{w},{},{},{},{}",
                    dof.name(),
                    self.added_mass[d][i],
                    self.damping[d][i],
                    self.excitation[d][i]
                );
            }
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: "<hydro table>".into(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty table".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["omega", "dof", "added_mass", "damping", "excitation"] {
            return Err(err(1, format!("expected header `omega,dof,added_mass,damping,excitation`, found `{header}`")));
        }

        let mut frequencies: Vec<f64> = Vec::new();
        let mut rows: Vec<[Option<DofCoefficients>; 3]> = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(err(lineno, format!("expected 5 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(lineno, format!("`{s}` is not a number")));
            let omega = num(f[0])?;
            let dof: Dof = f[1].parse().map_err(|e: Error| err(lineno, e.to_string()))?;
            let c = DofCoefficients {
                added_mass: num(f[2])?,
                damping: num(f[3])?,
                excitation: num(f[4])?,
            };
            let slot = match frequencies.iter().position(|&w| w == omega) {
                Some(p) => p,
                None => {
                    frequencies.push(omega);
                    rows.push([None; 3]);
                    frequencies.len() - 1
                }
            };
            if rows[slot][dof as usize].replace(c).is_some() {
                return Err(err(lineno, format!("duplicate row for omega={omega}, dof={}", dof.name())));
            }
        }

        let mut order: Vec<usize> = (0..frequencies.len()).collect();
        order.sort_by(|&a, &b| frequencies[a].total_cmp(&frequencies[b]));
        let mut a: [Vec<f64>; 3] = Default::default();
        let mut b: [Vec<f64>; 3] = Default::default();
        let mut x: [Vec<f64>; 3] = Default::default();
        for &i in &order {
            for d in 0..3 {
                let c = rows[i][d].ok_or_else(|| {
                    Error::InvalidTable(format!("omega={} is missing DOF {}", frequencies[i], Dof::ALL[d].name()))
                })?;
                a[d].push(c.added_mass);
                b[d].push(c.damping);
                x[d].push(c.excitation);
            }
        }
        let freqs = order.iter().map(|&i| frequencies[i]).collect();
        Self::new(freqs, a, b, x)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading hydro table {}", path.display()), e))?;
        Self::parse_csv(&text).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            },
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_linear_between_nodes() {
        let t = HydroTable::new(
            vec![1.0, 2.0],
            [vec![10.0, 20.0], vec![0.0, 0.0], vec![1.0, 1.0]],
            [vec![0.0, 4.0], vec![1.0, 1.0], vec![2.0, 0.0]],
            [vec![5.0, 5.0], vec![0.0, 1.0], vec![3.0, 3.0]],
        )
        .unwrap();
        let c = t.coefficients(1.25).unwrap();
        assert!((c[0].added_mass - 12.5).abs() < 1e-12);
        assert!((c[0].damping - 1.0).abs() < 1e-12);
        assert!((c[2].damping - 1.5).abs() < 1e-12);
        assert!((c[1].excitation - 0.25).abs() < 1e-12);
        assert_eq!(t.coefficients(2.0).unwrap()[0].added_mass, 20.0);
    }

    #[test]
    fn extrapolation_refused() {
        let t = HydroTable::default_sphere();
        assert!(matches!(t.coefficients(0.05), Err(Error::ExtrapolationRefused { .. })));
        assert!(matches!(t.coefficients(3.5), Err(Error::ExtrapolationRefused { .. })));
    }

    #[test]
    fn invariants_enforced() {
        let ok = || [vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(HydroTable::new(vec![1.0], [vec![1.0], vec![1.0], vec![1.0]], [vec![1.0], vec![1.0], vec![1.0]], [vec![1.0], vec![1.0], vec![1.0]]).is_err());
        assert!(HydroTable::new(vec![2.0, 1.0], ok(), ok(), ok()).is_err());
        assert!(HydroTable::new(vec![0.0, 1.0], ok(), ok(), ok()).is_err());
        assert!(HydroTable::new(vec![1.0, 2.0], ok(), [vec![1.0, -1.0], vec![1.0, 1.0], vec![1.0, 1.0]], ok()).is_err());
    }

    #[test]
    fn placeholder_damping_peaks_near_unit_ka() {
        let t = HydroTable::default_sphere();
        let radius = 5.0;
        let peak = (GRAVITY / radius).sqrt();
        let at_peak = t.coefficients(peak).unwrap()[2].damping;
        for w in [0.5, 1.0, 1.8, 2.5] {
            assert!(t.coefficients(w).unwrap()[2].damping < at_peak);
        }
        let a = t.coefficients(0.7).unwrap()[0].added_mass;
        assert!((a - 2.0 / 3.0 * PI * RHO_WATER * 125.0).abs() < 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let t = HydroTable::default_sphere();
        let back = HydroTable::parse_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn csv_accepts_numeric_dofs_in_any_order() {
        let text = "omega,dof,added_mass,damping,excitation\n\
                    2.0,2,1,1,1\n2.0,0,1,1,1\n2.0,1,1,1,1\n\
                    1.0,heave,2,2,2\n1.0,surge,2,2,2\n1.0,sway,2,2,2\n";
        let t = HydroTable::parse_csv(text).unwrap();
        assert_eq!(t.frequencies(), &[1.0, 2.0]);
        assert_eq!(t.coefficients(1.0).unwrap()[1].damping, 2.0);
    }

    #[test]
    fn csv_missing_dof_is_error() {
        let text = "omega,dof,added_mass,damping,excitation\n1.0,0,1,1,1\n1.0,1,1,1,1\n2.0,0,1,1,1\n2.0,1,1,1,1\n2.0,2,1,1,1\n";
        assert!(HydroTable::parse_csv(text).is_err());
    }
}
