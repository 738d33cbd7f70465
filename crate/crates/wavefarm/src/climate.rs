//! Wave climates: directional spectra and sea-state occurrence tables.
//!
//! Frequency spectra use the Bretschneider shape
//! `S_f(ω) = (5/16)·Hs²·ωp⁴/ω⁵·exp(−(5/4)(ωp/ω)⁴)` with `ωp = 2π/Tp`, and the
//! directional spreading is `D(β) ∝ cos^{2s}((β − β₀)/2)`, normalized on the
//! discrete direction grid. Each frequency node carries the exact integral of
//! `S_f` over its bin divided by the bin width, so `Σ S_f·Δω` equals the
//! closed-form spectral variance over the covered band.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of occurrence probabilities.
pub const OCCURRENCE_TOLERANCE: f64 = 1e-6;

/// Discretization of the (ω, β) plane shared by every sea state of a climate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    pub n_beta: usize,
}

impl Default for SpectrumGrid {
    fn default() -> Self {
        Self {
            omega_min: 0.3,
            omega_max: 2.0,
            n_omega: 20,
            n_beta: 12,
        }
    }
}

impl SpectrumGrid {
    fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_max > self.omega_min)
            || self.n_omega == 0
            || self.n_beta == 0
        {
            return Err(Error::InvalidClimate(format!("degenerate spectrum grid {self:?}")));
        }
        Ok(())
    }

    pub fn d_omega(&self) -> f64 {
        (self.omega_max - self.omega_min) / self.n_omega as f64
    }

    pub fn d_beta(&self) -> f64 {
        TAU / self.n_beta as f64
    }

    /// Bin-centre frequencies.
    pub fn omegas(&self) -> Vec<f64> {
        let dw = self.d_omega();
        (0..self.n_omega)
            .map(|i| self.omega_min + (i as f64 + 0.5) * dw)
            .collect()
    }

    /// Directions `k·Δβ` on `[0, 2π)`.
    pub fn betas(&self) -> Vec<f64> {
        let db = self.d_beta();
        (0..self.n_beta).map(|k| k as f64 * db).collect()
    }
}

/// One sea state and its discretized directional spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaState {
    pub hs: f64,
    pub tp: f64,
    pub beta0: f64,
    pub spread: f64,
    pub omegas: Vec<f64>,
    pub betas: Vec<f64>,
    pub d_omega: f64,
    pub d_beta: f64,
    /// Row-major `S[iω·n_β + iβ]`.
    pub density: Vec<f64>,
}

impl SeaState {
    pub fn at(&self, i_omega: usize, i_beta: usize) -> f64 {
        self.density[i_omega * self.betas.len() + i_beta]
    }

    /// A state with an explicit density table. Used to build synthetic
    /// spectra (single-bin or hand-made) that are not Bretschneider-shaped.
    pub fn from_density(
        omegas: Vec<f64>,
        betas: Vec<f64>,
        d_omega: f64,
        d_beta: f64,
        density: Vec<f64>,
    ) -> Result<Self> {
        if omegas.is_empty() || betas.is_empty() {
            return Err(Error::InvalidClimate("empty spectrum grid".into()));
        }
        if density.len() != omegas.len() * betas.len() {
            return Err(Error::InvalidClimate(format!(
                "density has {} entries for a {}x{} grid",
                density.len(),
                omegas.len(),
                betas.len()
            )));
        }
        if density.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidClimate("spectral density must be finite and non-negative".into()));
        }
        Ok(Self {
            hs: f64::NAN,
            tp: f64::NAN,
            beta0: 0.0,
            spread: 0.0,
            omegas,
            betas,
            d_omega,
            d_beta,
            density,
        })
    }

    /// `Σ S_f(ω)·Δω`, the discretized spectral variance.
    pub fn variance(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.d_omega * self.d_beta
    }

    fn same_grid(&self, other: &SeaState) -> bool {
        self.omegas == other.omegas
            && self.betas == other.betas
            && self.d_omega == other.d_omega
            && self.d_beta == other.d_beta
    }
}

/// Wraps an angle difference into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

/// Unnormalized spreading kernel `cos^{2s}((β − β₀)/2)`.
pub fn spreading_kernel(beta: f64, beta0: f64, s: f64) -> f64 {
    (wrap_angle(beta - beta0) / 2.0).cos().max(0.0).powf(2.0 * s)
}

/// Closed-form cumulative Bretschneider variance `∫₀^ω S_f`.
fn bretschneider_cdf(omega: f64, hs: f64, omega_p: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    hs * hs / 16.0 * (-1.25 * (omega_p / omega).powi(4)).exp()
}

/// Bretschneider point density, exposed for quadrature checks.
pub fn bretschneider(omega: f64, hs: f64, tp: f64) -> f64 {
    let wp = TAU / tp;
    5.0 / 16.0 * hs * hs * wp.powi(4) / omega.powi(5) * (-1.25 * (wp / omega).powi(4)).exp()
}

pub fn build_spectrum(hs: f64, tp: f64, beta0: f64, spread: f64, grid: &SpectrumGrid) -> Result<SeaState> {
    grid.validate()?;
    if !(hs.is_finite() && hs > 0.0) || !(tp.is_finite() && tp > 0.0) {
        return Err(Error::InvalidClimate(format!("sea state needs Hs > 0 and Tp > 0, got Hs={hs}, Tp={tp}")));
    }
    if !(spread.is_finite() && spread >= 0.0) || !beta0.is_finite() {
        return Err(Error::InvalidClimate(format!("invalid direction/spreading β₀={beta0}, s={spread}")));
    }
    let omega_p = TAU / tp;
    let dw = grid.d_omega();
    let db = grid.d_beta();
    let omegas = grid.omegas();
    let betas = grid.betas();

    let freq: Vec<f64> = (0..grid.n_omega)
        .map(|i| {
            let lo = grid.omega_min + i as f64 * dw;
            (bretschneider_cdf(lo + dw, hs, omega_p) - bretschneider_cdf(lo, hs, omega_p)) / dw
        })
        .collect();

    let raw: Vec<f64> = betas.iter().map(|&b| spreading_kernel(b, beta0, spread)).collect();
    let norm = raw.iter().sum::<f64>() * db;
    let dir: Vec<f64> = raw.iter().map(|d| d / norm).collect();

    let density = freq
        .iter()
        .flat_map(|sf| dir.iter().map(move |d| sf * d))
        .collect();

    Ok(SeaState {
        hs,
        tp,
        beta0,
        spread,
        omegas,
        betas,
        d_omega: dw,
        d_beta: db,
        density,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    /// Narrow directional sector, single prevailing direction.
    PerthLike,
    /// Broad spreading mixed from three prevailing directions.
    SydneyLike,
}

impl std::str::FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perth_like" => Ok(Site::PerthLike),
            "sydney_like" => Ok(Site::SydneyLike),
            other => Err(Error::InvalidClimate(format!("unknown synthetic site `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveClimate {
    states: Vec<(SeaState, f64)>,
    dominant_direction: f64,
    spreading: f64,
}

impl WaveClimate {
    pub fn new(states: Vec<(SeaState, f64)>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidClimate("climate has no sea states".into()));
        }
        if let Some((_, o)) = states.iter().find(|(_, o)| !(o.is_finite() && *o >= 0.0)) {
            return Err(Error::InvalidClimate(format!("occurrence {o} is negative or not finite")));
        }
        let total: f64 = states.iter().map(|(_, o)| o).sum();
        if (total - 1.0).abs() > OCCURRENCE_TOLERANCE {
            return Err(Error::InvalidClimate(format!(
                "occurrence probabilities sum to {total}, off by {:+.6} from 1",
                total - 1.0
            )));
        }
        let first = &states[0].0;
        if states.iter().any(|(s, _)| !s.same_grid(first)) {
            return Err(Error::InvalidClimate("sea states use different spectrum grids".into()));
        }
        if first.omegas.is_empty() || first.betas.is_empty() {
            return Err(Error::InvalidClimate("empty spectrum grid".into()));
        }

        // Probability-weighted modal direction.
        let mut by_dir: Vec<(f64, f64, f64)> = Vec::new();
        for (s, o) in &states {
            match by_dir.iter_mut().find(|(b, _, _)| *b == s.beta0) {
                Some(entry) => entry.1 += o,
                None => by_dir.push((s.beta0, *o, s.spread)),
            }
        }
        let (dominant_direction, _, spreading) = by_dir
            .iter()
            .copied()
            .fold((0.0, f64::NEG_INFINITY, 0.0), |acc, e| if e.1 > acc.1 { e } else { acc });

        Ok(Self {
            states,
            dominant_direction,
            spreading,
        })
    }

    pub fn synthetic(site: Site) -> Self {
        Self::synthetic_on(site, &SpectrumGrid::default())
    }

    pub fn synthetic_on(site: Site, grid: &SpectrumGrid) -> Self {
        let rows: Vec<(f64, f64, f64, f64, f64)> = match site {
            Site::PerthLike => {
                let table = [
                    (1.5, 12.0, 0.25),
                    (1.5, 14.0, 0.10),
                    (2.5, 12.0, 0.25),
                    (2.5, 14.0, 0.20),
                    (3.5, 12.0, 0.08),
                    (3.5, 14.0, 0.12),
                ];
                table.iter().map(|&(hs, tp, o)| (hs, tp, 0.0, 25.0, o)).collect()
            }
            Site::SydneyLike => {
                let table = [(1.5, 11.0, 0.3), (1.5, 13.0, 0.2), (2.5, 11.0, 0.3), (2.5, 13.0, 0.2)];
                let directions = [(-PI / 3.0, 0.30), (0.0, 0.45), (PI / 4.0, 0.25)];
                table
                    .iter()
                    .flat_map(|&(hs, tp, o)| {
                        directions.iter().map(move |&(b, w)| (hs, tp, b.rem_euclid(TAU), 2.0, o * w))
                    })
                    .collect()
            }
        };
        let states = rows
            .into_iter()
            .map(|(hs, tp, b, s, o)| (build_spectrum(hs, tp, b, s, grid).expect("synthetic state"), o))
            .collect();
        Self::new(states).expect("synthetic climate is valid")
    }

    pub fn states(&self) -> &[(SeaState, f64)] {
        &self.states
    }

    pub fn dominant_direction(&self) -> f64 {
        self.dominant_direction
    }

    pub fn spreading(&self) -> f64 {
        self.spreading
    }

    pub fn omegas(&self) -> &[f64] {
        &self.states[0].0.omegas
    }

    pub fn betas(&self) -> &[f64] {
        &self.states[0].0.betas
    }

    /// Quadrature weights `Σ_states O·S(ω,β)·Δω·Δβ`, row-major like
    /// [`SeaState::density`]. Annual power is `Σ W(ω,β)·p(ω,β)`.
    pub fn annual_weights(&self) -> Vec<f64> {
        let first = &self.states[0].0;
        let mut w = vec![0.0; first.density.len()];
        for (s, o) in &self.states {
            let scale = o * s.d_omega * s.d_beta;
            for (wi, si) in w.iter_mut().zip(&s.density) {
                *wi += scale * si;
            }
        }
        w
    }

    /// Frequency carrying the most occurrence-weighted spectral energy.
    pub fn modal_frequency(&self) -> f64 {
        let w = self.annual_weights();
        let nb = self.betas().len();
        let (i, _) = self
            .omegas()
            .iter()
            .enumerate()
            .map(|(i, _)| (i, w[i * nb..(i + 1) * nb].iter().sum::<f64>()))
            .fold((0, f64::NEG_INFINITY), |acc, e| if e.1 > acc.1 { e } else { acc });
        self.omegas()[i]
    }

    /// Circular standard deviation (rad) of the climate's direction distribution.
    pub fn directional_std(&self) -> f64 {
        let w = self.annual_weights();
        let nb = self.betas().len();
        let (mut c, mut s, mut total) = (0.0, 0.0, 0.0);
        for (k, &b) in self.betas().iter().enumerate() {
            let mass: f64 = w.iter().skip(k).step_by(nb).sum();
            c += mass * b.cos();
            s += mass * b.sin();
            total += mass;
        }
        let r = (c * c + s * s).sqrt() / total;
        (-2.0 * r.ln()).sqrt()
    }

    /// Rows in the `hs,tp,beta0,spread,occurrence` format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hs,tp,beta0,spread,occurrence\n");
        for (s, o) in &self.states {
            let _ = writeln!(out, "{},{},{},{},{}", s.hs, s.tp, s.beta0, s.spread, o);
        }
        out
    }
}

pub fn load_climate_csv(path: &Path) -> Result<WaveClimate> {
    load_climate_csv_on(path, &SpectrumGrid::default())
}

pub fn load_climate_csv_on(path: &Path, grid: &SpectrumGrid) -> Result<WaveClimate> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading climate {}", path.display()), e))?;
    parse_climate_csv(&text, grid).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    })
}

pub fn parse_climate_csv(text: &str, grid: &SpectrumGrid) -> Result<WaveClimate> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: "<climate>".into(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty climate file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns != ["hs", "tp", "beta0", "spread", "occurrence"] {
        return Err(parse_err(1, format!("expected header `hs,tp,beta0,spread,occurrence`, found `{header}`")));
    }
    let mut states = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(parse_err(lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let mut v = [0.0; 5];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse()
                .map_err(|_| parse_err(lineno, format!("`{f}` is not a number")))?;
        }
        let state = build_spectrum(v[0], v[1], v[2], v[3], grid).map_err(|e| parse_err(lineno, e.to_string()))?;
        states.push((state, v[4]));
    }
    WaveClimate::new(states)
}
