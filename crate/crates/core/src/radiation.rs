//! One-photon emission structure factor and radiation patterns.
//!
//! Directions enter only through the phase `k·a = ka cos θ`, with θ the
//! polar angle from the chain axis. The azimuth drops out of every pattern.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ChainConfig;

/// Below this distance |cos(k·a) - cos(gξ)| the closed forms switch to the
/// direct amplitude sum.
pub const SINGULARITY_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmissionDirection {
    theta: f64,
    k_dot_a: f64,
}

impl EmissionDirection {
    /// Direction at polar angle `theta` ∈ [0, π] from the chain axis.
    pub fn from_theta(cfg: &ChainConfig, theta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid(
                "theta",
                format!("must lie in [0, π], got {theta}"),
            ));
        }
        Ok(Self {
            theta,
            k_dot_a: cfg.ka() * theta.cos(),
        })
    }

    /// Direction whose inter-atomic phase is `k_dot_a` ∈ [-ka, ka].
    pub fn from_phase(cfg: &ChainConfig, k_dot_a: f64) -> Result<Self> {
        let ka = cfg.ka();
        if !(k_dot_a.abs() <= ka) {
            return Err(Error::invalid(
                "k_dot_a",
                format!("must lie in [-{ka}, {ka}], got {k_dot_a}"),
            ));
        }
        let theta = if ka > 0.0 {
            (k_dot_a / ka).acos()
        } else {
            PI / 2.0
        };
        Ok(Self { theta, k_dot_a })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn k_dot_a(&self) -> f64 {
        self.k_dot_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternSample {
    pub theta: f64,
    pub value: f64,
}

fn check_g(cfg: &ChainConfig, g: usize) -> Result<()> {
    cfg.check_index("g", g)
}

fn near_singular(cfg: &ChainConfig, g: usize, x: f64) -> bool {
    (x.cos() - (g as f64 * cfg.xi()).cos()).abs() < SINGULARITY_EPS
}

fn envelope(cfg: &ChainConfig, g: usize) -> f64 {
    (g as f64 * cfg.xi()).sin().powi(2) / (cfg.n_atoms() + 1) as f64
}

/// |Σ_j c^j_g e^{-i j k·a}|², finite for every direction.
pub fn structure_factor_direct_sum(
    cfg: &ChainConfig,
    g: usize,
    dir: &EmissionDirection,
) -> Result<f64> {
    check_g(cfg, g)?;
    Ok(direct_sum(cfg, g, dir.k_dot_a()))
}

fn direct_sum(cfg: &ChainConfig, g: usize, x: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for j in 1..=cfg.n_atoms() {
        let c = cfg.one_photon_amplitude(g, j);
        let (s, co) = (j as f64 * x).sin_cos();
        re += c * co;
        im -= c * s;
    }
    re * re + im * im
}

/// Closed-form structure factor
/// `[1 - (-1)^g cos((N+1)k·a)] / (cos k·a - cos gξ)² · sin²(gξ)/(N+1)`,
/// falling back to the direct sum next to the removable singularity.
pub fn structure_factor(cfg: &ChainConfig, g: usize, dir: &EmissionDirection) -> Result<f64> {
    check_g(cfg, g)?;
    let x = dir.k_dot_a();
    if near_singular(cfg, g, x) {
        return Ok(direct_sum(cfg, g, x));
    }
    // 1 ∓ cos y written as 2 sin²(y/2) or 2 cos²(y/2) to avoid cancellation.
    let half = 0.5 * (cfg.n_atoms() + 1) as f64 * x;
    let numerator = if g.is_multiple_of(2) {
        2.0 * half.sin().powi(2)
    } else {
        2.0 * half.cos().powi(2)
    };
    let denominator = (x.cos() - (g as f64 * cfg.xi()).cos()).powi(2);
    Ok(numerator / denominator * envelope(cfg, g))
}

/// N-slit diffraction form of the structure factor,
/// `sin²[(N+1)(k·a - gξ)/2] / (2 sin²[(k·a + gξ)/2] sin²[(k·a - gξ)/2]) · sin²(gξ)/(N+1)`.
pub fn structure_factor_diffraction_form(
    cfg: &ChainConfig,
    g: usize,
    dir: &EmissionDirection,
) -> Result<f64> {
    check_g(cfg, g)?;
    let x = dir.k_dot_a();
    if near_singular(cfg, g, x) {
        return Ok(direct_sum(cfg, g, x));
    }
    let gx = g as f64 * cfg.xi();
    let slits = (0.5 * (cfg.n_atoms() + 1) as f64 * (x - gx)).sin().powi(2);
    let plus = (0.5 * (x + gx)).sin().powi(2);
    let minus = (0.5 * (x - gx)).sin().powi(2);
    Ok(slits / (2.0 * plus * minus) * envelope(cfg, g))
}

/// `k·a → 0` limit: `(1 - (-1)^g)/(N+1) · cot²(gξ/2)`, zero for even g.
pub fn structure_factor_small_sample(cfg: &ChainConfig, g: usize) -> Result<f64> {
    check_g(cfg, g)?;
    if g.is_multiple_of(2) {
        return Ok(0.0);
    }
    let cot = 1.0 / (0.5 * g as f64 * cfg.xi()).tan();
    Ok(2.0 / (cfg.n_atoms() + 1) as f64 * cot * cot)
}

/// Large-N asymptote `8(N+1)/π²` of the g = 1 small-sample value.
pub fn structure_factor_max_large_n(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "the chain needs at least one atom"));
    }
    Ok(8.0 * (n + 1) as f64 / (PI * PI))
}

/// Structure-factor part of the `|j⟩ → |0⟩` pattern, Σ_g (c^j_g)² f(k, g, N).
pub fn single_atom_pattern(cfg: &ChainConfig, j: usize, dir: &EmissionDirection) -> Result<f64> {
    cfg.check_index("j", j)?;
    (1..=cfg.n_atoms())
        .map(|g| Ok(cfg.one_photon_amplitude(g, j).powi(2) * structure_factor(cfg, g, dir)?))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternSource {
    /// One-photon eigenstate g.
    Eigen(usize),
    /// Single excited atom j.
    Atom(usize),
}

/// Emission angles θ sampled in [0, π].
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    thetas: Vec<f64>,
}

impl AngularGrid {
    /// `points` evenly spaced angles including both poles.
    pub fn uniform(points: usize) -> Result<Self> {
        match points {
            0 => Err(Error::invalid("points", "need at least one grid point")),
            1 => Ok(Self { thetas: vec![0.0] }),
            _ => {
                let step = PI / (points - 1) as f64;
                let mut thetas: Vec<f64> = (0..points).map(|i| i as f64 * step).collect();
                thetas[points - 1] = PI;
                Ok(Self { thetas })
            }
        }
    }

    pub fn from_thetas(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::invalid("points", "need at least one grid point"));
        }
        if let Some(bad) = thetas.iter().find(|t| !(0.0..=PI).contains(*t)) {
            return Err(Error::invalid(
                "theta",
                format!("must lie in [0, π], got {bad}"),
            ));
        }
        Ok(Self { thetas })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
}

/// sin² of the angle between k̂ and μ̂, with k̂ in the plane spanned by the
/// chain axis and the dipole.
pub fn dipole_weight(cfg: &ChainConfig, theta: f64) -> f64 {
    let u = cfg.mu_dot_a();
    let along = u * theta.cos() + (1.0 - u * u).sqrt() * theta.sin();
    1.0 - along * along
}

/// Sample the chosen pattern over `grid`, optionally multiplied by the
/// single-dipole factor [`dipole_weight`].
pub fn pattern_scan(
    cfg: &ChainConfig,
    source: PatternSource,
    grid: &AngularGrid,
    with_dipole_weight: bool,
) -> Result<Vec<PatternSample>> {
    match source {
        PatternSource::Eigen(g) => check_g(cfg, g)?,
        PatternSource::Atom(j) => cfg.check_index("j", j)?,
    }
    grid.thetas()
        .par_iter()
        .map(|&theta| {
            let dir = EmissionDirection::from_theta(cfg, theta)?;
            let mut value = match source {
                PatternSource::Eigen(g) => structure_factor(cfg, g, &dir)?,
                PatternSource::Atom(j) => single_atom_pattern(cfg, j, &dir)?,
            };
            if with_dipole_weight {
                value *= dipole_weight(cfg, theta);
            }
            Ok(PatternSample { theta, value })
        })
        .collect()
}
