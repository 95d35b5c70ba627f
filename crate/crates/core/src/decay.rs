//! Total decay rates of the one-photon eigenstates and the subradiant census.
//!
//! Rates are in units of the isolated-atom rate γ. Atom pairs are coupled
//! through the vacuum by the kernel [`f_kernel`], which for a linear chain
//! depends only on `ka |i - j|` and on `u² = (μ̂·â)²`.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ChainConfig;
use crate::quadrature::GaussLegendre;

/// Below this argument the kernel is evaluated from its Taylor series.
pub const KERNEL_SERIES_THRESHOLD: f64 = 1e-2;
/// A rate counts as sub- or superradiant only beyond this distance from 1.
pub const CLASSIFICATION_TOL: f64 = 1e-9;

pub const QUADRATURE_NODES: usize = 64;
pub const QUADRATURE_AZIMUTH_NODES: usize = 128;
pub const QUADRATURE_TOL: f64 = 1e-7;
pub const QUADRATURE_MAX_PANELS: usize = 512;

pub const DEFAULT_CENSUS_N_MIN: usize = 10;
pub const DEFAULT_CENSUS_N_MAX: usize = 100;

/// Cross-damping kernel
/// `F(x) = 3/2 {(1-u²) sin x/x + (1-3u²)[cos x/x² - sin x/x³]}`, with F(0) = 1.
pub fn f_kernel(x: f64, u: f64) -> f64 {
    if x < KERNEL_SERIES_THRESHOLD {
        return kernel_series(x, u);
    }
    let u2 = u * u;
    let (s, c) = x.sin_cos();
    1.5 * ((1.0 - u2) * s / x + (1.0 - 3.0 * u2) * (c / (x * x) - s / (x * x * x)))
}

/// Fourth-order expansion of [`f_kernel`] about x = 0.
fn kernel_series(x: f64, u: f64) -> f64 {
    let u2 = u * u;
    let x2 = x * x;
    1.0 - (2.0 - u2) * x2 / 10.0 + (3.0 - 2.0 * u2) * x2 * x2 / 280.0
}

/// Kernel values for separations 0, a, 2a, … (N-1)a.
fn kernel_by_distance(cfg: &ChainConfig) -> Vec<f64> {
    (0..cfg.n_atoms())
        .map(|d| f_kernel(cfg.ka() * d as f64, cfg.mu_dot_a()))
        .collect()
}

fn amplitudes(cfg: &ChainConfig, g: usize) -> Vec<f64> {
    (1..=cfg.n_atoms())
        .map(|j| cfg.one_photon_amplitude(g, j))
        .collect()
}

fn rate_with_kernel(cfg: &ChainConfig, kernel: &[f64], g: usize) -> f64 {
    let c = amplitudes(cfg, g);
    let mut cross = 0.0;
    for d in 1..c.len() {
        let overlap: f64 = c.iter().zip(&c[d..]).map(|(a, b)| a * b).sum();
        cross += 2.0 * kernel[d] * overlap;
    }
    1.0 + cross
}

/// Γ_g/γ = 1 + Σ_{i≠j} F(ka|i-j|) c^i_g c^j_g.
pub fn total_decay_rate(cfg: &ChainConfig, g: usize) -> Result<f64> {
    cfg.check_index("g", g)?;
    Ok(rate_with_kernel(cfg, &kernel_by_distance(cfg), g))
}

/// Γ_g/γ by integrating the differential rate
/// `3/(8π) (1 - (k̂·μ̂)²) |Σ_p c^p_g e^{-i k·a p}|²` over the sphere.
///
/// Gauss-Legendre in cos θ on a doubling number of panels, uniform in φ;
/// refinement stops once two successive estimates agree to
/// [`QUADRATURE_TOL`].
pub fn total_decay_rate_quadrature(cfg: &ChainConfig, g: usize) -> Result<f64> {
    cfg.check_index("g", g)?;
    let c = amplitudes(cfg, g);
    let ka = cfg.ka();
    let u = cfg.mu_dot_a();
    let transverse = (1.0 - u * u).sqrt();
    let cos_phi: Vec<f64> = (0..QUADRATURE_AZIMUTH_NODES)
        .map(|i| (2.0 * PI * i as f64 / QUADRATURE_AZIMUTH_NODES as f64).cos())
        .collect();
    let dphi = 2.0 * PI / QUADRATURE_AZIMUTH_NODES as f64;

    let integrand = |x: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (p, cp) in c.iter().enumerate() {
            let (s, co) = (ka * x * (p + 1) as f64).sin_cos();
            re += cp * co;
            im -= cp * s;
        }
        let sin_theta = (1.0 - x * x).max(0.0).sqrt();
        let dipole: f64 = cos_phi
            .iter()
            .map(|cp| {
                let proj = transverse * sin_theta * cp + u * x;
                1.0 - proj * proj
            })
            .sum::<f64>()
            * dphi;
        3.0 / (8.0 * PI) * dipole * (re * re + im * im)
    };

    let rule = GaussLegendre::new(QUADRATURE_NODES);
    let mut panels = 1;
    let mut previous = rule.integrate(-1.0, 1.0, panels, integrand);
    let mut change = f64::INFINITY;
    while panels < QUADRATURE_MAX_PANELS {
        panels *= 2;
        let next = rule.integrate(-1.0, 1.0, panels, integrand);
        change = (next - previous).abs();
        previous = next;
        if change < QUADRATURE_TOL {
            return Ok(next);
        }
    }
    Err(Error::Quadrature {
        estimate: previous,
        change,
        panels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayClass {
    Subradiant,
    Natural,
    Superradiant,
}

impl DecayClass {
    pub fn of(rate: f64) -> Self {
        if rate < 1.0 - CLASSIFICATION_TOL {
            DecayClass::Subradiant
        } else if rate > 1.0 + CLASSIFICATION_TOL {
            DecayClass::Superradiant
        } else {
            DecayClass::Natural
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DecayClass::Subradiant => "subradiant",
            DecayClass::Natural => "natural",
            DecayClass::Superradiant => "superradiant",
        }
    }
}

impl fmt::Display for DecayClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rates Γ_g/γ for g = 1..=N with their classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    pub n_atoms: usize,
    pub ka: f64,
    pub u: f64,
    pub rates: Vec<f64>,
    pub classes: Vec<DecayClass>,
}

impl DecayTable {
    pub fn subradiant_count(&self) -> usize {
        self.classes
            .iter()
            .filter(|c| **c == DecayClass::Subradiant)
            .count()
    }
}

pub fn decay_table(cfg: &ChainConfig) -> DecayTable {
    let kernel = kernel_by_distance(cfg);
    let rates: Vec<f64> = (1..=cfg.n_atoms())
        .map(|g| rate_with_kernel(cfg, &kernel, g))
        .collect();
    let classes = rates.iter().map(|&r| DecayClass::of(r)).collect();
    DecayTable {
        n_atoms: cfg.n_atoms(),
        ka: cfg.ka(),
        u: cfg.mu_dot_a(),
        rates,
        classes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    pub n: usize,
    pub count: usize,
}

/// Subradiant counts over a range of chain lengths and the averaged
/// adjacent-point slope ("subradiant fraction").
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusSeries {
    pub entries: Vec<CensusEntry>,
    pub gradient: f64,
}

/// Count subradiant eigenstates for every N in `n_min..=n_max`, keeping
/// `ka`, `u` and the frequencies of `template`.
pub fn subradiant_census(
    template: &ChainConfig,
    n_min: usize,
    n_max: usize,
) -> Result<CensusSeries> {
    if n_min == 0 {
        return Err(Error::invalid("n-min", "must be at least 1"));
    }
    if n_max < n_min {
        return Err(Error::invalid(
            "n-max",
            format!("must be >= n-min ({n_min}), got {n_max}"),
        ));
    }
    let entries = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let cfg = template.with_n_atoms(n)?;
            Ok(CensusEntry {
                n,
                count: decay_table(&cfg).subradiant_count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gradient = adjacent_slope_average(&entries);
    Ok(CensusSeries { entries, gradient })
}

/// Mean of the slopes of the segments joining neighbouring points. A single
/// point is read as a line through the origin.
fn adjacent_slope_average(entries: &[CensusEntry]) -> f64 {
    if let [only] = entries {
        return only.count as f64 / only.n as f64;
    }
    let slopes: Vec<f64> = entries
        .windows(2)
        .map(|w| (w[1].count as f64 - w[0].count as f64) / (w[1].n - w[0].n) as f64)
        .collect();
    slopes.iter().sum::<f64>() / slopes.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionPoint {
    pub ka: f64,
    pub fraction: f64,
}

/// Subradiant fraction as a function of `ka`.
pub fn fraction_scan(
    template: &ChainConfig,
    ka_grid: &[f64],
    n_min: usize,
    n_max: usize,
) -> Result<Vec<FractionPoint>> {
    ka_grid
        .par_iter()
        .map(|&ka| {
            let cfg = template.with_ka(ka)?;
            Ok(FractionPoint {
                ka,
                fraction: subradiant_census(&cfg, n_min, n_max)?.gradient,
            })
        })
        .collect()
}
