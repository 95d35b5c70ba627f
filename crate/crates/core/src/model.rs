//! Chain parameters and the analytic M-excitation eigensystem.
//!
//! Eigenstates of the nearest-neighbour XY chain are labelled by strictly
//! increasing integers `g_1 < … < g_M` and expand over the computational kets
//! `|k_1, …, k_M⟩` with coefficients given by a determinant of sines
//! `sin(g_a k_b ξ)`, where `ξ = π / (N + 1)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest sector dimension C(N, M) that will be materialized.
pub const MAX_SECTOR_DIM: usize = 1_000_000;

pub const DEFAULT_OMEGA0: f64 = 100.0;
pub const DEFAULT_OMEGA_COUPLING: f64 = 1.0;

/// Geometry and physical parameters of the chain. Frequencies are in units
/// of the single-atom decay rate γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    n_atoms: usize,
    ka: f64,
    mu_dot_a: f64,
    omega0: f64,
    omega_coupling: f64,
}

impl ChainConfig {
    /// Chain of `n_atoms` with wavenumber-spacing product `ka` and dipole
    /// projection `mu_dot_a = μ̂·â`. Frequencies take their defaults.
    pub fn new(n_atoms: usize, ka: f64, mu_dot_a: f64) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::invalid("n", "the chain needs at least one atom"));
        }
        if !(ka.is_finite() && ka >= 0.0) {
            return Err(Error::invalid(
                "ka",
                format!("must be finite and >= 0, got {ka}"),
            ));
        }
        if !(0.0..=1.0).contains(&mu_dot_a) {
            return Err(Error::invalid(
                "u",
                format!("must lie in [0, 1], got {mu_dot_a}"),
            ));
        }
        Ok(Self {
            n_atoms,
            ka,
            mu_dot_a,
            omega0: DEFAULT_OMEGA0,
            omega_coupling: DEFAULT_OMEGA_COUPLING,
        })
    }

    /// Replace the transition frequency and nearest-neighbour coupling.
    pub fn with_frequencies(mut self, omega0: f64, omega_coupling: f64) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::invalid("omega0", "must be finite"));
        }
        if !omega_coupling.is_finite() {
            return Err(Error::invalid("omega-coupling", "must be finite"));
        }
        self.omega0 = omega0;
        self.omega_coupling = omega_coupling;
        Ok(self)
    }

    /// Same chain with a different atom count.
    pub fn with_n_atoms(self, n_atoms: usize) -> Result<Self> {
        Self::new(n_atoms, self.ka, self.mu_dot_a)?
            .with_frequencies(self.omega0, self.omega_coupling)
    }

    /// Same chain with a different `ka`.
    pub fn with_ka(self, ka: f64) -> Result<Self> {
        Self::new(self.n_atoms, ka, self.mu_dot_a)?
            .with_frequencies(self.omega0, self.omega_coupling)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn ka(&self) -> f64 {
        self.ka
    }

    pub fn mu_dot_a(&self) -> f64 {
        self.mu_dot_a
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omega_coupling(&self) -> f64 {
        self.omega_coupling
    }

    /// Spectral spacing ξ = π / (N + 1).
    pub fn xi(&self) -> f64 {
        PI / (self.n_atoms + 1) as f64
    }

    /// Single-excitation amplitude c^j_g = √(2/(N+1)) sin(g j ξ).
    pub fn one_photon_amplitude(&self, g: usize, j: usize) -> f64 {
        (2.0 / (self.n_atoms + 1) as f64).sqrt() * (g as f64 * j as f64 * self.xi()).sin()
    }

    pub(crate) fn check_index(&self, name: &'static str, value: usize) -> Result<()> {
        if value == 0 || value > self.n_atoms {
            return Err(Error::invalid(
                name,
                format!("must lie in [1, {}], got {value}", self.n_atoms),
            ));
        }
        Ok(())
    }
}

fn check_strictly_increasing(name: &'static str, values: &[usize]) -> Result<()> {
    if values.first() == Some(&0) {
        return Err(Error::invalid(name, "indices start at 1"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            name,
            format!("must be strictly increasing, got {values:?}"),
        ));
    }
    Ok(())
}

/// Eigenstate label: sector M = `g.len()` and `1 <= g_1 < … < g_M <= N`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EigenLabel {
    g: Vec<usize>,
}

impl EigenLabel {
    pub fn new(g: Vec<usize>) -> Result<Self> {
        check_strictly_increasing("g", &g)?;
        Ok(Self { g })
    }

    /// The M = 0 ground-state label.
    pub fn ground() -> Self {
        Self { g: Vec::new() }
    }

    pub fn single(g: usize) -> Result<Self> {
        Self::new(vec![g])
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn g(&self) -> &[usize] {
        &self.g
    }

    /// Check that every label entry fits the chain.
    pub fn validate(&self, cfg: &ChainConfig) -> Result<()> {
        match self.g.last() {
            Some(&last) => cfg.check_index("g", last),
            None => Ok(()),
        }
    }
}

impl fmt::Display for EigenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.g.iter().join(","))
    }
}

/// Computational basis state: the indices of the excited atoms in ascending
/// order. The empty ket is the collective ground state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisKet {
    k: Vec<usize>,
}

impl BasisKet {
    pub fn new(k: Vec<usize>) -> Result<Self> {
        check_strictly_increasing("k", &k)?;
        Ok(Self { k })
    }

    pub fn ground() -> Self {
        Self { k: Vec::new() }
    }

    pub fn m(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn validate(&self, cfg: &ChainConfig) -> Result<()> {
        match self.k.last() {
            Some(&last) => cfg.check_index("k", last),
            None => Ok(()),
        }
    }
}

impl fmt::Display for BasisKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.k.iter().join(","))
    }
}

/// Unnormalized coefficient C and its normalized counterpart
/// c = (2/(N+1))^{M/2} C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenAmplitude {
    pub unnormalized: f64,
    pub normalized: f64,
}

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: usize, m: usize) -> Option<usize> {
    if m > n {
        return Some(0);
    }
    let m = m.min(n - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Dimension of the M-excitation sector, refusing anything above
/// [`MAX_SECTOR_DIM`].
pub fn sector_dimension(n: usize, m: usize) -> Result<usize> {
    if m > n {
        return Err(Error::invalid(
            "m",
            format!("must lie in [0, {n}], got {m}"),
        ));
    }
    match binomial(n, m) {
        Some(d) if d <= MAX_SECTOR_DIM => Ok(d),
        _ => Err(Error::SectorTooLarge {
            n,
            m,
            limit: MAX_SECTOR_DIM,
        }),
    }
}

/// All canonical kets of the M-excitation sector in lexicographic order.
pub fn sector_kets(n: usize, m: usize) -> Result<Vec<BasisKet>> {
    sector_dimension(n, m)?;
    Ok((1..=n).combinations(m).map(|k| BasisKet { k }).collect())
}

/// All eigenstate labels of the M-excitation sector in lexicographic order.
pub fn sector_labels(n: usize, m: usize) -> Result<Vec<EigenLabel>> {
    sector_dimension(n, m)?;
    Ok((1..=n).combinations(m).map(|g| EigenLabel { g }).collect())
}

/// Determinant by Gaussian elimination with partial pivoting. `a` is
/// row-major `dim x dim` and is consumed as scratch space.
fn determinant(mut a: Vec<f64>, dim: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&r, &s| a[r * dim + col].abs().total_cmp(&a[s * dim + col].abs()))
            .unwrap_or(col);
        let p = a[pivot * dim + col];
        if p == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..dim {
                a.swap(col * dim + c, pivot * dim + c);
            }
            det = -det;
        }
        det *= p;
        for row in col + 1..dim {
            let factor = a[row * dim + col] / p;
            if factor != 0.0 {
                for c in col..dim {
                    a[row * dim + c] -= factor * a[col * dim + c];
                }
            }
        }
    }
    det
}

/// Unnormalized coefficient for an arbitrary (possibly unsorted or
/// repeated) list of excited-atom indices.
pub fn coefficient_raw(cfg: &ChainConfig, label: &EigenLabel, k: &[usize]) -> Result<f64> {
    label.validate(cfg)?;
    if label.m() != k.len() {
        return Err(Error::SectorMismatch {
            expected: label.m(),
            found: k.len(),
        });
    }
    for &kb in k {
        cfg.check_index("k", kb)?;
    }
    let dim = k.len();
    let xi = cfg.xi();
    let mut s = Vec::with_capacity(dim * dim);
    for &ga in label.g() {
        s.extend(k.iter().map(|&kb| (ga as f64 * kb as f64 * xi).sin()));
    }
    Ok(determinant(s, dim))
}

fn normalization(cfg: &ChainConfig, m: usize) -> f64 {
    (2.0 / (cfg.n_atoms() + 1) as f64).powf(m as f64 / 2.0)
}

/// Coefficient of `ket` in the eigenstate `label`.
pub fn coefficient(
    cfg: &ChainConfig,
    label: &EigenLabel,
    ket: &BasisKet,
) -> Result<EigenAmplitude> {
    let unnormalized = coefficient_raw(cfg, label, ket.k())?;
    Ok(EigenAmplitude {
        unnormalized,
        normalized: normalization(cfg, label.m()) * unnormalized,
    })
}

/// Energy above the collective ground state: M ω0 + 2Ω Σ cos(g_i ξ).
pub fn eigenvalue(cfg: &ChainConfig, label: &EigenLabel) -> Result<f64> {
    label.validate(cfg)?;
    let xi = cfg.xi();
    let hopping: f64 = label.g().iter().map(|&g| (g as f64 * xi).cos()).sum();
    Ok(label.m() as f64 * cfg.omega0() + 2.0 * cfg.omega_coupling() * hopping)
}

/// ⟨ψ(g′)|ψ(g)⟩ for unnormalized states, summed explicitly over every
/// canonical ket of the sector.
pub fn inner_product_unnormalized(
    cfg: &ChainConfig,
    bra: &EigenLabel,
    ket: &EigenLabel,
) -> Result<f64> {
    if bra.m() != ket.m() {
        return Err(Error::SectorMismatch {
            expected: bra.m(),
            found: ket.m(),
        });
    }
    bra.validate(cfg)?;
    ket.validate(cfg)?;
    let mut sum = 0.0;
    for k in sector_kets(cfg.n_atoms(), bra.m())? {
        sum += coefficient_raw(cfg, bra, k.k())? * coefficient_raw(cfg, ket, k.k())?;
    }
    Ok(sum)
}

/// Eigenvalue (+1 symmetric, -1 antisymmetric) of reflection about the
/// chain midpoint, (-1)^{M(M+1)/2 + Σ g_i}.
pub fn reflection_parity(label: &EigenLabel) -> i32 {
    let m = label.m();
    let exponent = m * (m + 1) / 2 + label.g().iter().sum::<usize>();
    if exponent.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Normalized amplitudes of `label` over every canonical ket of its sector.
pub fn expand_state(cfg: &ChainConfig, label: &EigenLabel) -> Result<BTreeMap<BasisKet, f64>> {
    label.validate(cfg)?;
    let norm = normalization(cfg, label.m());
    sector_kets(cfg.n_atoms(), label.m())?
        .into_iter()
        .map(|ket| {
            let c = coefficient_raw(cfg, label, ket.k())?;
            Ok((ket, norm * c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(n: usize) -> ChainConfig {
        ChainConfig::new(n, 0.0, 0.0).unwrap()
    }

    fn label(g: &[usize]) -> EigenLabel {
        EigenLabel::new(g.to_vec()).unwrap()
    }

    #[test]
    fn config_rejects_bad_parameters() {
        assert!(ChainConfig::new(0, 0.0, 0.0).is_err());
        assert!(ChainConfig::new(3, -0.1, 0.0).is_err());
        assert!(ChainConfig::new(3, f64::NAN, 0.0).is_err());
        assert!(ChainConfig::new(3, 1.0, 1.5).is_err());
        assert!(ChainConfig::new(3, 1.0, -0.5).is_err());
        let c = ChainConfig::new(3, 1.0, 1.0).unwrap();
        assert_eq!(c.omega0(), DEFAULT_OMEGA0);
        assert_eq!(c.omega_coupling(), DEFAULT_OMEGA_COUPLING);
        assert_eq!(c.with_n_atoms(9).unwrap().xi(), PI / 10.0);
    }

    #[test]
    fn labels_must_be_strictly_increasing() {
        assert!(EigenLabel::new(vec![2, 1]).is_err());
        assert!(EigenLabel::new(vec![1, 1]).is_err());
        assert!(EigenLabel::new(vec![0, 1]).is_err());
        assert!(BasisKet::new(vec![3, 2]).is_err());
        assert!(label(&[4]).validate(&cfg(3)).is_err());
        assert_eq!(EigenLabel::ground().m(), 0);
    }

    #[test]
    fn single_sine_coefficient() {
        let c = coefficient(&cfg(3), &label(&[1]), &BasisKet::new(vec![2]).unwrap()).unwrap();
        assert!((c.unnormalized - 1.0).abs() < 1e-15);
        assert!((c.normalized - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn repeated_index_coefficient_vanishes() {
        for n in 2..7 {
            for g in sector_labels(n, 2).unwrap() {
                for j in 1..=n {
                    let c = coefficient_raw(&cfg(n), &g, &[j, j]).unwrap();
                    assert!(c.abs() < 1e-14, "N={n} g={g} j={j}: {c}");
                }
            }
        }
    }

    #[test]
    fn two_by_two_determinant() {
        // sin(π/3)sin(4π/3) − sin(2π/3)sin(2π/3) = −3/4 − 3/4
        let c = coefficient(
            &cfg(2),
            &label(&[1, 2]),
            &BasisKet::new(vec![1, 2]).unwrap(),
        )
        .unwrap();
        assert!((c.unnormalized + 1.5).abs() < 1e-14);
        assert!((c.normalized + 1.0).abs() < 1e-14);
    }

    #[test]
    fn coefficient_sector_mismatch() {
        let err =
            coefficient(&cfg(3), &label(&[1]), &BasisKet::new(vec![1, 2]).unwrap()).unwrap_err();
        assert_eq!(
            err,
            Error::SectorMismatch {
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn eigenvalues() {
        let c2 = cfg(2).with_frequencies(7.0, 0.3).unwrap();
        assert_eq!(eigenvalue(&c2, &EigenLabel::ground()).unwrap(), 0.0);
        assert!((eigenvalue(&c2, &label(&[1])).unwrap() - 7.3).abs() < 1e-14);
        assert!((eigenvalue(&c2, &label(&[2])).unwrap() - 6.7).abs() < 1e-14);
        for n in 1..12 {
            let c = cfg(n).with_frequencies(3.5, 1.7).unwrap();
            let all = EigenLabel::new((1..=n).collect()).unwrap();
            let e = eigenvalue(&c, &all).unwrap();
            assert!((e - 3.5 * n as f64).abs() < 1e-12, "N={n}: {e}");
        }
    }

    #[test]
    fn inner_products() {
        let c4 = cfg(4);
        let d = inner_product_unnormalized(&c4, &label(&[2]), &label(&[2])).unwrap();
        assert!((d - 2.5).abs() < 1e-12);
        let o = inner_product_unnormalized(&c4, &label(&[1]), &label(&[3])).unwrap();
        assert!(o.abs() < 1e-12);
        assert!(inner_product_unnormalized(&c4, &label(&[1]), &label(&[1, 2])).is_err());
    }

    #[test]
    fn inner_product_brute_force_n5_m2() {
        // independent double sum of 2x2 sine determinants over the 10 kets
        let xi = PI / 6.0;
        let s = |g: f64, k: f64| (g * k * xi).sin();
        let mut brute = 0.0;
        for k1 in 1..=5 {
            for k2 in k1 + 1..=5 {
                let (a, b) = (k1 as f64, k2 as f64);
                let c = s(1.0, a) * s(2.0, b) - s(2.0, a) * s(1.0, b);
                brute += c * c;
            }
        }
        assert!((brute - 9.0).abs() < 1e-12);
        let ip = inner_product_unnormalized(&cfg(5), &label(&[1, 2]), &label(&[1, 2])).unwrap();
        assert!((ip - brute).abs() < 1e-12);
    }

    #[test]
    fn parity_values() {
        assert_eq!(reflection_parity(&label(&[1])), 1);
        assert_eq!(reflection_parity(&label(&[2])), -1);
        assert_eq!(reflection_parity(&label(&[1, 2])), 1);
        assert_eq!(reflection_parity(&EigenLabel::ground()), 1);
    }

    #[test]
    fn expansions() {
        let h = 0.5f64.sqrt();
        let e = expand_state(&cfg(2), &label(&[1])).unwrap();
        let v: Vec<f64> = e.values().copied().collect();
        assert!((v[0] - h).abs() < 1e-15 && (v[1] - h).abs() < 1e-15);
        let e = expand_state(&cfg(2), &label(&[2])).unwrap();
        let v: Vec<f64> = e.values().copied().collect();
        assert!((v[0] - h).abs() < 1e-15 && (v[1] + h).abs() < 1e-15);
        let e = expand_state(&cfg(2), &label(&[1, 2])).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[&BasisKet::new(vec![1, 2]).unwrap()] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn sector_guard() {
        assert_eq!(sector_dimension(10, 3).unwrap(), 120);
        assert!(matches!(
            sector_dimension(40, 20),
            Err(Error::SectorTooLarge { .. })
        ));
        assert!(matches!(
            expand_state(&cfg(60), &label(&[1, 2, 3, 4, 5])),
            Err(Error::SectorTooLarge { .. })
        ));
        assert_eq!(binomial(200, 100), None);
        assert_eq!(binomial(5, 7), Some(0));
    }

    #[test]
    fn kets_are_lexicographic() {
        let kets: Vec<Vec<usize>> = sector_kets(4, 2)
            .unwrap()
            .iter()
            .map(|k| k.k().to_vec())
            .collect();
        assert_eq!(
            kets,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
    }

    #[test]
    fn normalization_over_sectors() {
        for n in 1..=8 {
            for m in 1..=3.min(n) {
                let c = cfg(n);
                for g in sector_labels(n, m).unwrap() {
                    let s: f64 = expand_state(&c, &g).unwrap().values().map(|a| a * a).sum();
                    assert!((s - 1.0).abs() < 1e-12, "N={n} g={g}: {s}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_over_sectors() {
        for n in 1..=6 {
            for m in 1..=2.min(n) {
                let c = cfg(n);
                let expected = ((n + 1) as f64 / 2.0).powi(m as i32);
                let labels = sector_labels(n, m).unwrap();
                for a in &labels {
                    for b in &labels {
                        let ip = inner_product_unnormalized(&c, a, b).unwrap();
                        let want = if a == b { expected } else { 0.0 };
                        assert!((ip - want).abs() < 1e-10, "N={n} {a} {b}: {ip}");
                    }
                }
            }
        }
    }

    /// Reflect k -> N+1-k and restore canonical order. The M(M-1)/2
    /// transpositions of the reversal are part of the parity sign, so the
    /// mirrored canonical amplitude is the parity times the original.
    #[test]
    fn parity_realized_by_reflection() {
        for n in 1..=6 {
            for m in 1..=3.min(n) {
                let c = cfg(n);
                for g in sector_labels(n, m).unwrap() {
                    let state = expand_state(&c, &g).unwrap();
                    let p = reflection_parity(&g) as f64;
                    for (ket, &amp) in &state {
                        let mut reflected: Vec<usize> =
                            ket.k().iter().map(|&k| n + 1 - k).collect();
                        reflected.reverse();
                        let mirrored = state[&BasisKet::new(reflected).unwrap()];
                        assert!((mirrored - p * amp).abs() < 1e-12, "N={n} g={g} {ket}");
                    }
                }
            }
        }
    }

    #[test]
    fn even_g_amplitudes_sum_to_zero() {
        for n in 2..=30 {
            let c = cfg(n);
            for g in (2..=n).step_by(2) {
                let s: f64 = (1..=n).map(|j| c.one_photon_amplitude(g, j)).sum();
                assert!(s.abs() < 1e-12, "N={n} g={g}: {s}");
            }
        }
    }

    fn label_and_kets() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
        (1usize..=6)
            .prop_flat_map(|n| (Just(n), 1usize..=3.min(n)))
            .prop_flat_map(|(n, m)| {
                (
                    Just(n),
                    proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), m),
                    proptest::collection::vec(1..=n, m),
                )
            })
    }

    proptest! {
        #[test]
        fn swapping_two_kets_negates_coefficient(
            (n, g, k) in label_and_kets(),
            a in 0usize..3,
            b in 0usize..3,
        ) {
            let m = k.len();
            let (a, b) = (a % m, b % m);
            prop_assume!(a != b);
            let c = cfg(n);
            let l = EigenLabel::new(g).unwrap();
            let base = coefficient_raw(&c, &l, &k).unwrap();
            let mut swapped = k.clone();
            swapped.swap(a, b);
            let s = coefficient_raw(&c, &l, &swapped).unwrap();
            prop_assert!((base + s).abs() < 1e-12, "{base} vs {s}");
        }
    }
}
