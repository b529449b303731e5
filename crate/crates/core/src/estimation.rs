//! Simulated single-qubit tomography and uniform coin sampling.
//!
//! Basis conventions: `σz` eigenstates are `|H⟩` (+) and `|V⟩` (−), the
//! `σx` (+) state is the coin `1` and the `σy` (+) state is the coin `−i`,
//! so a density matrix has Bloch vector `(2 Re ρ₀₁, −2 Im ρ₀₁, ρ₀₀ − ρ₁₁)`.
//!
//! Randomness comes from ChaCha8 with one stream per `(trial, basis)`, so
//! a trial's counts do not depend on which other trials run or in what
//! order.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::coin::Coin;
use crate::density::DensityMatrix2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliBasis {
    X,
    Y,
    Z,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z];

    pub fn index(self) -> usize {
        match self {
            PauliBasis::X => 0,
            PauliBasis::Y => 1,
            PauliBasis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PauliBasis::X => "X",
            PauliBasis::Y => "Y",
            PauliBasis::Z => "Z",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimationError {
    #[error("count record has no {0} basis")]
    MissingBasis(&'static str),
    #[error("basis {0} has no counts")]
    EmptyBasis(&'static str),
    #[error("sample size must be at least 1")]
    ZeroSamples,
}

/// Outcome counts `(n₊, n₋)` per basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountRecord {
    pub counts: [Option<[u64; 2]>; 3],
    pub shots: u64,
}

impl CountRecord {
    pub fn get(&self, basis: PauliBasis) -> Option<[u64; 2]> {
        self.counts[basis.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, n: usize) -> Result<Self, EstimationError> {
        if n == 0 {
            return Err(EstimationError::ZeroSamples);
        }
        Ok(SamplerConfig { seed, n })
    }
}

/// `(p₊, p₋) = ((1 ± rᵢ)/2)` for Bloch component `rᵢ`.
pub fn measurement_probs(rho: &DensityMatrix2, basis: PauliBasis) -> (f64, f64) {
    let r = rho.bloch_vector()[basis.index()].clamp(-1.0, 1.0);
    ((1.0 + r) / 2.0, (1.0 - r) / 2.0)
}

/// Binomial counts for all three bases, trial 0.
pub fn sample_counts(rho: &DensityMatrix2, shots: u64, seed: u64) -> CountRecord {
    sample_counts_trial(rho, shots, seed, 0)
}

/// Binomial counts for one trial; basis `b` of trial `t` uses stream
/// `3t + b` of the seeded generator.
pub fn sample_counts_trial(rho: &DensityMatrix2, shots: u64, seed: u64, trial: u64) -> CountRecord {
    let mut record = CountRecord {
        counts: [None; 3],
        shots,
    };
    for basis in PauliBasis::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(3 * trial + basis.index() as u64);
        let (p, _) = measurement_probs(rho, basis);
        let plus = Binomial::new(shots, p)
            .expect("p is clamped to [0, 1]")
            .sample(&mut rng);
        record.counts[basis.index()] = Some([plus, shots - plus]);
    }
    record
}

/// Linear inversion from measured frequencies, then projection onto the
/// physical states.
pub fn reconstruct(counts: &CountRecord) -> Result<DensityMatrix2, EstimationError> {
    let mut r = [0.0; 3];
    for basis in PauliBasis::ALL {
        let [plus, minus] = counts
            .get(basis)
            .ok_or(EstimationError::MissingBasis(basis.name()))?;
        let total = plus + minus;
        if total == 0 {
            return Err(EstimationError::EmptyBasis(basis.name()));
        }
        r[basis.index()] = (plus as f64 - minus as f64) / total as f64;
    }
    Ok(physical_from_bloch(r))
}

/// Infinite-statistics reconstruction from `(p₊, p₋)` per basis.
pub fn reconstruct_from_probabilities(probs: &[(f64, f64); 3]) -> DensityMatrix2 {
    physical_from_bloch(probs.map(|(p, m)| p - m))
}

/// Nearest physical state to `(I + r·σ)/2`. For a qubit, clipping the
/// negative eigenvalue and renormalizing just rescales `r` onto the
/// sphere when `|r| > 1`.
pub fn physical_from_bloch(r: [f64; 3]) -> DensityMatrix2 {
    let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if len > 1.0 {
        DensityMatrix2::from_bloch_unchecked(r.map(|x| x / len))
    } else {
        DensityMatrix2::from_bloch_unchecked(r)
    }
}

/// `(√(1+h) e^{−iφ}, √(1−h))`, i.e. `z = √((1+h)/(1−h)) e^{−iφ}`; `h = 1`
/// is the pole.
pub fn haar_coin(h: f64, phi: f64) -> Coin {
    let a = Complex64::from_polar((1.0 + h).max(0.0).sqrt(), -phi);
    let b = Complex64::new((1.0 - h).max(0.0).sqrt(), 0.0);
    Coin::new(a, b).expect("h in [-1, 1] gives a nonzero pair")
}

/// `n` coins uniform on the Bloch sphere: `h` uniform on `(−1, 1]`, `φ`
/// uniform on `[0, 2π)`.
pub fn sample_haar(cfg: SamplerConfig) -> Vec<Coin> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n)
        .map(|_| {
            let h = 1.0 - 2.0 * rng.random::<f64>();
            let phi = 2.0 * PI * rng.random::<f64>();
            haar_coin(h, phi)
        })
        .collect()
}
