//! Seeded random unitaries, effects and helpers. Every generator takes an
//! explicit seed or RNG; nothing reads global state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::GENERATION_MARGIN;
use crate::error::{Error, Result};
use crate::hermitian::{c, orthonormalize_columns, CMatrix, Complex64, Effect, HermitianMatrix, UnitaryMatrix};
use crate::strata::StratumLabel;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed derived from a master seed, a stream id and an index.
pub fn mix_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

pub fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Gaussian matrix,
/// which fixes the phases of the implicit R factor to be positive.
pub fn random_unitary_with(rng: &mut impl Rng, dim: usize) -> UnitaryMatrix {
    loop {
        let mut q = gaussian_matrix(rng, dim, dim);
        if orthonormalize_columns(&mut q) {
            return UnitaryMatrix::trusted(q);
        }
    }
}

pub fn random_unitary(dim: usize, seed: u64) -> UnitaryMatrix {
    random_unitary_with(&mut rng_from_seed(seed), dim)
}

/// Spectrum with `p` ones, `q` zeros and the rest uniform in `[margin, 1 - margin]`.
pub fn stratum_spectrum(rng: &mut impl Rng, dim: usize, p: usize, q: usize) -> Vec<f64> {
    let mut vals = Vec::with_capacity(dim);
    vals.extend(std::iter::repeat_n(1.0, p));
    vals.extend(std::iter::repeat_n(0.0, q));
    while vals.len() < dim {
        vals.push(rng.random_range(GENERATION_MARGIN..=1.0 - GENERATION_MARGIN));
    }
    vals
}

pub fn random_effect_with(rng: &mut impl Rng, dim: usize, stratum: Option<StratumLabel>) -> Result<Effect> {
    let (p, q) = stratum.map(|s| (s.p, s.q)).unwrap_or((0, 0));
    if p + q > dim {
        return Err(Error::InvalidStratum { p, q, dim });
    }
    let vals = stratum_spectrum(rng, dim, p, q);
    let u = random_unitary_with(rng, dim);
    Ok(Effect::trusted(HermitianMatrix::from_spectral(&vals, u.matrix())))
}

/// Random effect, optionally pinned to the stratum `E(p, q)`.
pub fn random_effect(dim: usize, stratum: Option<StratumLabel>, seed: u64) -> Result<Effect> {
    random_effect_with(&mut rng_from_seed(seed), dim, stratum)
}

/// Random orthogonal projection of the given rank.
pub fn random_projection(rng: &mut impl Rng, dim: usize, rank: usize) -> Effect {
    let u = random_unitary_with(rng, dim);
    let mut vals = vec![0.0; dim];
    for v in vals.iter_mut().take(rank) {
        *v = 1.0;
    }
    Effect::trusted(HermitianMatrix::from_spectral(&vals, u.matrix()))
}

/// `weight * v v*` for a random unit vector `v`.
pub fn random_rank_one(rng: &mut impl Rng, dim: usize, weight: f64) -> Effect {
    let v = random_unit_vector(rng, dim);
    Effect::trusted(HermitianMatrix::rank_one(&v, weight))
}

/// A random positive semidefinite matrix with operator norm at most `scale`.
pub fn random_psd(rng: &mut impl Rng, dim: usize, scale: f64) -> HermitianMatrix {
    let vals: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..=scale)).collect();
    let u = random_unitary_with(rng, dim);
    HermitianMatrix::from_spectral(&vals, u.matrix())
}
