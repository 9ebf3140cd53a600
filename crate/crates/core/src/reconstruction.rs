//! Recovering the symmetry behind a map on effects.
//!
//! The map is probed on rank-one projections: the images of `e_j e_j*` give
//! the columns of `U` up to phases, the projections onto `(e_1 + e_j)/sqrt 2`
//! align those phases, and the projection onto `(e_1 + i e_2)/sqrt 2`
//! separates unitary from antiunitary action.

use crate::error::{Error, Result};
use crate::hermitian::{c, orthonormalize_columns, CMatrix, Complex64, Effect, HermitianMatrix, UnitaryMatrix};
use crate::preservers::{apply_standard, PreserverSpec, StandardAutomorphismSpec};
use crate::random::{random_effect_with, rng_from_seed};

/// Black-box access to a map on effects of a fixed dimension.
pub trait EffectMap {
    fn dim(&self) -> usize;
    fn apply(&self, a: &Effect) -> Result<Effect>;
}

impl EffectMap for PreserverSpec {
    fn dim(&self) -> usize {
        PreserverSpec::dim(self)
    }

    fn apply(&self, a: &Effect) -> Result<Effect> {
        PreserverSpec::apply(self, a)
    }
}

impl EffectMap for StandardAutomorphismSpec {
    fn dim(&self) -> usize {
        StandardAutomorphismSpec::dim(self)
    }

    fn apply(&self, a: &Effect) -> Result<Effect> {
        apply_standard(self, a)
    }
}

/// Wraps a closure as an [`EffectMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&Effect) -> Result<Effect>> FnMap<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&Effect) -> Result<Effect>> EffectMap for FnMap<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, a: &Effect) -> Result<Effect> {
        (self.f)(a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub u: UnitaryMatrix,
    pub antiunitary: bool,
    pub perp: bool,
    /// Largest Frobenius deviation between the map and the fitted
    /// automorphism over the probes.
    pub residual: f64,
}

impl ReconstructionResult {
    pub fn spec(&self) -> StandardAutomorphismSpec {
        StandardAutomorphismSpec { u: self.u.clone(), transpose: self.antiunitary, perp: self.perp }
    }
}

/// Images of `0` and `I` farther than this (times `sqrt n`) from both
/// candidates make the map inconsistent.
const PERP_DISTANCE: f64 = 0.1;

/// True when the map exchanges `0` and `I`.
pub fn detect_perp(map: &dyn EffectMap) -> Result<bool> {
    let n = map.dim();
    let limit = PERP_DISTANCE * (n as f64).sqrt();
    let zero = HermitianMatrix::zeros(n);
    let id = HermitianMatrix::identity(n);
    let at_zero = map.apply(&Effect::zero(n))?;
    let at_identity = map.apply(&Effect::identity(n))?;
    let to_zero = at_zero.as_hermitian().distance(&zero);
    let to_identity = at_zero.as_hermitian().distance(&id);
    if to_zero.min(to_identity) > limit {
        return Err(Error::InconsistentMap { dist_zero: to_zero, dist_identity: to_identity });
    }
    let perp = to_identity < to_zero;
    let expected = if perp { &zero } else { &id };
    if at_identity.as_hermitian().distance(expected) > limit {
        return Err(Error::InconsistentMap {
            dist_zero: at_identity.as_hermitian().distance(&zero),
            dist_identity: at_identity.as_hermitian().distance(&id),
        });
    }
    Ok(perp)
}

fn basis_vector(n: usize, k: usize) -> Vec<Complex64> {
    (0..n).map(|i| c(if i == k { 1.0 } else { 0.0 }, 0.0)).collect()
}

fn projection_onto(v: &[Complex64]) -> Effect {
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    Effect::new(HermitianMatrix::rank_one(v, 1.0 / norm2)).expect("rank-one projection is an effect")
}

/// `<x, H y>`.
fn matrix_element(x: &[Complex64], h: &HermitianMatrix, y: &[Complex64]) -> Complex64 {
    let n = x.len();
    let hy = h.matrix() * CMatrix::from_column_slice(n, 1, y);
    x.iter().zip(hy.iter()).map(|(p, q)| p.conj() * q).sum()
}

struct Probe<'a> {
    map: &'a dyn EffectMap,
    perp: bool,
}

impl Probe<'_> {
    /// The map with the orthocomplement undone.
    fn eval(&self, a: &Effect) -> Result<HermitianMatrix> {
        let image = self.map.apply(a)?;
        Ok(if self.perp { image.orthocomplement().into_hermitian() } else { image.into_hermitian() })
    }
}

/// Fits a standard automorphism to `map`. `tol` bounds how far probe images
/// may be from rank-one projections and how far the recovered columns may be
/// from orthonormal.
pub fn reconstruct(map: &dyn EffectMap, tol: f64) -> Result<ReconstructionResult> {
    let n = map.dim();
    let perp = detect_perp(map)?;
    let probe = Probe { map, perp };

    // Basis probes give the columns up to phase.
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let image = probe.eval(&projection_onto(&basis_vector(n, j)))?;
        let e = image.eig()?;
        let mut expected = vec![0.0; n];
        expected[n - 1] = 1.0;
        let deviation = e.eigenvalues.iter().zip(&expected).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if deviation > tol {
            return Err(Error::NonProjectionImage { probe: j, deviation });
        }
        columns.push(e.eigenvector(n - 1));
    }
    let mut gram_deviation: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let inner: Complex64 = columns[j].iter().zip(&columns[k]).map(|(p, q)| p.conj() * q).sum();
            let target = if j == k { 1.0 } else { 0.0 };
            gram_deviation = gram_deviation.max((inner - c(target, 0.0)).norm());
        }
    }
    if gram_deviation > tol {
        return Err(Error::NonOrthogonalImages { deviation: gram_deviation });
    }

    // Real superpositions align the phase of column j with column 1.
    for j in 1..n {
        let mut v = basis_vector(n, 0);
        v[j] = c(1.0, 0.0);
        let image = probe.eval(&projection_onto(&v))?;
        let z = matrix_element(&columns[0], &image, &columns[j]);
        if (z.norm() - 0.5).abs() > tol.max(1e-6).sqrt() {
            return Err(Error::PhaseFitFailure(format!(
                "superposition probe {j}: off-diagonal element has modulus {}, expected 1/2",
                z.norm()
            )));
        }
        let phase = z.conj() / z.norm();
        for x in columns[j].iter_mut() {
            *x *= phase;
        }
    }

    // The complex superposition gives -i/2 for unitary and +i/2 for antiunitary action.
    let antiunitary = if n >= 2 {
        let mut v = basis_vector(n, 0);
        v[1] = c(0.0, 1.0);
        let image = probe.eval(&projection_onto(&v))?;
        let z = matrix_element(&columns[0], &image, &columns[1]);
        if z.re.abs() > tol.max(1e-6).sqrt() || (z.im.abs() - 0.5).abs() > tol.max(1e-6).sqrt() {
            return Err(Error::PhaseFitFailure(format!(
                "complex probe element {} + {}i is neither -i/2 nor +i/2",
                z.re, z.im
            )));
        }
        z.im > 0.0
    } else {
        false
    };

    let mut u = CMatrix::from_fn(n, n, |i, j| columns[j][i]);
    if !orthonormalize_columns(&mut u) {
        return Err(Error::NonOrthogonalImages { deviation: gram_deviation });
    }
    // Gauge: first clearly nonzero entry of the first column real positive.
    if let Some(i) = (0..n).find(|&i| u[(i, 0)].norm() > 1e-8) {
        let phase = u[(i, 0)].conj() / u[(i, 0)].norm();
        u *= phase;
        u[(i, 0)] = c(u[(i, 0)].norm(), 0.0);
    }
    let result = ReconstructionResult { u: UnitaryMatrix::new(u)?, antiunitary, perp, residual: 0.0 };

    let spec = result.spec();
    let fitted = |a: &Effect| -> Result<f64> {
        let expected = apply_standard(&spec, a)?;
        Ok(map.apply(a)?.distance(&expected))
    };
    let mut residual = fitted(&Effect::zero(n))?.max(fitted(&Effect::identity(n))?);
    for j in 0..n {
        residual = residual.max(fitted(&projection_onto(&basis_vector(n, j)))?);
        if j > 0 {
            let mut v = basis_vector(n, 0);
            v[j] = c(1.0, 0.0);
            residual = residual.max(fitted(&projection_onto(&v))?);
        }
    }
    if n >= 2 {
        let mut v = basis_vector(n, 0);
        v[1] = c(0.0, 1.0);
        residual = residual.max(fitted(&projection_onto(&v))?);
    }
    Ok(ReconstructionResult { residual, ..result })
}

/// Largest `||map(A) - phi(A)||_F` over `trials` seeded random effects, where
/// `phi` is the fitted automorphism.
pub fn verify_reconstruction(map: &dyn EffectMap, result: &ReconstructionResult, trials: usize, seed: u64) -> Result<f64> {
    let spec = result.spec();
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let a = random_effect_with(&mut rng, map.dim(), None)?;
        worst = worst.max(map.apply(&a)?.distance(&apply_standard(&spec, &a)?));
    }
    Ok(worst)
}

/// `min over theta of ||X - e^{i theta} Y||_F`.
pub fn phase_distance(x: &CMatrix, y: &CMatrix) -> f64 {
    let overlap: Complex64 = y.iter().zip(x.iter()).map(|(p, q)| p.conj() * q).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    (x - y * phase).norm()
}
