//! Dense Hermitian matrices, effects, and the Loewner order.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::config::{EFFECT_TOL, HERMITICITY_TOL, ORDER_TOL, RECONSTRUCTION_TOL};
use crate::error::{Error, Result};
use crate::jacobi::jacobi_eigen;

pub type Complex64 = nalgebra::Complex<f64>;
/// General dense complex matrix (column-major).
pub type CMatrix = DMatrix<Complex64>;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A dense `dim x dim` complex Hermitian matrix. The stored entries are
/// exactly Hermitian: `entries[j][k] == conj(entries[k][j])` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    /// Validates hermiticity within [`HERMITICITY_TOL`] and symmetrizes.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITICITY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::BadShape { rows: m.nrows(), cols: m.ncols() });
        }
        let n = m.nrows();
        let mut deviation: f64 = 0.0;
        for j in 0..n {
            for k in j..n {
                deviation = deviation.max((m[(j, k)] - m[(k, j)].conj()).norm());
            }
        }
        if !(deviation <= tol) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Takes the Hermitian part `(m + m*) / 2` without checking.
    pub(crate) fn symmetrized(mut m: CMatrix) -> Self {
        let n = m.nrows();
        for j in 0..n {
            m[(j, j)].im = 0.0;
            for k in j + 1..n {
                let z = (m[(j, k)] + m[(k, j)].conj()) * 0.5;
                m[(j, k)] = z;
                m[(k, j)] = z.conj();
            }
        }
        Self { m }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: CMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMatrix::identity(n, n) }
    }

    pub fn scalar(n: usize, t: f64) -> Self {
        Self { m: CMatrix::identity(n, n) * c(t, 0.0) }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { m: CMatrix::from_fn(n, n, |i, j| if i == j { c(d[i], 0.0) } else { c(0.0, 0.0) }) }
    }

    /// `weight * v v*`.
    pub fn rank_one(v: &[Complex64], weight: f64) -> Self {
        let n = v.len();
        Self::symmetrized(CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() * weight))
    }

    /// Builds `basis * Diag(values) * basis*`.
    pub fn from_spectral(values: &[f64], basis: &CMatrix) -> Self {
        let n = basis.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in values.iter().enumerate() {
            if lambda == 0.0 {
                continue;
            }
            for j in 0..n {
                let vj = basis[(j, k)] * lambda;
                for i in 0..n {
                    out[(i, j)] += basis[(i, k)] * vj.conj();
                }
            }
        }
        Self::symmetrized(out)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &HermitianMatrix) -> f64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        let (eigenvalues, basis) = jacobi_eigen(&self.m, true)?;
        Ok(EigenDecomposition { eigenvalues, basis: basis.expect("vectors requested") })
    }

    /// Ascending eigenvalues, without accumulating eigenvectors.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(jacobi_eigen(&self.m, false)?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("dim >= 1"))
    }

    pub fn operator_norm(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
    }

    /// Entrywise transpose; for a Hermitian matrix this equals the entrywise conjugate.
    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { m: &self.m * c(t, 0.0) }
    }

    /// `t * self * t*` for an arbitrary square `t`.
    pub fn congruence(&self, t: &CMatrix) -> Self {
        Self::symmetrized(t * &self.m * t.adjoint())
    }

    /// `||self * other - other * self||_F`.
    pub fn commutator_norm(&self, other: &HermitianMatrix) -> f64 {
        let ab = &self.m * &other.m;
        let ba = &other.m * &self.m;
        ab.iter().zip(ba.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies `f` to the spectrum: `V f(Lambda) V*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let e = self.eig()?;
        let vals: Vec<f64> = e.eigenvalues.iter().map(|&x| f(x)).collect();
        Ok(Self::from_spectral(&vals, &e.basis))
    }

    /// Principal square root of the positive part.
    pub fn sqrt_psd(&self) -> Result<Self> {
        self.map_spectrum(|x| x.max(0.0).sqrt())
    }

    fn check_dim(&self, other: &HermitianMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix { m: -&self.m }
    }
}

/// Ascending eigenvalues with a unitary basis of eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: CMatrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_spectral(&self.eigenvalues, &self.basis)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.basis.column(k).iter().copied().collect()
    }
}

/// A Hermitian matrix with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    m: HermitianMatrix,
}

impl Effect {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        effect_validate(&h)
    }

    /// Wraps a matrix known to be an effect up to rounding.
    pub(crate) fn trusted(m: HermitianMatrix) -> Self {
        Self { m }
    }

    pub fn zero(n: usize) -> Self {
        Self { m: HermitianMatrix::zeros(n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: HermitianMatrix::identity(n) }
    }

    /// `t I`, with `t` clamped into `[0, 1]`.
    pub fn scalar(n: usize, t: f64) -> Self {
        Self { m: HermitianMatrix::scalar(n, t.clamp(0.0, 1.0)) }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.m
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.m
    }

    pub fn matrix(&self) -> &CMatrix {
        self.m.matrix()
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        self.m.eigenvalues()
    }

    pub fn orthocomplement(&self) -> Effect {
        orthocomplement(self)
    }

    pub fn distance(&self, other: &Effect) -> f64 {
        self.m.distance(&other.m)
    }
}

impl AsRef<HermitianMatrix> for Effect {
    fn as_ref(&self) -> &HermitianMatrix {
        &self.m
    }
}

/// A square complex matrix with `U* U = I` within [`RECONSTRUCTION_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    m: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::BadShape { rows: m.nrows(), cols: m.ncols() });
        }
        let deviation = unitarity_defect(&m);
        if !(deviation <= RECONSTRUCTION_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { m })
    }

    pub(crate) fn trusted(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self { m: self.m.adjoint() }
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        self.m.column(k).iter().copied().collect()
    }
}

/// Modified Gram-Schmidt with two passes per column, in place. Returns false
/// if a column is numerically dependent on the previous ones.
pub(crate) fn orthonormalize_columns(q: &mut CMatrix) -> bool {
    let (rows, cols) = q.shape();
    for k in 0..cols {
        for _ in 0..2 {
            for j in 0..k {
                let proj: Complex64 = (0..rows).map(|i| q[(i, j)].conj() * q[(i, k)]).sum();
                for i in 0..rows {
                    let qij = q[(i, j)];
                    q[(i, k)] -= qij * proj;
                }
            }
        }
        let norm = (0..rows).map(|i| q[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return false;
        }
        for i in 0..rows {
            q[(i, k)] /= norm;
        }
    }
    true
}

/// `||U* U - I||_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let g = u.adjoint() * u;
    (g - CMatrix::identity(n, n)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn eig(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    h.eig()
}

pub fn trace(h: &HermitianMatrix) -> f64 {
    h.trace()
}

pub fn operator_norm(h: &HermitianMatrix) -> Result<f64> {
    h.operator_norm()
}

pub fn spectrum(a: &Effect) -> Result<Vec<f64>> {
    a.spectrum()
}

/// `A <= B` in the Loewner order: `lambda_min(B - A) >= -tol`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    a.check_dim(b)?;
    Ok((b - a).min_eigenvalue()? >= -tol)
}

/// `A < B`: `B - A` positive definite with `lambda_min(B - A) >= tol`.
pub fn strictly_less(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    a.check_dim(b)?;
    Ok((b - a).min_eigenvalue()? >= tol)
}

/// [`strictly_less`] at the default order tolerance.
pub fn strictly_less_default(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<bool> {
    strictly_less(a, b, ORDER_TOL)
}

/// Frobenius-nearest positive semidefinite matrix.
pub fn psd_project(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = h.eig()?;
    if e.eigenvalues[0] >= 0.0 {
        return Ok(h.clone());
    }
    let vals: Vec<f64> = e.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    Ok(HermitianMatrix::from_spectral(&vals, &e.basis))
}

pub fn effect_validate(h: &HermitianMatrix) -> Result<Effect> {
    effect_validate_with(h, EFFECT_TOL)
}

/// Accepts spectra within `[-tol, 1 + tol]`. Out-of-range eigenvalues are
/// clamped into `[0, 1]` and the stored matrix is rebuilt from the clamped
/// spectrum; in-range inputs are stored unchanged.
pub fn effect_validate_with(h: &HermitianMatrix, tol: f64) -> Result<Effect> {
    let e = h.eig()?;
    let lo = e.eigenvalues[0];
    let hi = e.eigenvalues[e.eigenvalues.len() - 1];
    if lo < -tol {
        return Err(Error::SpectrumOutOfRange { eigenvalue: lo });
    }
    if hi > 1.0 + tol {
        return Err(Error::SpectrumOutOfRange { eigenvalue: hi });
    }
    if lo >= 0.0 && hi <= 1.0 {
        return Ok(Effect { m: h.clone() });
    }
    let vals: Vec<f64> = e.eigenvalues.iter().map(|&x| x.clamp(0.0, 1.0)).collect();
    Ok(Effect { m: HermitianMatrix::from_spectral(&vals, &e.basis) })
}

/// `I - A`.
pub fn orthocomplement(a: &Effect) -> Effect {
    let n = a.dim();
    Effect { m: &HermitianMatrix::identity(n) - &a.m }
}

/// Block-diagonal assembly.
pub fn direct_sum(blocks: &[HermitianMatrix]) -> Result<HermitianMatrix> {
    if blocks.is_empty() {
        return Err(Error::EmptyBlockList);
    }
    let n: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut m = CMatrix::zeros(n, n);
    let mut offset = 0;
    for b in blocks {
        let k = b.dim();
        m.view_mut((offset, offset), (k, k)).copy_from(b.matrix());
        offset += k;
    }
    Ok(HermitianMatrix { m })
}

pub fn direct_sum_effects(blocks: &[Effect]) -> Result<Effect> {
    let hs: Vec<HermitianMatrix> = blocks.iter().map(|b| b.m.clone()).collect();
    Ok(Effect { m: direct_sum(&hs)? })
}

/// `U A U*`, or `U A^t U*` when `transpose` is set.
pub fn conjugate(a: &Effect, u: &UnitaryMatrix, transpose: bool) -> Result<Effect> {
    if a.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: u.dim() });
    }
    let inner = if transpose { a.m.transpose() } else { a.m.clone() };
    Ok(Effect { m: inner.congruence(u.matrix()) })
}
