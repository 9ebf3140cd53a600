//! Conversion and verification of coexistence certificates.
//!
//! Two equivalent forms are supported: the defining triple `(E, F, G)` with
//! `A = E + G`, `B = F + G`, `E + F + G <= I`, and the pair `(M, N)` with
//! `M <= A`, `N <= I - A`, `M + N = B`.

use crate::config::CERT_TOL;
use crate::error::{Error, Result};
use crate::hermitian::{Effect, HermitianMatrix};

/// The first constraint a certificate fails, with its margin.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: &'static str,
    pub margin: f64,
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::InvalidCertificate { constraint: v.constraint.to_string(), margin: v.margin }
    }
}

type Check = std::result::Result<(), Violation>;

fn psd_at(h: &HermitianMatrix, tol: f64, constraint: &'static str) -> Check {
    let lo = h.min_eigenvalue().unwrap_or(f64::NEG_INFINITY);
    if lo >= -tol {
        Ok(())
    } else {
        Err(Violation { constraint, margin: -lo })
    }
}

fn equal_at(x: &HermitianMatrix, y: &HermitianMatrix, tol: f64, constraint: &'static str) -> Check {
    let d = x.distance(y);
    if d <= tol {
        Ok(())
    } else {
        Err(Violation { constraint, margin: d })
    }
}

fn same_dims(mats: &[&HermitianMatrix]) -> Check {
    let n = mats[0].dim();
    if mats.iter().all(|m| m.dim() == n) {
        Ok(())
    } else {
        Err(Violation { constraint: "matching dimensions", margin: f64::INFINITY })
    }
}

/// Checks `0 <= M <= A`, `0 <= N <= I - A` and `M + N = B`.
pub fn check_mn(a: &Effect, b: &Effect, m: &HermitianMatrix, n: &HermitianMatrix, tol: f64) -> Check {
    let (a, b) = (a.as_hermitian(), b.as_hermitian());
    same_dims(&[a, b, m, n])?;
    let id = HermitianMatrix::identity(a.dim());
    psd_at(m, tol, "M >= 0")?;
    psd_at(n, tol, "N >= 0")?;
    psd_at(&(a - m), tol, "M <= A")?;
    psd_at(&(&(&id - a) - n), tol, "N <= I - A")?;
    equal_at(&(m + n), b, tol, "M + N = B")
}

/// Checks `A = E + G`, `B = F + G`, `E, F, G >= 0` and `E + F + G <= I`.
pub fn check_efg(
    a: &Effect,
    b: &Effect,
    e: &HermitianMatrix,
    f: &HermitianMatrix,
    g: &HermitianMatrix,
    tol: f64,
) -> Check {
    let (a, b) = (a.as_hermitian(), b.as_hermitian());
    same_dims(&[a, b, e, f, g])?;
    equal_at(&(e + g), a, tol, "A = E + G")?;
    equal_at(&(f + g), b, tol, "B = F + G")?;
    psd_at(e, tol, "E >= 0")?;
    psd_at(f, tol, "F >= 0")?;
    psd_at(g, tol, "G >= 0")?;
    let total = &(e + f) + g;
    psd_at(&(&HermitianMatrix::identity(a.dim()) - &total), tol, "E + F + G <= I")
}

pub fn verify_mn(a: &Effect, b: &Effect, m: &HermitianMatrix, n: &HermitianMatrix, tol: f64) -> bool {
    check_mn(a, b, m, n, tol).is_ok()
}

pub fn verify_efg(
    a: &Effect,
    b: &Effect,
    e: &HermitianMatrix,
    f: &HermitianMatrix,
    g: &HermitianMatrix,
    tol: f64,
) -> bool {
    check_efg(a, b, e, f, g, tol).is_ok()
}

/// `(M, N) -> (E, F, G) = (A - M, N, M)`.
pub fn mn_to_efg(
    m: &HermitianMatrix,
    n: &HermitianMatrix,
    a: &Effect,
    b: &Effect,
) -> Result<(HermitianMatrix, HermitianMatrix, HermitianMatrix)> {
    check_mn(a, b, m, n, CERT_TOL)?;
    Ok((a.as_hermitian() - m, n.clone(), m.clone()))
}

/// `(E, F, G) -> (M, N) = (G, F)`.
pub fn efg_to_mn(
    e: &HermitianMatrix,
    f: &HermitianMatrix,
    g: &HermitianMatrix,
    a: &Effect,
    b: &Effect,
) -> Result<(HermitianMatrix, HermitianMatrix)> {
    check_efg(a, b, e, f, g, CERT_TOL)?;
    Ok((g.clone(), f.clone()))
}
