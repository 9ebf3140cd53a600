//! The strata `E(p, q)`: effects whose eigenvalue 1 has multiplicity `p` and
//! eigenvalue 0 has multiplicity `q`.

use serde::{Deserialize, Serialize};

use crate::config::STRATUM_TOL;
use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, Effect, HermitianMatrix, UnitaryMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StratumLabel {
    pub p: usize,
    pub q: usize,
}

impl StratumLabel {
    pub fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    pub fn swapped(self) -> Self {
        Self { p: self.q, q: self.p }
    }
}

pub fn classify(a: &Effect, tol: f64) -> Result<StratumLabel> {
    let sp = a.spectrum()?;
    Ok(classify_spectrum(&sp, tol))
}

pub fn classify_default(a: &Effect) -> Result<StratumLabel> {
    classify(a, STRATUM_TOL)
}

fn classify_spectrum(sp: &[f64], tol: f64) -> StratumLabel {
    let p = sp.iter().filter(|&&x| x >= 1.0 - tol).count();
    let q = sp.iter().filter(|&&x| x <= tol).count();
    StratumLabel { p, q }
}

/// Returns `(V, D)` with `D = Diag(I_p, B, 0_q)`, the interior block `B`
/// diagonal with entries descending, and `V D V* = A`.
pub fn canonical_form(a: &Effect) -> Result<(UnitaryMatrix, Effect)> {
    let e = a.as_hermitian().eig()?;
    let label = classify_spectrum(&e.eigenvalues, STRATUM_TOL);
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    // stable descending sort keeps ties in eigenvector order
    order.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    let diag: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(slot, &k)| {
            if slot < label.p {
                1.0
            } else if slot >= n - label.q {
                0.0
            } else {
                e.eigenvalues[k]
            }
        })
        .collect();
    let v = CMatrix::from_fn(n, n, |r, col| e.basis[(r, order[col])]);
    Ok((UnitaryMatrix::trusted(v), Effect::trusted(HermitianMatrix::from_diagonal(&diag))))
}

/// Real dimension `n^2 - 2pq` of the Hermitian matrices whose `p x q` corner blocks vanish.
pub fn freedom_dimension(n: usize, p: usize, q: usize) -> Result<usize> {
    if p + q > n {
        return Err(Error::InvalidStratum { p, q, dim: n });
    }
    Ok(n * n - 2 * p * q)
}

/// Spectrum diameter at most `tol`.
pub fn is_scalar(a: &Effect, tol: f64) -> Result<bool> {
    let sp = a.spectrum()?;
    Ok(sp[sp.len() - 1] - sp[0] <= tol)
}

/// Every eigenvalue within `tol` of 0 or 1.
pub fn is_projection(a: &Effect, tol: f64) -> Result<bool> {
    let sp = a.spectrum()?;
    Ok(sp.iter().all(|&x| x.abs() <= tol || (x - 1.0).abs() <= tol))
}
