//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a[p][q]` with a
//! diagonal unitary, then annihilates the (now real) pivot with an ordinary
//! plane rotation. The product of the two is a 2x2 unitary acting on rows and
//! columns `p`, `q`.

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, Complex64};

/// Off-diagonal Frobenius norm, relative to the input scale, at which a sweep loop stops.
pub const OFF_DIAGONAL_THRESHOLD: f64 = 1e-14;

/// Maximum number of cyclic sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and, when requested, the matching eigenvector columns.
pub(crate) fn jacobi_eigen(input: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    let n = input.nrows();
    // column-major working copy, index (i, j) -> i + j * n
    let mut a: Vec<Complex64> = input.as_slice().to_vec();
    let mut v: Vec<Complex64> = if want_vectors {
        let mut v = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            v[i + i * n] = Complex64::new(1.0, 0.0);
        }
        v
    } else {
        Vec::new()
    };

    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut converged = n <= 1 || scale == 0.0;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        if off_norm(&a, n) <= OFF_DIAGONAL_THRESHOLD * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q, want_vectors);
            }
        }
        sweep += 1;
    }
    if !converged {
        let off = off_norm(&a, n);
        if off > OFF_DIAGONAL_THRESHOLD * scale {
            return Err(Error::EigenNoConvergence { sweeps: sweep, off_norm: off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i + i * n].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = if want_vectors {
        Some(CMatrix::from_fn(n, n, |r, c| v[r + order[c] * n]))
    } else {
        None
    };
    Ok((values, vectors))
}

fn off_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[i + j * n].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize, want_vectors: bool) {
    let b = a[p + q * n];
    let abs_b = b.norm();
    if abs_b == 0.0 {
        return;
    }
    let app = a[p + p * n].re;
    let aqq = a[q + q * n].re;
    // negligible against both diagonal entries: zero it without rotating
    if abs_b < 1e-300 || (app.abs() + abs_b * 1e17 == app.abs() && aqq.abs() + abs_b * 1e17 == aqq.abs()) {
        a[p + q * n] = Complex64::new(0.0, 0.0);
        a[q + p * n] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = b / abs_b;
    let theta = (aqq - app) / (2.0 * abs_b);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = phase.conj() * (-s);
    let gqq = phase.conj() * c;

    // A <- A G
    for k in 0..n {
        let akp = a[k + p * n];
        let akq = a[k + q * n];
        a[k + p * n] = akp * gpp + akq * gqp;
        a[k + q * n] = akp * gpq + akq * gqq;
    }
    // A <- G* A
    for k in 0..n {
        let apk = a[p + k * n];
        let aqk = a[q + k * n];
        a[p + k * n] = gpp.conj() * apk + gqp.conj() * aqk;
        a[q + k * n] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[p + q * n] = Complex64::new(0.0, 0.0);
    a[q + p * n] = Complex64::new(0.0, 0.0);
    a[p + p * n].im = 0.0;
    a[q + q * n].im = 0.0;

    if want_vectors {
        for k in 0..n {
            let vkp = v[k + p * n];
            let vkq = v[k + q * n];
            v[k + p * n] = vkp * gpp + vkq * gqp;
            v[k + q * n] = vkp * gpq + vkq * gqq;
        }
    }
}
