//! Deciding coexistence of two effects.
//!
//! `A ~ B` iff there are effects `M <= A`, `N <= I - A` with `M + N = B`.
//! [`decide`] first consults exact rules (scalar, projection, commuting,
//! rank-one) and falls back to a Dykstra feasibility search otherwise.

mod certificate;
mod dykstra;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::config::{COMMUTE_TOL, EFFECT_TOL, ORDER_TOL};
use crate::error::{Error, Result};
use crate::hermitian::{
    direct_sum, loewner_leq, orthocomplement, strictly_less_default, Complex64, EigenDecomposition, Effect,
    HermitianMatrix,
};
use crate::random::{random_effect_with, rng_from_seed};

pub use certificate::{check_efg, check_mn, efg_to_mn, mn_to_efg, verify_efg, verify_mn, Violation};
pub use dykstra::{farkas_gap, feasibility_residual, FARKAS_MARGIN, STALL_DISPLACEMENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Coexistent,
    NotCoexistent,
    Indeterminate,
}

impl Verdict {
    pub fn is_definite(self) -> bool {
        self != Verdict::Indeterminate
    }

    /// Process exit code used by the `check` command.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Coexistent => 0,
            Verdict::NotCoexistent => 1,
            Verdict::Indeterminate => 2,
        }
    }

    /// True when both are definite and differ.
    pub fn contradicts(self, other: Verdict) -> bool {
        self.is_definite() && other.is_definite() && self != other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    ScalarRule,
    ProjectionRule,
    CommuteRule,
    RankOneRule,
    FeasibilitySolver,
    Blockwise,
}

/// `(M, N)` with `M <= A`, `N <= I - A`, `M + N = B`, effects up to the certificate tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub m: HermitianMatrix,
    pub n: HermitianMatrix,
}

#[derive(Debug, Clone)]
pub struct CoexistenceVerdict {
    pub verdict: Verdict,
    pub reason: Reason,
    pub witness: Option<Witness>,
    pub residual: f64,
    pub iterations: usize,
}

impl CoexistenceVerdict {
    fn exact(verdict: Verdict, reason: Reason, witness: Option<Witness>) -> Self {
        Self { verdict, reason, witness, residual: 0.0, iterations: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub feas_tol: f64,
    pub sep_tol: f64,
    pub max_cycles: usize,
    pub stall_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { feas_tol: 1e-7, sep_tol: 1e-5, max_cycles: 20_000, stall_window: 50 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0 && self.feas_tol < self.sep_tol) {
            return Err(Error::InvalidSpec(format!(
                "need 0 < feas_tol < sep_tol (got {} and {})",
                self.feas_tol, self.sep_tol
            )));
        }
        if self.max_cycles == 0 || self.stall_window == 0 {
            return Err(Error::InvalidSpec("max_cycles and stall_window must be positive".into()));
        }
        Ok(())
    }
}

/// Eigenvalues at or above this count towards the rank in the rank-one rule.
pub const RANK_TOL: f64 = 1e-7;
/// `1 - |<p, q>|^2` at or above this means the two images differ.
pub const DISTINCT_IMAGE_TOL: f64 = 1e-9;

fn check_dims(a: &Effect, b: &Effect) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

fn spectrum_is_scalar(e: &EigenDecomposition) -> bool {
    e.eigenvalues[e.eigenvalues.len() - 1] - e.eigenvalues[0] <= EFFECT_TOL
}

fn spectrum_is_projection(e: &EigenDecomposition) -> bool {
    e.eigenvalues.iter().all(|&x| x.abs() <= EFFECT_TOL || (x - 1.0).abs() <= EFFECT_TOL)
}

fn scalar_value(e: &EigenDecomposition) -> f64 {
    e.eigenvalues.iter().sum::<f64>() / e.eigenvalues.len() as f64
}

/// Top eigenvector when exactly one eigenvalue reaches [`RANK_TOL`].
fn rank_one_image(e: &EigenDecomposition) -> Option<Vec<Complex64>> {
    let rank = e.eigenvalues.iter().filter(|&&x| x >= RANK_TOL).count();
    (rank == 1).then(|| e.eigenvector(e.eigenvalues.len() - 1))
}

/// `M = (AB + BA) / 2`, `N = B - M`; exact for commuting pairs.
fn commuting_witness(a: &Effect, b: &Effect) -> Witness {
    let ab = a.matrix() * b.matrix();
    let m = HermitianMatrix::symmetrized(ab);
    let n = b.as_hermitian() - &m;
    Witness { m, n }
}

/// Exact decisions for the four special configurations, in priority order:
/// a scalar argument, a projection argument, commuting arguments, and two
/// rank-one arguments with different images.
pub fn fast_path(a: &Effect, b: &Effect) -> Result<Option<CoexistenceVerdict>> {
    check_dims(a, b)?;
    let ea = a.as_hermitian().eig()?;
    let eb = b.as_hermitian().eig()?;

    if spectrum_is_scalar(&ea) {
        let t = scalar_value(&ea);
        let m = b.as_hermitian() * t;
        let n = b.as_hermitian() * (1.0 - t);
        return Ok(Some(CoexistenceVerdict::exact(Verdict::Coexistent, Reason::ScalarRule, Some(Witness { m, n }))));
    }
    if spectrum_is_scalar(&eb) {
        let s = scalar_value(&eb);
        let m = a.as_hermitian() * s;
        let n = orthocomplement(a).as_hermitian() * s;
        return Ok(Some(CoexistenceVerdict::exact(Verdict::Coexistent, Reason::ScalarRule, Some(Witness { m, n }))));
    }

    let commute = a.as_hermitian().commutator_norm(b.as_hermitian()) <= COMMUTE_TOL;
    if spectrum_is_projection(&ea) || spectrum_is_projection(&eb) {
        return Ok(Some(if commute {
            CoexistenceVerdict::exact(Verdict::Coexistent, Reason::ProjectionRule, Some(commuting_witness(a, b)))
        } else {
            CoexistenceVerdict::exact(Verdict::NotCoexistent, Reason::ProjectionRule, None)
        }));
    }
    if commute {
        return Ok(Some(CoexistenceVerdict::exact(
            Verdict::Coexistent,
            Reason::CommuteRule,
            Some(commuting_witness(a, b)),
        )));
    }

    if let (Some(p), Some(q)) = (rank_one_image(&ea), rank_one_image(&eb)) {
        let overlap: Complex64 = p.iter().zip(q.iter()).map(|(x, y)| x.conj() * y).sum();
        if 1.0 - overlap.norm_sqr() >= DISTINCT_IMAGE_TOL {
            let top = (a.as_hermitian() + b.as_hermitian()).max_eigenvalue()?;
            return Ok(Some(if top <= 1.0 + ORDER_TOL {
                let w = Witness { m: HermitianMatrix::zeros(a.dim()), n: b.as_hermitian().clone() };
                CoexistenceVerdict::exact(Verdict::Coexistent, Reason::RankOneRule, Some(w))
            } else {
                CoexistenceVerdict::exact(Verdict::NotCoexistent, Reason::RankOneRule, None)
            }));
        }
    }
    Ok(None)
}

/// Lexicographic order on entries, used to make the solver symmetric in its arguments.
fn entry_order(a: &HermitianMatrix, b: &HermitianMatrix) -> Ordering {
    for (x, y) in a.matrix().iter().zip(b.matrix().iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Runs the feasibility solver alone, bypassing the exact rules.
pub fn decide_with_solver(a: &Effect, b: &Effect, cfg: &SolverConfig) -> Result<CoexistenceVerdict> {
    check_dims(a, b)?;
    cfg.validate()?;
    let (ha, hb) = (a.as_hermitian(), b.as_hermitian());
    // M plays the same role for (A, B) and (B, A); only N = B - M depends on the order.
    let run = if entry_order(ha, hb) == Ordering::Greater {
        dykstra::solve(hb, ha, cfg)?
    } else {
        dykstra::solve(ha, hb, cfg)?
    };
    let witness = (run.verdict == Verdict::Coexistent).then(|| Witness { n: hb - &run.m, m: run.m.clone() });
    Ok(CoexistenceVerdict {
        verdict: run.verdict,
        reason: Reason::FeasibilitySolver,
        witness,
        residual: run.residual,
        iterations: run.cycles,
    })
}

pub fn decide(a: &Effect, b: &Effect, cfg: &SolverConfig) -> Result<CoexistenceVerdict> {
    if let Some(v) = fast_path(a, b)? {
        return Ok(v);
    }
    decide_with_solver(a, b, cfg)
}

/// Decides block-diagonal pairs block by block.
pub fn decide_blockwise(a_blocks: &[Effect], b_blocks: &[Effect], cfg: &SolverConfig) -> Result<CoexistenceVerdict> {
    if a_blocks.is_empty() {
        return Err(Error::EmptyBlockList);
    }
    if a_blocks.len() != b_blocks.len() {
        return Err(Error::DimensionMismatch { expected: a_blocks.len(), found: b_blocks.len() });
    }
    let mut verdict = Verdict::Coexistent;
    let mut residual: f64 = 0.0;
    let mut iterations = 0;
    let mut witnesses = Vec::with_capacity(a_blocks.len());
    for (a, b) in a_blocks.iter().zip(b_blocks) {
        let v = decide(a, b, cfg)?;
        residual = residual.max(v.residual);
        iterations += v.iterations;
        match v.verdict {
            Verdict::NotCoexistent => verdict = Verdict::NotCoexistent,
            Verdict::Indeterminate if verdict == Verdict::Coexistent => verdict = Verdict::Indeterminate,
            _ => {}
        }
        witnesses.push(v.witness);
    }
    let witness = if verdict == Verdict::Coexistent && witnesses.iter().all(Option::is_some) {
        let (ms, ns): (Vec<_>, Vec<_>) = witnesses.into_iter().flatten().map(|w| (w.m, w.n)).unzip();
        Some(Witness { m: direct_sum(&ms)?, n: direct_sum(&ns)? })
    } else {
        None
    };
    Ok(CoexistenceVerdict { verdict, reason: Reason::Blockwise, witness, residual, iterations })
}

/// Random `B = M + N` with `M = A^{1/2} R A^{1/2}`, `N = (I-A)^{1/2} R' (I-A)^{1/2}`
/// for random effects `R`, `R'`; returned with the witness.
pub fn sample_coexistent_with_witness(a: &Effect, count: usize, seed: u64) -> Result<Vec<(Effect, Witness)>> {
    let n = a.dim();
    let root = a.as_hermitian().sqrt_psd()?;
    let root_perp = orthocomplement(a).as_hermitian().sqrt_psd()?;
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let r = random_effect_with(&mut rng, n, None)?;
        let r2 = random_effect_with(&mut rng, n, None)?;
        let m = r.as_hermitian().congruence(root.matrix());
        let nn = r2.as_hermitian().congruence(root_perp.matrix());
        let b = Effect::new(&m + &nn)?;
        out.push((b, Witness { m, n: nn }));
    }
    Ok(out)
}

pub fn sample_coexistent(a: &Effect, count: usize, seed: u64) -> Result<Vec<Effect>> {
    Ok(sample_coexistent_with_witness(a, count, seed)?.into_iter().map(|(b, _)| b).collect())
}

/// Given `0 <= B <= A` with `A` invertible, returns `C` with `0 < C < A` and
/// `||B - C|| < eps`. In the frame `W = A^{-1/2} B A^{-1/2}` the spectrum of `W`
/// is clamped into `[delta, 1 - delta]`.
pub fn interior_perturbation(a: &HermitianMatrix, b: &HermitianMatrix, eps: f64) -> Result<HermitianMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let ea = a.eig()?;
    let lo = ea.eigenvalues[0];
    let hi = ea.eigenvalues[ea.eigenvalues.len() - 1];
    if lo < 1e-9 {
        return Err(Error::Precondition(format!("A must be invertible (lambda_min = {lo:e})")));
    }
    let zero = HermitianMatrix::zeros(a.dim());
    if !loewner_leq(&zero, b, ORDER_TOL)? || !loewner_leq(b, a, ORDER_TOL)? {
        return Err(Error::Precondition("need 0 <= B <= A".into()));
    }
    let root = HermitianMatrix::from_spectral(&ea.eigenvalues.iter().map(|x| x.sqrt()).collect::<Vec<_>>(), &ea.basis);
    let inv_root =
        HermitianMatrix::from_spectral(&ea.eigenvalues.iter().map(|x| 1.0 / x.sqrt()).collect::<Vec<_>>(), &ea.basis);
    let w = b.congruence(inv_root.matrix());
    let kappa = (hi / lo).sqrt();
    let delta = (eps / (2.0 * hi * kappa)).min(0.25);
    let clamped = w.map_spectrum(|x| x.clamp(delta, 1.0 - delta))?;
    Ok(clamped.congruence(root.matrix()))
}

/// Checks the three postconditions of [`interior_perturbation`].
pub fn is_interior_perturbation(a: &HermitianMatrix, b: &HermitianMatrix, c: &HermitianMatrix, eps: f64) -> Result<bool> {
    let zero = HermitianMatrix::zeros(a.dim());
    Ok(strictly_less_default(&zero, c)? && strictly_less_default(c, a)? && (b - c).operator_norm()? < eps)
}
