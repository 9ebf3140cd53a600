//! Dykstra's cyclic projection over the four order-interval sets
//!
//!   {M >= 0},  {M <= A},  {M <= B},  {M >= A + B - I}
//!
//! whose intersection is nonempty exactly when `A ~ B` (take `N = B - M`).
//! Feasibility is reported when the worst eigenvalue violation drops below
//! `feas_tol`, either at the iterate itself or at the iterate with its
//! near-zero slack eigenvalues snapped to zero.
//!
//! Infeasibility is reported when the violation stays above `sep_tol` and
//! either the correction terms yield a dual certificate (see
//! [`farkas_gap`]) or the iterates have stopped moving.

use crate::error::Result;
use crate::hermitian::{psd_project, HermitianMatrix};

use super::{SolverConfig, Verdict};

/// Per-cycle displacement below which a cycle counts as stalled.
pub const STALL_DISPLACEMENT: f64 = 1e-12;
/// Normalized dual gap below which infeasibility counts as certified.
pub const FARKAS_MARGIN: f64 = 1e-9;
/// Snapping is only attempted once the violation is below this.
const SNAP_CEILING: f64 = 1e-2;

#[derive(Debug, Clone, Copy)]
enum Side {
    /// `X >= bound`
    Above,
    /// `X <= bound`
    Below,
}

struct OrderSet {
    bound: HermitianMatrix,
    side: Side,
}

impl OrderSet {
    fn project(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(match self.side {
            Side::Above => &self.bound + &psd_project(&(x - &self.bound))?,
            Side::Below => &self.bound - &psd_project(&(&self.bound - x))?,
        })
    }

    fn slack(&self, x: &HermitianMatrix) -> HermitianMatrix {
        match self.side {
            Side::Above => x - &self.bound,
            Side::Below => &self.bound - x,
        }
    }

    fn from_slack(&self, slack: &HermitianMatrix) -> HermitianMatrix {
        match self.side {
            Side::Above => &self.bound + slack,
            Side::Below => &self.bound - slack,
        }
    }

    fn violation(&self, x: &HermitianMatrix) -> Result<f64> {
        Ok((-self.slack(x).min_eigenvalue()?).max(0.0))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SolverRun {
    pub verdict: Verdict,
    pub m: HermitianMatrix,
    pub residual: f64,
    pub cycles: usize,
}

fn order_sets(a: &HermitianMatrix, b: &HermitianMatrix) -> [OrderSet; 4] {
    let id = HermitianMatrix::identity(a.dim());
    [
        OrderSet { bound: HermitianMatrix::zeros(a.dim()), side: Side::Above },
        OrderSet { bound: a.clone(), side: Side::Below },
        OrderSet { bound: b.clone(), side: Side::Below },
        OrderSet { bound: &(a + b) - &id, side: Side::Above },
    ]
}

/// Largest eigenvalue violation of `m` over the four sets.
pub fn feasibility_residual(m: &HermitianMatrix, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    residual_over(&order_sets(a, b), m)
}

fn residual_over(sets: &[OrderSet], m: &HermitianMatrix) -> Result<f64> {
    let mut r: f64 = 0.0;
    for s in sets {
        r = r.max(s.violation(m)?);
    }
    Ok(r)
}

/// `(A + B - (A + B - I)_+) / 2`.
fn initial_iterate(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    let sum = a + b;
    let excess = psd_project(&(&sum - &HermitianMatrix::identity(a.dim())))?;
    Ok(&(&sum - &excess) * 0.5)
}

/// `(A + B - I)_+`, the least point above both lower bounds. It is feasible
/// whenever it also sits below `A` and `B`, e.g. `M = 0` when `A + B <= I`.
fn lower_corner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    psd_project(&(&(a + b) - &HermitianMatrix::identity(a.dim())))
}

/// Normalized Farkas gap built from the Dykstra corrections.
///
/// The corrections of the three sets `{M <= A}`, `{M <= B}`, `{M >= L}` with
/// `L = A + B - I` lie in their normal cones, so `Y2 = p2`, `Y3 = p3`,
/// `Y4 = -p4` are positive semidefinite. For any feasible `M` (which has
/// `M <= A` and `M <= B`) and `E = Y2 + Y3 - Y4`,
///
///   <Y2, A> + <Y3, B> - <Y4, L> >= <E, M> >= -min(<E_-, A>, <E_-, B>),
///
/// so a negative value of the left side plus that minimum proves the
/// intersection empty. The value is divided by `tr(Y2 + Y3 + Y4)`. Any
/// Hermitian input is accepted; only the first entry is ignored.
pub fn farkas_gap(corrections: &[HermitianMatrix], a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let y2 = psd_project(&corrections[1])?;
    let y3 = psd_project(&corrections[2])?;
    let y4 = psd_project(&-&corrections[3])?;
    let scale = y2.trace() + y3.trace() + y4.trace();
    if !(scale > 0.0) {
        return Ok(f64::INFINITY);
    }
    let lower = &(a + b) - &HermitianMatrix::identity(a.dim());
    let e = &(&y2 + &y3) - &y4;
    let e_neg = psd_project(&-&e)?;
    let slack = inner(&e_neg, a).min(inner(&e_neg, b)).max(0.0);
    let value = inner(&y2, a) + inner(&y3, b) - inner(&y4, &lower) + slack;
    Ok(value / scale)
}

/// Real inner product `tr(X Y)` of Hermitian matrices.
fn inner(x: &HermitianMatrix, y: &HermitianMatrix) -> f64 {
    x.matrix().iter().zip(y.matrix().iter()).map(|(p, q)| (p.conj() * q).re).sum()
}

/// Candidates obtained from `x` by zeroing slack eigenvalues in `(0, tau]`
/// for one set at a time; the best one found is returned with its residual.
fn snap(sets: &[OrderSet], x: &HermitianMatrix, tau: f64) -> Result<Option<(HermitianMatrix, f64)>> {
    let mut best: Option<(HermitianMatrix, f64)> = None;
    for set in sets {
        let e = set.slack(x).eig()?;
        if !e.eigenvalues.iter().any(|&v| v.abs() <= tau) {
            continue;
        }
        let vals: Vec<f64> = e.eigenvalues.iter().map(|&v| if v.abs() <= tau { 0.0 } else { v }).collect();
        let candidate = set.from_slack(&HermitianMatrix::from_spectral(&vals, &e.basis));
        let r = residual_over(sets, &candidate)?;
        if best.as_ref().is_none_or(|(_, rb)| r < *rb) {
            best = Some((candidate, r));
        }
    }
    Ok(best)
}

fn certified_infeasible(
    corrections: &[HermitianMatrix],
    anchor: &[HermitianMatrix],
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<bool> {
    if farkas_gap(corrections, a, b)? < -FARKAS_MARGIN {
        return Ok(true);
    }
    let growth: Vec<HermitianMatrix> = corrections.iter().zip(anchor).map(|(p, q)| p - q).collect();
    Ok(farkas_gap(&growth, a, b)? < -FARKAS_MARGIN)
}

fn should_check(cycle: usize) -> bool {
    cycle <= 10 || cycle % 10 == 0
}

pub(crate) fn solve(a: &HermitianMatrix, b: &HermitianMatrix, cfg: &SolverConfig) -> Result<SolverRun> {
    let sets = order_sets(a, b);
    let mut x = initial_iterate(a, b)?;
    let mut residual = residual_over(&sets, &x)?;
    if residual <= cfg.feas_tol {
        return Ok(SolverRun { verdict: Verdict::Coexistent, m: x, residual, cycles: 0 });
    }
    let corner = lower_corner(a, b)?;
    let corner_residual = residual_over(&sets, &corner)?;
    if corner_residual <= cfg.feas_tol {
        return Ok(SolverRun { verdict: Verdict::Coexistent, m: corner, residual: corner_residual, cycles: 0 });
    }
    let n = a.dim();
    let mut corrections: Vec<HermitianMatrix> = (0..sets.len()).map(|_| HermitianMatrix::zeros(n)).collect();
    let mut stalled = 0usize;
    // Corrections grow linearly when the sets miss each other; their growth
    // since `anchor_cycle` approximates the dual direction without the
    // bounded offset the raw corrections carry.
    let mut anchor = corrections.clone();
    let mut anchor_cycle = 0usize;

    for cycle in 1..=cfg.max_cycles {
        let start = x.clone();
        for (set, p) in sets.iter().zip(corrections.iter_mut()) {
            let shifted = &x + p;
            let y = set.project(&shifted)?;
            *p = &shifted - &y;
            x = y;
        }
        let displacement = x.distance(&start);
        if displacement < STALL_DISPLACEMENT {
            stalled += 1;
        } else {
            stalled = 0;
        }

        let stalled_out = stalled >= cfg.stall_window;
        if should_check(cycle) || stalled_out || cycle == cfg.max_cycles {
            residual = residual_over(&sets, &x)?;
            if residual <= cfg.feas_tol {
                return Ok(SolverRun { verdict: Verdict::Coexistent, m: x, residual, cycles: cycle });
            }
            if residual < SNAP_CEILING && cycle % 10 == 0 {
                for tau in [10.0 * residual, residual.sqrt()] {
                    if let Some((m, r)) = snap(&sets, &x, tau)? {
                        if r <= cfg.feas_tol {
                            return Ok(SolverRun { verdict: Verdict::Coexistent, m, residual: r, cycles: cycle });
                        }
                    }
                }
            }
            if residual > cfg.sep_tol && cycle % 10 == 0 && certified_infeasible(&corrections, &anchor, a, b)? {
                return Ok(SolverRun { verdict: Verdict::NotCoexistent, m: x, residual, cycles: cycle });
            }
        }
        if cycle >= 2 * anchor_cycle.max(5) {
            anchor = corrections.clone();
            anchor_cycle = cycle;
        }
        if stalled_out {
            let verdict = if residual > cfg.sep_tol { Verdict::NotCoexistent } else { Verdict::Indeterminate };
            return Ok(SolverRun { verdict, m: x, residual, cycles: cycle });
        }
    }
    Ok(SolverRun { verdict: Verdict::Indeterminate, m: x, residual, cycles: cfg.max_cycles })
}
