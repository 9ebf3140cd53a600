//! Test-pair generators with ground truth known independently of the solver.
//!
//! Coexistent pairs are built constructively (`B = M + N` with explicit
//! `M <= A`, `N <= I - A`); non-coexistent pairs come from configurations
//! whose answer is exact: a projection against a non-commuting effect, or
//! two rank-one effects whose sum exceeds the identity.

use rand::Rng;
use serde::Serialize;

use crate::coexistence::{sample_coexistent_with_witness, Verdict};
use crate::error::Result;
use crate::hermitian::{direct_sum, Complex64, Effect, HermitianMatrix};
use crate::random::{random_effect_with, random_projection, random_unit_vector, random_unitary_with, stratum_spectrum};

/// Smallest commutator norm accepted for a non-commuting projection pair.
pub const MIN_COMMUTATOR: f64 = 1e-3;
/// Rank-one pairs with `|lambda_max(A + B) - 1|` below this are redrawn.
pub const RANK_ONE_MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RuleKind {
    Scalar,
    ProjectionCommuting,
    ProjectionNonCommuting,
    Commuting,
    RankOne,
}

impl RuleKind {
    pub const ALL: [RuleKind; 5] = [
        RuleKind::Scalar,
        RuleKind::ProjectionCommuting,
        RuleKind::ProjectionNonCommuting,
        RuleKind::Commuting,
        RuleKind::RankOne,
    ];
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Effect,
    pub b: Effect,
    pub truth: Verdict,
}

/// Larger eigenvalue of `a P + b Q` for rank-one projections with `tr(PQ) = overlap`.
pub fn two_level_top(a: f64, b: f64, overlap: f64) -> f64 {
    let s = a + b;
    (s + (s * s - 4.0 * a * b * (1.0 - overlap)).max(0.0).sqrt()) / 2.0
}

fn maybe_swap(rng: &mut impl Rng, a: Effect, b: Effect, truth: Verdict) -> Instance {
    if rng.random_bool(0.5) {
        Instance { a: b, b: a, truth }
    } else {
        Instance { a, b, truth }
    }
}

/// A pair decided exactly by the given rule, with its true verdict.
pub fn rule_instance(rng: &mut impl Rng, dim: usize, kind: RuleKind) -> Result<Instance> {
    match kind {
        RuleKind::Scalar => {
            let t = rng.random_range(0.0..=1.0);
            let b = random_effect_with(rng, dim, None)?;
            Ok(maybe_swap(rng, Effect::scalar(dim, t), b, Verdict::Coexistent))
        }
        RuleKind::ProjectionCommuting => {
            let rank = rng.random_range(1..dim);
            let u = random_unitary_with(rng, dim);
            let mut pvals = vec![0.0; dim];
            pvals[..rank].fill(1.0);
            let p = HermitianMatrix::from_spectral(&pvals, u.matrix());
            let top = random_effect_with(rng, rank, None)?;
            let bottom = random_effect_with(rng, dim - rank, None)?;
            let blocks = [top.into_hermitian(), bottom.into_hermitian()];
            let b = direct_sum(&blocks)?.congruence(u.matrix());
            Ok(maybe_swap(rng, Effect::trusted(p), Effect::trusted(b), Verdict::Coexistent))
        }
        RuleKind::ProjectionNonCommuting => loop {
            let rank = rng.random_range(1..dim);
            let p = random_projection(rng, dim, rank);
            let b = random_effect_with(rng, dim, None)?;
            if p.as_hermitian().commutator_norm(b.as_hermitian()) >= MIN_COMMUTATOR {
                return Ok(maybe_swap(rng, p, b, Verdict::NotCoexistent));
            }
        },
        RuleKind::Commuting => {
            let u = random_unitary_with(rng, dim);
            let a = HermitianMatrix::from_spectral(&stratum_spectrum(rng, dim, 0, 0), u.matrix());
            let b = HermitianMatrix::from_spectral(&stratum_spectrum(rng, dim, 0, 0), u.matrix());
            Ok(Instance { a: Effect::trusted(a), b: Effect::trusted(b), truth: Verdict::Coexistent })
        }
        RuleKind::RankOne => loop {
            let wa = rng.random_range(0.3..=0.95);
            let wb = rng.random_range(0.3..=0.95);
            let x = random_unit_vector(rng, dim);
            let y = random_unit_vector(rng, dim);
            let overlap = x.iter().zip(&y).map(|(p, q)| p.conj() * q).sum::<Complex64>().norm_sqr();
            if 1.0 - overlap < 1e-6 {
                continue;
            }
            let top = two_level_top(wa, wb, overlap);
            if (top - 1.0).abs() < RANK_ONE_MARGIN {
                continue;
            }
            let truth = if top <= 1.0 { Verdict::Coexistent } else { Verdict::NotCoexistent };
            let a = Effect::trusted(HermitianMatrix::rank_one(&x, wa));
            let b = Effect::trusted(HermitianMatrix::rank_one(&y, wb));
            return Ok(Instance { a, b, truth });
        },
    }
}

/// `(A, B)` with `B` drawn from `A`'s coexistent set by construction.
pub fn coexistent_instance(rng: &mut impl Rng, dim: usize) -> Result<Instance> {
    let a = random_effect_with(rng, dim, None)?;
    let seed = rng.random();
    let (b, _) = sample_coexistent_with_witness(&a, 1, seed)?.pop().expect("one sample");
    Ok(Instance { a, b, truth: Verdict::Coexistent })
}

/// A pair whose non-coexistence is exact: either a projection against a
/// non-commuting effect, or an over-unit rank-one pair.
pub fn non_coexistent_instance(rng: &mut impl Rng, dim: usize) -> Result<Instance> {
    if rng.random_bool(0.5) {
        return rule_instance(rng, dim, RuleKind::ProjectionNonCommuting);
    }
    loop {
        let inst = rule_instance(rng, dim, RuleKind::RankOne)?;
        if inst.truth == Verdict::NotCoexistent {
            return Ok(inst);
        }
    }
}

/// Either kind with probability 1/2.
pub fn mixed_instance(rng: &mut impl Rng, dim: usize) -> Result<Instance> {
    if rng.random_bool(0.5) {
        coexistent_instance(rng, dim)
    } else {
        non_coexistent_instance(rng, dim)
    }
}
