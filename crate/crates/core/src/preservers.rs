//! Concrete maps on effect algebras.
//!
//! * standard automorphisms `A -> U A U*` or `U A^t U*`, optionally followed
//!   by `A -> I - A`;
//! * the trace-threshold map, which rescales effects of trace at most one and
//!   is the identity in the middle band of traces;
//! * the block map `E_n -> E_{4n}`, `A -> Diag(A, T A T*, A/2, sum_j 2^-j <x_j, A x_j> G_j)`;
//! * the non-continuous bijective form, which sends each nonscalar pair
//!   `{A, I - A}` to `{U A U*, U (I - A) U*}` in a seeded order and scalars
//!   through a grid bijection.
//!
//! Specs serialize to JSON with matrices in the matrix-document layout.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{EFFECT_TOL, RECONSTRUCTION_TOL};
use crate::error::{Error, Result};
use crate::hermitian::{
    c, conjugate, direct_sum_effects, effect_validate, orthocomplement, CMatrix, Complex64, Effect, HermitianMatrix,
    UnitaryMatrix,
};
use crate::io::MatrixDocument;
use crate::random::{gaussian_matrix, random_unit_vector, random_unitary_with, rng_from_seed, splitmix64};
use crate::strata::is_scalar;

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn encode_vector(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn decode_vector(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| c(re, im)).collect()
}

// ---------------------------------------------------------------------------
// Standard automorphisms

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StandardDoc", into = "StandardDoc")]
pub struct StandardAutomorphismSpec {
    pub u: UnitaryMatrix,
    /// Antiunitary: act on `A^t` instead of `A`.
    pub transpose: bool,
    /// Follow with `A -> I - A`.
    pub perp: bool,
}

#[derive(Serialize, Deserialize)]
struct StandardDoc {
    u: MatrixDocument,
    #[serde(default)]
    transpose: bool,
    #[serde(default)]
    perp: bool,
}

impl TryFrom<StandardDoc> for StandardAutomorphismSpec {
    type Error = Error;
    fn try_from(d: StandardDoc) -> Result<Self> {
        Ok(Self { u: d.u.to_unitary()?, transpose: d.transpose, perp: d.perp })
    }
}

impl From<StandardAutomorphismSpec> for StandardDoc {
    fn from(s: StandardAutomorphismSpec) -> Self {
        Self { u: MatrixDocument::from_matrix(s.u.matrix(), None), transpose: s.transpose, perp: s.perp }
    }
}

impl StandardAutomorphismSpec {
    pub fn identity(n: usize) -> Self {
        Self { u: UnitaryMatrix::identity(n), transpose: false, perp: false }
    }

    pub fn random(rng: &mut impl Rng, n: usize, transpose: bool, perp: bool) -> Self {
        Self { u: random_unitary_with(rng, n), transpose, perp }
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }
}

pub fn apply_standard(spec: &StandardAutomorphismSpec, a: &Effect) -> Result<Effect> {
    let image = conjugate(a, &spec.u, spec.transpose)?;
    Ok(if spec.perp { orthocomplement(&image) } else { image })
}

// ---------------------------------------------------------------------------
// Trace-threshold map

/// The scaling function `f` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ThresholdFunction {
    Identity,
    /// `t^alpha` with `alpha >= 0`.
    Power { alpha: f64 },
}

impl ThresholdFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ThresholdFunction::Identity => t,
            ThresholdFunction::Power { alpha } => t.powf(alpha),
        }
    }

    /// Checks `f(1) = 1`, monotonicity and positivity on a grid of step 1e-3.
    pub fn validate(&self) -> Result<()> {
        if let ThresholdFunction::Power { alpha } = *self {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return Err(Error::InvalidSpec(format!("power exponent must be finite and >= 0, got {alpha}")));
            }
        }
        if (self.eval(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec("f(1) must equal 1".into()));
        }
        let mut prev = self.eval(0.0);
        for k in 1..=1000 {
            let v = self.eval(k as f64 / 1000.0);
            if !(v > 0.0) {
                return Err(Error::InvalidSpec(format!("f must be positive on (0, 1], f({}) = {v}", k as f64 / 1000.0)));
            }
            if v < prev {
                return Err(Error::InvalidSpec("f must be nondecreasing".into()));
            }
            prev = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TraceThresholdDoc", into = "TraceThresholdDoc")]
pub struct TraceThresholdSpec {
    f: ThresholdFunction,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct TraceThresholdDoc {
    f: ThresholdFunction,
    dim: usize,
}

impl TryFrom<TraceThresholdDoc> for TraceThresholdSpec {
    type Error = Error;
    fn try_from(d: TraceThresholdDoc) -> Result<Self> {
        Self::new(d.f, d.dim)
    }
}

impl From<TraceThresholdSpec> for TraceThresholdDoc {
    fn from(s: TraceThresholdSpec) -> Self {
        Self { f: s.f, dim: s.dim }
    }
}

impl TraceThresholdSpec {
    pub fn new(f: ThresholdFunction, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpec(format!("trace-threshold map needs dim >= 2, got {dim}")));
        }
        f.validate()?;
        Ok(Self { f, dim })
    }

    pub fn f(&self) -> ThresholdFunction {
        self.f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `f(tr A) A` below trace 1, `A` up to trace `n - 1`, and `I - phi(I - A)` above.
pub fn apply_trace_threshold(spec: &TraceThresholdSpec, a: &Effect) -> Result<Effect> {
    check_dim(spec.dim, a.dim())?;
    let n = spec.dim as f64;
    let tr = a.trace();
    if tr <= 1.0 {
        Ok(Effect::trusted(a.as_hermitian() * spec.f.eval(tr.max(0.0))))
    } else if tr < n - 1.0 {
        Ok(a.clone())
    } else {
        let perp = orthocomplement(a);
        let scaled = Effect::trusted(perp.as_hermitian() * spec.f.eval(perp.trace().max(0.0)));
        Ok(orthocomplement(&scaled))
    }
}

/// Solves `t f(t) = s` on `[0, 1]` by bisection down to adjacent floats.
fn solve_scaled_trace(f: ThresholdFunction, s: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if (hi * f.eval(hi) - s).abs() < (lo * f.eval(lo) - s).abs() { hi } else { lo };
        }
        if mid * f.eval(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn inverse_low_branch(f: ThresholdFunction, b: &HermitianMatrix) -> HermitianMatrix {
    let s = b.trace();
    if s <= 0.0 {
        return b.clone();
    }
    let t = solve_scaled_trace(f, s.min(1.0));
    b * (t / s)
}

/// Inverse of [`apply_trace_threshold`]; the branch is read off `tr B`.
pub fn trace_threshold_inverse(spec: &TraceThresholdSpec, b: &Effect) -> Result<Effect> {
    check_dim(spec.dim, b.dim())?;
    let n = spec.dim as f64;
    let s = b.trace();
    if s <= 1.0 {
        Ok(Effect::trusted(inverse_low_branch(spec.f, b.as_hermitian())))
    } else if s < n - 1.0 {
        Ok(b.clone())
    } else {
        let low = Effect::trusted(inverse_low_branch(spec.f, orthocomplement(b).as_hermitian()));
        Ok(orthocomplement(&low))
    }
}

// ---------------------------------------------------------------------------
// Block map E_n -> E_4n

pub const DEFAULT_TERMS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockDoc", into = "BlockDoc")]
pub struct BlockCounterexampleSpec {
    t: CMatrix,
    xs: Vec<Vec<Complex64>>,
    gs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct BlockDoc {
    t: MatrixDocument,
    xs: Vec<Vec<[f64; 2]>>,
    gs: Vec<Vec<f64>>,
}

impl TryFrom<BlockDoc> for BlockCounterexampleSpec {
    type Error = Error;
    fn try_from(d: BlockDoc) -> Result<Self> {
        let xs = d.xs.iter().map(|x| decode_vector(x)).collect();
        Self::new(d.t.to_matrix()?, xs, d.gs)
    }
}

impl From<BlockCounterexampleSpec> for BlockDoc {
    fn from(s: BlockCounterexampleSpec) -> Self {
        Self {
            t: MatrixDocument::from_matrix(&s.t, None),
            xs: s.xs.iter().map(|x| encode_vector(x)).collect(),
            gs: s.gs,
        }
    }
}

/// Largest singular value.
fn spectral_norm(t: &CMatrix) -> Result<f64> {
    let gram = HermitianMatrix::symmetrized(t.adjoint() * t);
    Ok(gram.max_eigenvalue()?.max(0.0).sqrt())
}

impl BlockCounterexampleSpec {
    /// `t`: contraction; `xs`: unit vectors; `gs`: diagonals of the
    /// commuting effects `G_j`, one per vector.
    pub fn new(t: CMatrix, xs: Vec<Vec<Complex64>>, gs: Vec<Vec<f64>>) -> Result<Self> {
        let n = t.nrows();
        if n == 0 || t.ncols() != n {
            return Err(Error::BadShape { rows: t.nrows(), cols: t.ncols() });
        }
        let norm = spectral_norm(&t)?;
        if norm > 1.0 + RECONSTRUCTION_TOL {
            return Err(Error::InvalidSpec(format!("T must be a contraction, ||T|| = {norm}")));
        }
        if xs.is_empty() || xs.len() != gs.len() {
            return Err(Error::InvalidSpec(format!(
                "need the same positive number of vectors and diagonals, got {} and {}",
                xs.len(),
                gs.len()
            )));
        }
        for x in &xs {
            check_dim(n, x.len())?;
            let len = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (len - 1.0).abs() > RECONSTRUCTION_TOL {
                return Err(Error::InvalidSpec(format!("functional vectors must be unit, got norm {len}")));
            }
        }
        for g in &gs {
            check_dim(n, g.len())?;
            if g.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidSpec("diagonal entries of G_j must lie in [0, 1]".into()));
            }
        }
        Ok(Self { t, xs, gs })
    }

    /// A random contraction, `terms` random unit vectors and random diagonals.
    pub fn random(rng: &mut impl Rng, n: usize, terms: usize) -> Result<Self> {
        let g = gaussian_matrix(rng, n, n);
        let shrink: f64 = rng.random_range(0.5..=1.0);
        let t = &g * c(shrink / spectral_norm(&g)?, 0.0);
        let xs = (0..terms).map(|_| random_unit_vector(rng, n)).collect();
        let gs = (0..terms).map(|_| (0..n).map(|_| rng.random_range(0.0..=1.0)).collect()).collect();
        Self::new(t, xs, gs)
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn terms(&self) -> usize {
        self.xs.len()
    }
}

/// The four diagonal blocks `A`, `T A T*`, `A / 2`, `sum_j 2^-j <x_j, A x_j> G_j`.
pub fn block_counterexample_blocks(spec: &BlockCounterexampleSpec, a: &Effect) -> Result<[Effect; 4]> {
    let n = spec.dim();
    check_dim(n, a.dim())?;
    let h = a.as_hermitian();
    let contracted = effect_validate(&h.congruence(&spec.t))?;
    let halved = Effect::trusted(h * 0.5);
    let mut diag = vec![0.0; n];
    let mut weight = 1.0;
    for (x, g) in spec.xs.iter().zip(&spec.gs) {
        weight *= 0.5;
        let ax = h.matrix() * CMatrix::from_column_slice(n, 1, x);
        let value: f64 = x.iter().zip(ax.iter()).map(|(p, q)| (p.conj() * q).re).sum();
        for (d, gk) in diag.iter_mut().zip(g) {
            *d += weight * value * gk;
        }
    }
    let commuting = effect_validate(&HermitianMatrix::from_diagonal(&diag))?;
    Ok([a.clone(), contracted, halved, commuting])
}

pub fn apply_block_counterexample(spec: &BlockCounterexampleSpec, a: &Effect) -> Result<Effect> {
    direct_sum_effects(&block_counterexample_blocks(spec, a)?)
}

// ---------------------------------------------------------------------------
// Non-continuous bijective form

pub const GRID_STEPS: usize = 1024;

/// A bijection of the grid `{k / 1024}` given by its values at the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GridBijection(Vec<f64>);

impl TryFrom<Vec<f64>> for GridBijection {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        if values.len() != GRID_STEPS + 1 {
            return Err(Error::InvalidSpec(format!("g table needs {} values, got {}", GRID_STEPS + 1, values.len())));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidSpec("g values must lie in [0, 1]".into()));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec("g table must be injective".into()));
        }
        Ok(Self(values))
    }
}

impl From<GridBijection> for Vec<f64> {
    fn from(g: GridBijection) -> Self {
        g.0
    }
}

fn node(k: usize) -> f64 {
    k as f64 / GRID_STEPS as f64
}

impl GridBijection {
    pub fn identity() -> Self {
        Self((0..=GRID_STEPS).map(node).collect())
    }

    /// `t -> 1 - t`.
    pub fn reflection() -> Self {
        Self((0..=GRID_STEPS).map(|k| node(GRID_STEPS - k)).collect())
    }

    /// A seeded permutation of the grid nodes.
    pub fn shuffled(seed: u64) -> Self {
        let mut values: Vec<f64> = (0..=GRID_STEPS).map(node).collect();
        values.shuffle(&mut rng_from_seed(seed));
        Self(values)
    }

    /// Value at the grid node nearest to `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = (t.clamp(0.0, 1.0) * GRID_STEPS as f64).round() as usize;
        self.0[k]
    }
}

/// Which member of `{U A U*, U (I - A) U*}` a nonscalar `A` receives.
/// Both members of a pair `{A, I - A}` make the same choice, so they always
/// receive distinct images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Selector {
    /// Always `U A U*`.
    First,
    /// A seeded pseudo-random choice per pair.
    Seeded { seed: u64 },
}

/// Pair keys are quantized to this many bits after the binary point.
const SELECTOR_BITS: i32 = 20;

impl Selector {
    fn keeps(&self, a: &Effect) -> bool {
        match *self {
            Selector::First => true,
            Selector::Seeded { seed } => {
                let n = a.dim();
                let w = HermitianMatrix::symmetrized(gaussian_matrix(&mut rng_from_seed(seed), n, n));
                let centered = a.as_hermitian() - &HermitianMatrix::scalar(n, 0.5);
                // |tr(W (A - I/2))| is the same for A and I - A.
                let value: f64 =
                    w.matrix().iter().zip(centered.matrix().iter()).map(|(p, q)| (p.conj() * q).re).sum();
                let key = (value.abs() * 2f64.powi(SELECTOR_BITS)).round() as u64;
                splitmix64(seed ^ key) & 1 == 0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GesDoc", into = "GesDoc")]
pub struct GesSpec {
    pub u: UnitaryMatrix,
    pub transpose: bool,
    pub g: GridBijection,
    pub selector: Selector,
}

#[derive(Serialize, Deserialize)]
struct GesDoc {
    u: MatrixDocument,
    #[serde(default)]
    transpose: bool,
    g: GridBijection,
    selector: Selector,
}

impl TryFrom<GesDoc> for GesSpec {
    type Error = Error;
    fn try_from(d: GesDoc) -> Result<Self> {
        Ok(Self { u: d.u.to_unitary()?, transpose: d.transpose, g: d.g, selector: d.selector })
    }
}

impl From<GesSpec> for GesDoc {
    fn from(s: GesSpec) -> Self {
        Self { u: MatrixDocument::from_matrix(s.u.matrix(), None), transpose: s.transpose, g: s.g, selector: s.selector }
    }
}

impl GesSpec {
    pub fn dim(&self) -> usize {
        self.u.dim()
    }
}

pub fn apply_ges_bijective(spec: &GesSpec, a: &Effect) -> Result<Effect> {
    check_dim(spec.dim(), a.dim())?;
    if is_scalar(a, EFFECT_TOL)? {
        let t = a.trace() / a.dim() as f64;
        return Ok(Effect::scalar(a.dim(), spec.g.eval(t)));
    }
    let chosen = if spec.selector.keeps(a) { a.clone() } else { orthocomplement(a) };
    conjugate(&chosen, &spec.u, spec.transpose)
}

// ---------------------------------------------------------------------------

/// Any of the maps above, tagged by `"map"` in its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum PreserverSpec {
    Standard(StandardAutomorphismSpec),
    TraceThreshold(TraceThresholdSpec),
    BlockCx(BlockCounterexampleSpec),
    Ges(GesSpec),
}

impl PreserverSpec {
    pub const NAMES: [&'static str; 4] = ["standard", "trace-threshold", "block-cx", "ges"];

    pub fn name(&self) -> &'static str {
        match self {
            PreserverSpec::Standard(_) => "standard",
            PreserverSpec::TraceThreshold(_) => "trace-threshold",
            PreserverSpec::BlockCx(_) => "block-cx",
            PreserverSpec::Ges(_) => "ges",
        }
    }

    /// Dimension of the inputs.
    pub fn dim(&self) -> usize {
        match self {
            PreserverSpec::Standard(s) => s.dim(),
            PreserverSpec::TraceThreshold(s) => s.dim(),
            PreserverSpec::BlockCx(s) => s.dim(),
            PreserverSpec::Ges(s) => s.dim(),
        }
    }

    pub fn apply(&self, a: &Effect) -> Result<Effect> {
        match self {
            PreserverSpec::Standard(s) => apply_standard(s, a),
            PreserverSpec::TraceThreshold(s) => apply_trace_threshold(s, a),
            PreserverSpec::BlockCx(s) => apply_block_counterexample(s, a),
            PreserverSpec::Ges(s) => apply_ges_bijective(s, a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coexistence::{decide, SolverConfig};
    use crate::harness::instances::mixed_instance;
    use crate::random::{random_effect, random_unitary};

    fn diag(d: &[f64]) -> Effect {
        Effect::new(HermitianMatrix::from_diagonal(d)).unwrap()
    }

    #[test]
    fn standard_identity_and_perp() {
        let a = random_effect(3, None, 4).unwrap();
        assert_eq!(apply_standard(&StandardAutomorphismSpec::identity(3), &a).unwrap(), a);
        let perp = StandardAutomorphismSpec { perp: true, ..StandardAutomorphismSpec::identity(3) };
        let once = apply_standard(&perp, &a).unwrap();
        assert_eq!(once, orthocomplement(&a));
        assert!(apply_standard(&perp, &once).unwrap().distance(&a) < 1e-15);
    }

    #[test]
    fn standard_maps_preserve_verdicts() {
        let cfg = SolverConfig::default();
        let mut rng = rng_from_seed(21);
        for k in 0..40 {
            let inst = mixed_instance(&mut rng, 3).unwrap();
            let spec = StandardAutomorphismSpec::random(&mut rng, 3, k % 2 == 0, k % 4 < 2);
            let before = decide(&inst.a, &inst.b, &cfg).unwrap().verdict;
            let pa = apply_standard(&spec, &inst.a).unwrap();
            let pb = apply_standard(&spec, &inst.b).unwrap();
            let after = decide(&pa, &pb, &cfg).unwrap().verdict;
            assert!(!before.contradicts(after));
        }
    }

    #[test]
    fn trace_threshold_examples() {
        let spec = TraceThresholdSpec::new(ThresholdFunction::Identity, 3).unwrap();
        let a = diag(&[0.3, 0.2, 0.0]);
        let image = apply_trace_threshold(&spec, &a).unwrap();
        assert!(image.distance(&diag(&[0.15, 0.10, 0.0])) < 1e-15);

        assert_eq!(apply_trace_threshold(&spec, &Effect::zero(3)).unwrap(), Effect::zero(3));
        assert_eq!(apply_trace_threshold(&spec, &Effect::identity(3)).unwrap(), Effect::identity(3));

        let unit_trace = diag(&[0.5, 0.25, 0.25]);
        assert_eq!(apply_trace_threshold(&spec, &unit_trace).unwrap(), unit_trace);
    }

    #[test]
    fn trace_threshold_inverse_examples() {
        let spec = TraceThresholdSpec::new(ThresholdFunction::Identity, 3).unwrap();
        let b = diag(&[0.15, 0.10, 0.0]);
        let a = trace_threshold_inverse(&spec, &b).unwrap();
        assert!(a.distance(&diag(&[0.3, 0.2, 0.0])) < 1e-12);
        assert_eq!(trace_threshold_inverse(&spec, &Effect::zero(3)).unwrap(), Effect::zero(3));
        let middle = diag(&[0.9, 0.6, 0.5]);
        assert_eq!(trace_threshold_inverse(&spec, &middle).unwrap(), middle);
    }

    #[test]
    fn scaled_trace_solver_matches_square_root() {
        let t = solve_scaled_trace(ThresholdFunction::Identity, 0.25);
        assert!((t - 0.5).abs() < 1e-12);
        let t = solve_scaled_trace(ThresholdFunction::Power { alpha: 2.0 }, 0.125);
        assert!((t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn threshold_function_validation() {
        assert!(ThresholdFunction::Power { alpha: 0.0 }.validate().is_ok());
        assert!(ThresholdFunction::Power { alpha: -1.0 }.validate().is_err());
        assert!(TraceThresholdSpec::new(ThresholdFunction::Identity, 1).is_err());
    }

    #[test]
    fn block_map_zero_and_identity() {
        let mut rng = rng_from_seed(8);
        let spec = BlockCounterexampleSpec::random(&mut rng, 2, DEFAULT_TERMS).unwrap();
        let zero = apply_block_counterexample(&spec, &Effect::zero(2)).unwrap();
        assert_eq!(zero.dim(), 8);
        assert_eq!(zero.as_hermitian().frobenius_norm(), 0.0);

        let ones = vec![vec![1.0; 2]; DEFAULT_TERMS];
        let xs = (0..DEFAULT_TERMS).map(|_| random_unit_vector(&mut rng, 2)).collect();
        let plain = BlockCounterexampleSpec::new(CMatrix::identity(2, 2), xs, ones).unwrap();
        let image = apply_block_counterexample(&plain, &Effect::identity(2)).unwrap();
        let total: f64 = (1..=DEFAULT_TERMS).map(|j| 0.5f64.powi(j as i32)).sum();
        let expected = diag(&[1.0, 1.0, 1.0, 1.0, 0.5, 0.5, total, total]);
        assert!(image.distance(&expected) < 1e-14);
    }

    #[test]
    fn block_spec_rejects_expansion() {
        let t = CMatrix::identity(2, 2) * c(1.1, 0.0);
        let xs = vec![vec![c(1.0, 0.0), c(0.0, 0.0)]];
        assert!(BlockCounterexampleSpec::new(t, xs, vec![vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn ges_scalars_and_constant_selector() {
        let u = random_unitary(3, 2);
        let spec = GesSpec { u: u.clone(), transpose: false, g: GridBijection::reflection(), selector: Selector::First };
        let image = apply_ges_bijective(&spec, &Effect::scalar(3, 0.3)).unwrap();
        assert!((image.trace() / 3.0 - 0.7).abs() < 1e-3);

        let a = random_effect(3, None, 5).unwrap();
        let standard = StandardAutomorphismSpec { u, transpose: false, perp: false };
        assert_eq!(apply_ges_bijective(&spec, &a).unwrap(), apply_standard(&standard, &a).unwrap());
    }

    #[test]
    fn ges_pairs_receive_distinct_images() {
        let spec = GesSpec {
            u: random_unitary(3, 9),
            transpose: true,
            g: GridBijection::shuffled(1),
            selector: Selector::Seeded { seed: 77 },
        };
        let mut flips = 0;
        for seed in 0..50 {
            let a = random_effect(3, None, seed).unwrap();
            let pa = apply_ges_bijective(&spec, &a).unwrap();
            let pp = apply_ges_bijective(&spec, &orthocomplement(&a)).unwrap();
            assert!(orthocomplement(&pa).distance(&pp) < 1e-12);
            let direct = conjugate(&a, &spec.u, true).unwrap();
            if pa.distance(&direct) > 1e-9 {
                flips += 1;
            }
        }
        assert!(flips > 5 && flips < 45, "selector flipped {flips} of 50");
    }

    #[test]
    fn grid_bijection_validation() {
        assert!(GridBijection::try_from(vec![0.5; GRID_STEPS + 1]).is_err());
        assert!(GridBijection::try_from(vec![0.0; 3]).is_err());
        let g = GridBijection::shuffled(3);
        assert!(GridBijection::try_from(Vec::from(g)).is_ok());
    }

    #[test]
    fn specs_round_trip_through_json() {
        let mut rng = rng_from_seed(12);
        let specs = [
            PreserverSpec::Standard(StandardAutomorphismSpec::random(&mut rng, 2, true, false)),
            PreserverSpec::TraceThreshold(TraceThresholdSpec::new(ThresholdFunction::Power { alpha: 2.0 }, 4).unwrap()),
            PreserverSpec::BlockCx(BlockCounterexampleSpec::random(&mut rng, 2, 4).unwrap()),
            PreserverSpec::Ges(GesSpec {
                u: random_unitary(2, 1),
                transpose: false,
                g: GridBijection::identity(),
                selector: Selector::Seeded { seed: 3 },
            }),
        ];
        for spec in specs {
            let text = crate::io::to_precise_json(&spec).unwrap();
            assert!(text.contains(&format!("\"map\":\"{}\"", spec.name())));
            let back: PreserverSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
    }
}
