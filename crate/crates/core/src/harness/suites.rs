//! One function per suite; each runs a single trial.

use rand::Rng;

use super::instances::{coexistent_instance, mixed_instance, non_coexistent_instance, rule_instance, Instance, RuleKind};
use super::{Outcome, Suite, TrialContext, TrialResult};
use crate::coexistence::{
    decide, decide_blockwise, decide_with_solver, efg_to_mn, mn_to_efg, sample_coexistent, sample_coexistent_with_witness,
    verify_efg, verify_mn, CoexistenceVerdict, Reason, Verdict,
};
use crate::config::{CERT_TOL, ORDER_TOL};
use crate::error::Result;
use crate::hermitian::{direct_sum_effects, loewner_leq, orthocomplement, CMatrix, Complex64, Effect, EigenDecomposition, HermitianMatrix};
use crate::preservers::{
    apply_standard, apply_trace_threshold, block_counterexample_blocks, trace_threshold_inverse, BlockCounterexampleSpec,
    StandardAutomorphismSpec, ThresholdFunction, TraceThresholdSpec, DEFAULT_TERMS,
};
use crate::random::{mix_seed, random_effect_with, random_projection, random_unit_vector, rng_from_seed, SeededRng};
use crate::reconstruction::{phase_distance, reconstruct, verify_reconstruction};

pub(super) fn run(suite: Suite, ctx: &TrialContext) -> Result<TrialResult> {
    match suite {
        Suite::LemmaProperties => lemma_properties(ctx),
        Suite::Lem3Roundtrip => lem3_roundtrip(ctx),
        Suite::Convexity => convexity(ctx),
        Suite::Dirsum => dirsum(ctx),
        Suite::TheoremConverse => theorem_converse(ctx),
        Suite::Prop1Ccc => prop1_ccc(ctx),
        Suite::Prop2Oneway => prop2_oneway(ctx),
        Suite::Lem4Witness => lem4_witness(ctx),
        Suite::OracleCrosscheck => oracle_crosscheck(ctx),
        Suite::Reconstruction => reconstruction(ctx),
    }
}

fn result(outcome: Outcome, dim: usize, residual: f64, detail: String, inputs: Vec<(String, CMatrix)>) -> TrialResult {
    TrialResult { outcome, residual, dim, detail, inputs }
}

fn pair_inputs(a: &Effect, b: &Effect) -> Vec<(String, CMatrix)> {
    vec![("a".into(), a.matrix().clone()), ("b".into(), b.matrix().clone())]
}

/// Compares verdicts against a known truth: any contradiction fails, any
/// indefinite verdict is indeterminate.
fn judge(truth: Verdict, verdicts: &[Verdict]) -> Outcome {
    if verdicts.iter().any(|v| v.contradicts(truth)) {
        Outcome::Fail
    } else if verdicts.iter().all(|v| v.is_definite()) {
        Outcome::Pass
    } else {
        Outcome::Indeterminate
    }
}

/// A coexistent verdict must carry a certificate that checks.
fn witness_checks(a: &Effect, b: &Effect, v: &CoexistenceVerdict) -> bool {
    match (&v.verdict, &v.witness) {
        (Verdict::Coexistent, Some(w)) => verify_mn(a, b, &w.m, &w.n, CERT_TOL),
        (Verdict::Coexistent, None) => false,
        _ => true,
    }
}

fn expected_reason(kind: RuleKind) -> Reason {
    match kind {
        RuleKind::Scalar => Reason::ScalarRule,
        RuleKind::ProjectionCommuting | RuleKind::ProjectionNonCommuting => Reason::ProjectionRule,
        RuleKind::Commuting => Reason::CommuteRule,
        RuleKind::RankOne => Reason::RankOneRule,
    }
}

fn lemma_properties(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let kind = RuleKind::ALL[ctx.variant % RuleKind::ALL.len()];
    let inst = rule_instance(&mut rng, ctx.dim, kind)?;
    let v = decide(&inst.a, &inst.b, &ctx.cfg.solver)?;
    let ok = v.verdict == inst.truth && v.reason == expected_reason(kind) && witness_checks(&inst.a, &inst.b, &v);
    let outcome = if ok { Outcome::Pass } else { Outcome::Fail };
    let detail = format!("{kind:?}: truth {:?}, got {:?} via {:?}", inst.truth, v.verdict, v.reason);
    Ok(result(outcome, ctx.dim, v.residual, detail, pair_inputs(&inst.a, &inst.b)))
}

/// Same instances as `lemma_properties`, decided by the solver alone.
fn oracle_crosscheck(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = rng_from_seed(mix_seed(ctx.cfg.seed, Suite::LemmaProperties.id(), ctx.index as u64));
    let kind = RuleKind::ALL[ctx.variant % RuleKind::ALL.len()];
    let inst = rule_instance(&mut rng, ctx.dim, kind)?;
    let v = decide_with_solver(&inst.a, &inst.b, &ctx.cfg.solver)?;
    let mut outcome = judge(inst.truth, &[v.verdict]);
    if !witness_checks(&inst.a, &inst.b, &v) {
        outcome = Outcome::Fail;
    }
    let detail = format!(
        "{kind:?}: truth {:?}, solver {:?} after {} cycles, residual {:e}",
        inst.truth, v.verdict, v.iterations, v.residual
    );
    Ok(result(outcome, ctx.dim, v.residual, detail, pair_inputs(&inst.a, &inst.b)))
}

fn lem3_roundtrip(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let inst = coexistent_instance(&mut rng, ctx.dim)?;
    let (a, b) = (&inst.a, &inst.b);
    let v = decide_with_solver(a, b, &ctx.cfg.solver)?;
    let inputs = pair_inputs(a, b);
    let w = match (v.verdict, v.witness) {
        (Verdict::Coexistent, Some(w)) => w,
        (verdict, _) => {
            let outcome = if verdict == Verdict::Indeterminate { Outcome::Indeterminate } else { Outcome::Fail };
            return Ok(result(outcome, ctx.dim, v.residual, format!("solver returned {verdict:?}"), inputs));
        }
    };
    let (e, f, g) = match mn_to_efg(&w.m, &w.n, a, b) {
        Ok(t) => t,
        Err(err) => return Ok(result(Outcome::Fail, ctx.dim, v.residual, format!("witness rejected: {err}"), inputs)),
    };
    let (m2, n2) = efg_to_mn(&e, &f, &g, a, b)?;
    let roundtrip = m2.distance(&w.m).max(n2.distance(&w.n));
    let ok = verify_efg(a, b, &e, &f, &g, CERT_TOL) && verify_mn(a, b, &w.m, &w.n, CERT_TOL) && roundtrip <= 1e-12;
    let outcome = if ok { Outcome::Pass } else { Outcome::Fail };
    Ok(result(outcome, ctx.dim, roundtrip, format!("round-trip error {roundtrip:e}"), inputs))
}

const INTERPOLATION: [f64; 3] = [0.25, 0.5, 0.75];

fn convexity(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let a = random_effect_with(&mut rng, ctx.dim, None)?;
    let samples = sample_coexistent(&a, 2, rng.random())?;
    let mut verdicts = Vec::new();
    let mut residual: f64 = 0.0;
    for t in INTERPOLATION {
        let mix = Effect::new(&(samples[0].as_hermitian() * t) + &(samples[1].as_hermitian() * (1.0 - t)))?;
        let v = decide(&a, &mix, &ctx.cfg.solver)?;
        residual = residual.max(v.residual);
        verdicts.push(v.verdict);
    }
    let outcome = judge(Verdict::Coexistent, &verdicts);
    let inputs = vec![
        ("a".into(), a.matrix().clone()),
        ("b1".into(), samples[0].matrix().clone()),
        ("b2".into(), samples[1].matrix().clone()),
    ];
    Ok(result(outcome, ctx.dim, residual, format!("verdicts {verdicts:?}"), inputs))
}

/// Block sizes of the assembled pairs; two blocks each.
const DIRSUM_BLOCKS: [usize; 2] = [2, 3];

fn dirsum(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let k = DIRSUM_BLOCKS[ctx.index % DIRSUM_BLOCKS.len()];
    let pairs: Vec<Instance> = (0..2).map(|_| mixed_instance(&mut rng, k)).collect::<Result<_>>()?;
    let truth = if pairs.iter().all(|p| p.truth == Verdict::Coexistent) {
        Verdict::Coexistent
    } else {
        Verdict::NotCoexistent
    };
    let a_blocks: Vec<Effect> = pairs.iter().map(|p| p.a.clone()).collect();
    let b_blocks: Vec<Effect> = pairs.iter().map(|p| p.b.clone()).collect();
    let blockwise = decide_blockwise(&a_blocks, &b_blocks, &ctx.cfg.solver)?;
    let a = direct_sum_effects(&a_blocks)?;
    let b = direct_sum_effects(&b_blocks)?;
    let whole = decide(&a, &b, &ctx.cfg.solver)?;
    let mut outcome = judge(truth, &[blockwise.verdict, whole.verdict]);
    if whole.verdict.contradicts(blockwise.verdict) {
        outcome = Outcome::Fail;
    }
    let detail = format!("truth {truth:?}, blockwise {:?}, assembled {:?}", blockwise.verdict, whole.verdict);
    Ok(result(outcome, 2 * k, whole.residual.max(blockwise.residual), detail, pair_inputs(&a, &b)))
}

/// Flag combination `(transpose, perp)` for a variant.
fn flags(variant: usize) -> (bool, bool) {
    (variant % 2 == 1, (variant / 2) % 2 == 1)
}

fn theorem_converse(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let (transpose, perp) = flags(ctx.variant);
    let inst = mixed_instance(&mut rng, ctx.dim)?;
    let spec = StandardAutomorphismSpec::random(&mut rng, ctx.dim, transpose, perp);
    let before = decide(&inst.a, &inst.b, &ctx.cfg.solver)?;
    let (pa, pb) = (apply_standard(&spec, &inst.a)?, apply_standard(&spec, &inst.b)?);
    let after = decide(&pa, &pb, &ctx.cfg.solver)?;
    let mut outcome = judge(inst.truth, &[before.verdict, after.verdict]);
    if before.verdict.contradicts(after.verdict) {
        outcome = Outcome::Fail;
    }
    let detail = format!(
        "transpose {transpose}, perp {perp}: truth {:?}, before {:?}, after {:?}",
        inst.truth, before.verdict, after.verdict
    );
    let mut inputs = pair_inputs(&inst.a, &inst.b);
    inputs.push(("u".into(), spec.u.matrix().clone()));
    Ok(result(outcome, ctx.dim, before.residual.max(after.residual), detail, inputs))
}

fn prop1_ccc(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let inst = if ctx.variant % 2 == 0 {
        coexistent_instance(&mut rng, ctx.dim)?
    } else {
        non_coexistent_instance(&mut rng, ctx.dim)?
    };
    let spec = BlockCounterexampleSpec::random(&mut rng, ctx.dim, DEFAULT_TERMS)?;
    let before = decide(&inst.a, &inst.b, &ctx.cfg.solver)?;
    let image_a = block_counterexample_blocks(&spec, &inst.a)?;
    let image_b = block_counterexample_blocks(&spec, &inst.b)?;
    let after = decide_blockwise(&image_a, &image_b, &ctx.cfg.solver)?;
    let mut outcome = judge(inst.truth, &[before.verdict, after.verdict]);
    if before.verdict.contradicts(after.verdict) {
        outcome = Outcome::Fail;
    }
    let detail = format!("truth {:?}, before {:?}, image {:?}", inst.truth, before.verdict, after.verdict);
    Ok(result(outcome, ctx.dim, before.residual.max(after.residual), detail, pair_inputs(&inst.a, &inst.b)))
}

/// An effect whose trace falls in the low band, the high band or anywhere,
/// so that every branch of the trace-threshold map gets exercised.
fn banded_effect(rng: &mut SeededRng, n: usize) -> Result<Effect> {
    let a = random_effect_with(rng, n, None)?;
    let band = rng.random_range(0..3);
    if band == 2 {
        return Ok(a);
    }
    let target: f64 = rng.random_range(0.05..=1.0);
    let low = Effect::new(a.as_hermitian() * (target / a.trace()).min(1.0))?;
    Ok(if band == 0 { low } else { orthocomplement(&low) })
}

/// `B = A + (I - A)^{1/2} R (I - A)^{1/2}` for a random effect `R`, so `A <= B <= I`.
fn dominating_effect(rng: &mut SeededRng, a: &Effect) -> Result<Effect> {
    let r = random_effect_with(rng, a.dim(), None)?;
    let scale: f64 = rng.random_range(0.0..=1.0);
    let root = orthocomplement(a).as_hermitian().sqrt_psd()?;
    let gap = (r.as_hermitian() * scale).congruence(root.matrix());
    Effect::new(a.as_hermitian() + &gap)
}

fn prop2_oneway(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let f = if ctx.variant % 2 == 0 { ThresholdFunction::Identity } else { ThresholdFunction::Power { alpha: 2.0 } };
    let spec = TraceThresholdSpec::new(f, ctx.dim)?;
    let phi = |x: &Effect| apply_trace_threshold(&spec, x);

    let a = banded_effect(&mut rng, ctx.dim)?;
    let image = phi(&a)?;
    let perp_gap = phi(&orthocomplement(&a))?.distance(&orthocomplement(&image));
    let inverse_gap = trace_threshold_inverse(&spec, &image)?.distance(&a);

    let b = dominating_effect(&mut rng, &a)?;
    let ordered = loewner_leq(image.as_hermitian(), phi(&b)?.as_hermitian(), ORDER_TOL)?;

    let (c, _) = sample_coexistent_with_witness(&a, 1, rng.random())?.pop().expect("one sample");
    let v = decide(&image, &phi(&c)?, &ctx.cfg.solver)?;

    let mut problems = Vec::new();
    if perp_gap > 1e-12 {
        problems.push(format!("orthocomplement gap {perp_gap:e}"));
    }
    if inverse_gap > 1e-9 {
        problems.push(format!("inverse gap {inverse_gap:e}"));
    }
    if !ordered {
        problems.push("order not preserved".to_string());
    }
    if v.verdict == Verdict::NotCoexistent {
        problems.push("coexistent pair mapped to a non-coexistent one".to_string());
    }
    let outcome = if !problems.is_empty() {
        Outcome::Fail
    } else if v.verdict == Verdict::Indeterminate {
        Outcome::Indeterminate
    } else {
        Outcome::Pass
    };
    let inputs = vec![
        ("a".into(), a.matrix().clone()),
        ("b_above".into(), b.matrix().clone()),
        ("c_coexistent".into(), c.matrix().clone()),
    ];
    let detail = format!("{f:?}: {}", if problems.is_empty() { "ok".to_string() } else { problems.join("; ") });
    Ok(result(outcome, ctx.dim, perp_gap.max(inverse_gap), detail, inputs))
}

/// Minimum distance of `B` from both `A` and `A^perp`.
const LEM4_SEPARATION: f64 = 0.05;
/// Sampled candidates per side before giving up.
const LEM4_SAMPLES: usize = 20;
/// Random directions scored for rank-one probes, and how many get tested.
const LEM4_DIRECTIONS: usize = 64;
const LEM4_PROBES: usize = 8;

/// Largest `t` with `t x x* ~ A` for a unit vector `x`:
/// `1 / <x, A^-1 x> + 1 / <x, (I-A)^-1 x>`, capped at 1.
fn rank_one_capacity(eig: &EigenDecomposition, x: &[Complex64]) -> f64 {
    let (mut low, mut high) = (0.0, 0.0);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let w = eig.basis.column(k).iter().zip(x).map(|(v, y)| v.conj() * y).sum::<Complex64>().norm_sqr();
        if w > 0.0 {
            low += w / lambda.max(0.0);
            high += w / (1.0 - lambda).max(0.0);
        }
    }
    (1.0 / low + 1.0 / high).min(1.0)
}

/// Scaled rank-one effects `t x x*` whose weight lies strictly between the
/// capacities for `a` and `b`, best separated first. Each entry records
/// whether the probe sits under `a`'s capacity.
fn rank_one_probes(rng: &mut SeededRng, a: &Effect, b: &Effect) -> Result<Vec<(Effect, bool)>> {
    let (ea, eb) = (a.as_hermitian().eig()?, b.as_hermitian().eig()?);
    let mut scored: Vec<(f64, Vec<Complex64>, f64, f64)> = (0..LEM4_DIRECTIONS)
        .map(|_| {
            let x = random_unit_vector(rng, a.dim());
            let (ca, cb) = (rank_one_capacity(&ea, &x), rank_one_capacity(&eb, &x));
            ((ca - cb).abs(), x, ca, cb)
        })
        .collect();
    scored.sort_by(|p, q| q.0.total_cmp(&p.0));
    scored
        .into_iter()
        .take(LEM4_PROBES)
        .filter(|s| s.0 > 1e-3)
        .map(|(_, x, ca, cb)| Ok((Effect::new(HermitianMatrix::rank_one(&x, 0.5 * (ca + cb)))?, ca > cb)))
        .collect()
}

/// Eigenprojections `v v*` of `a`.
fn eigenprojections(a: &Effect) -> Result<Vec<Effect>> {
    let e = a.as_hermitian().eig()?;
    (0..a.dim()).map(|k| Effect::new(HermitianMatrix::rank_one(&e.eigenvector(k), 1.0))).collect()
}

/// An extremal element of `a`'s coexistent set: `A^{1/2} P A^{1/2} + (I-A)^{1/2} Q (I-A)^{1/2}`
/// for random projections `P`, `Q`.
fn extremal_partner(rng: &mut SeededRng, a: &Effect, root: &HermitianMatrix, root_perp: &HermitianMatrix) -> Result<Effect> {
    let n = a.dim();
    let rank_p = rng.random_range(1..=n);
    let rank_q = rng.random_range(0..n);
    let p = random_projection(rng, n, rank_p);
    let q = random_projection(rng, n, rank_q);
    Effect::new(&p.as_hermitian().congruence(root.matrix()) + &q.as_hermitian().congruence(root_perp.matrix()))
}

fn lem4_witness(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let n = ctx.dim;
    let commuting = ctx.variant % 2 == 1;
    let (a, b) = loop {
        let a = random_effect_with(&mut rng, n, None)?;
        let b = if commuting {
            let basis = a.as_hermitian().eig()?.basis;
            let vals: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
            Effect::new(HermitianMatrix::from_spectral(&vals, &basis))?
        } else {
            random_effect_with(&mut rng, n, None)?
        };
        if b.distance(&a) > LEM4_SEPARATION && b.distance(&orthocomplement(&a)) > LEM4_SEPARATION {
            break (a, b);
        }
    };

    // Each candidate coexists with `own` by construction; it is a witness
    // when the oracle says it does not coexist with `other`.
    let mut tried = 0;
    let mut indeterminate = false;
    let mut check = |c: &Effect, other: &Effect| -> Result<bool> {
        tried += 1;
        let v = decide(c, other, &ctx.cfg.solver)?;
        indeterminate |= v.verdict == Verdict::Indeterminate;
        Ok(v.verdict == Verdict::NotCoexistent)
    };
    let mut found = None;
    'search: {
        for (own, other, label) in [(&a, &b, "A"), (&b, &a, "B")] {
            for p in eigenprojections(own)? {
                if check(&p, other)? {
                    found = Some((p, label, "eigenprojection"));
                    break 'search;
                }
            }
        }
        for (c, under_a) in rank_one_probes(&mut rng, &a, &b)? {
            let (other, label) = if under_a { (&b, "A") } else { (&a, "B") };
            if check(&c, other)? {
                found = Some((c, label, "rank-one probe"));
                break 'search;
            }
        }
        let roots = [
            (a.as_hermitian().sqrt_psd()?, orthocomplement(&a).as_hermitian().sqrt_psd()?),
            (b.as_hermitian().sqrt_psd()?, orthocomplement(&b).as_hermitian().sqrt_psd()?),
        ];
        for _ in 0..LEM4_SAMPLES {
            for ((own, other, label), (root, root_perp)) in [(&a, &b, "A"), (&b, &a, "B")].into_iter().zip(&roots) {
                let c = extremal_partner(&mut rng, own, root, root_perp)?;
                if check(&c, other)? {
                    found = Some((c, label, "extremal sample"));
                    break 'search;
                }
            }
        }
    }

    let mut inputs = pair_inputs(&a, &b);
    let kind = if commuting { "commuting" } else { "generic" };
    let (outcome, detail) = match found {
        Some((c, label, how)) => {
            inputs.push(("c".into(), c.matrix().clone()));
            (Outcome::Pass, format!("{kind}: {how} coexistent with {label} only, after {tried} candidates"))
        }
        None if indeterminate => (Outcome::Indeterminate, format!("{kind}: no witness in {tried} candidates")),
        None => (Outcome::Fail, format!("{kind}: no witness in {tried} candidates")),
    };
    Ok(result(outcome, n, 0.0, detail, inputs))
}

/// Probe tolerance for fitting the standard maps.
const FIT_TOL: f64 = 1e-6;
/// Random effects used to verify each fitted map.
const VERIFY_TRIALS: usize = 20;

fn reconstruction(ctx: &TrialContext) -> Result<TrialResult> {
    let mut rng = ctx.rng();
    let (transpose, perp) = flags(ctx.variant);
    let spec = StandardAutomorphismSpec::random(&mut rng, ctx.dim, transpose, perp);
    let inputs = vec![("u".into(), spec.u.matrix().clone())];
    let fit = match reconstruct(&spec, FIT_TOL) {
        Ok(r) => r,
        Err(e) => return Ok(result(Outcome::Fail, ctx.dim, 0.0, format!("reconstruction failed: {e}"), inputs)),
    };
    let u_error = phase_distance(fit.u.matrix(), spec.u.matrix());
    let verify = verify_reconstruction(&spec, &fit, VERIFY_TRIALS, rng.random())?;
    let ok = fit.antiunitary == transpose && fit.perp == perp && u_error <= 1e-8 && verify <= 1e-7;
    let detail = format!(
        "flags ({transpose}, {perp}) recovered as ({}, {}), U error {u_error:e}, verification {verify:e}",
        fit.antiunitary, fit.perp
    );
    let outcome = if ok { Outcome::Pass } else { Outcome::Fail };
    Ok(result(outcome, ctx.dim, u_error.max(verify), detail, inputs))
}
