//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N ... PASS|FAIL` line to stdout (bypassing capture) before
//! asserting, so the full table shows up in any run.

use std::io::Write;
use std::time::{Duration, Instant};

use coexistence::harness::{run_all, run_suite, HarnessConfig, Suite, SuiteReport};
use coexistence::preservers::{ThresholdFunction, TraceThresholdSpec};
use coexistence::reconstruction::{reconstruct, verify_reconstruction};

fn verdict_line(id: u32, title: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {id:>2} {title:<34} {status}  {detail}").unwrap();
    out.flush().unwrap();
}

fn campaign(suite: Suite, dims: &[usize], trials: usize) -> (SuiteReport, Duration) {
    let cfg = HarnessConfig { dims: dims.to_vec(), trials_per_suite: trials, ..HarnessConfig::default() };
    let start = Instant::now();
    let report = run_suite(suite, &cfg).unwrap();
    (report, start.elapsed())
}

fn counts(r: &SuiteReport) -> String {
    format!("{} trials: {} pass, {} fail, {} indeterminate", r.trials, r.pass, r.fail, r.indeterminate)
}

fn first_exemplar(r: &SuiteReport) -> String {
    r.exemplars.first().map(|e| format!(" | e.g. n={} {}", e.dim, e.detail)).unwrap_or_default()
}

const ALL_DIMS: [usize; 4] = [2, 3, 4, 5];

#[test]
fn criterion_01_fast_path_exactness() {
    let (r, t) = campaign(Suite::LemmaProperties, &ALL_DIMS, 10_000);
    let ok = r.pass == r.trials && t <= Duration::from_secs(60);
    verdict_line(1, "fast-path exactness", ok, &format!("{}, {:.1}s{}", counts(&r), t.as_secs_f64(), first_exemplar(&r)));
    assert!(ok);
}

#[test]
fn criterion_02_solver_cross_check() {
    let (r, t) = campaign(Suite::OracleCrosscheck, &ALL_DIMS, 10_000);
    let ok = r.fail == 0 && r.indeterminate_rate() <= 0.02 && t <= Duration::from_secs(300);
    let detail = format!(
        "{}, indeterminate {:.2}%, {:.1}s{}",
        counts(&r),
        100.0 * r.indeterminate_rate(),
        t.as_secs_f64(),
        first_exemplar(&r)
    );
    verdict_line(2, "solver vs exact cross-check", ok, &detail);
    assert!(ok);
}

#[test]
fn criterion_03_certificate_round_trip() {
    let (r, _) = campaign(Suite::Lem3Roundtrip, &ALL_DIMS, 500);
    let ok = r.pass == 500;
    verdict_line(3, "certificate round-trip", ok, &format!("{}, max round-trip {:e}{}", counts(&r), r.max_residual, first_exemplar(&r)));
    assert!(ok);
}

#[test]
fn criterion_04_blockwise_agreement() {
    let (r, _) = campaign(Suite::Dirsum, &ALL_DIMS, 200);
    let ok = r.fail == 0;
    verdict_line(4, "blockwise agreement (4x4, 6x6)", ok, &format!("{}{}", counts(&r), first_exemplar(&r)));
    assert!(ok);
}

#[test]
fn criterion_05_sampled_convexity() {
    let (r, _) = campaign(Suite::Convexity, &ALL_DIMS, 200);
    let ok = r.fail == 0;
    verdict_line(5, "sampled convexity", ok, &format!("{} (600 interpolants){}", counts(&r), first_exemplar(&r)));
    assert!(ok);
}

#[test]
fn criterion_06_standard_maps_preserve_verdicts() {
    let (r, _) = campaign(Suite::TheoremConverse, &ALL_DIMS, 200 * 4 * 4);
    let ok = r.fail == 0;
    verdict_line(6, "standard maps preserve verdicts", ok, &format!("{}{}", counts(&r), first_exemplar(&r)));
    assert!(ok);
}

#[test]
fn criterion_07_finite_block_map() {
    let (r, _) = campaign(Suite::Prop1Ccc, &[2, 3], 400);
    let ok = r.fail == 0;
    verdict_line(7, "finite-block map preserves verdicts", ok, &format!("{}{}", counts(&r), first_exemplar(&r)));
    assert!(ok);
}

#[test]
fn criterion_08_trace_threshold_map() {
    let (r, _) = campaign(Suite::Prop2Oneway, &[3, 4], 500);
    let ok = r.fail == 0;
    verdict_line(8, "trace-threshold map", ok, &format!("{}, max perp/inverse gap {:e}{}", counts(&r), r.max_residual, first_exemplar(&r)));
    assert!(ok);
}

#[test]
fn criterion_09_reconstruction() {
    let (r, _) = campaign(Suite::Reconstruction, &[2, 3, 4, 5, 6], 50 * 4 * 5);
    let mut smallest = f64::INFINITY;
    for n in [3, 4] {
        for f in [ThresholdFunction::Identity, ThresholdFunction::Power { alpha: 2.0 }] {
            let spec = TraceThresholdSpec::new(f, n).unwrap();
            let map = coexistence::preservers::PreserverSpec::TraceThreshold(spec);
            let residual = match reconstruct(&map, 1e-6) {
                Ok(fit) => verify_reconstruction(&map, &fit, 200, 9).unwrap(),
                Err(_) => f64::INFINITY,
            };
            smallest = smallest.min(residual);
        }
    }
    let ok = r.pass == r.trials && smallest > 1e-2;
    let detail = format!(
        "{}, max error {:e}; trace-threshold verification residual >= {smallest:.3}{}",
        counts(&r),
        r.max_residual,
        first_exemplar(&r)
    );
    verdict_line(9, "reconstruction", ok, &detail);
    assert!(ok);
}

#[test]
fn criterion_10_witness_search() {
    let (r, _) = campaign(Suite::Lem4Witness, &[3], 200);
    let ok = r.pass_rate() >= 0.9;
    verdict_line(10, "witness search (best effort)", ok, &format!("{}, success {:.1}%{}", counts(&r), 100.0 * r.pass_rate(), first_exemplar(&r)));
    assert!(ok);
}

#[test]
fn criterion_11_determinism() {
    let cfg = HarnessConfig::default();
    let start = Instant::now();
    let first = run_all(&cfg).unwrap();
    let t1 = start.elapsed();
    let second = run_all(&cfg).unwrap();
    let t2 = start.elapsed() - t1;
    let same = first.without_timing() == second.without_timing();
    let limit = Duration::from_secs(600);
    let ok = same && first.suites.len() == 10 && t1 <= limit && t2 <= limit;
    let detail = format!("reports identical: {same}, default campaign {:.1}s and {:.1}s", t1.as_secs_f64(), t2.as_secs_f64());
    verdict_line(11, "determinism", ok, &detail);
    assert!(ok);
}
