//! Seeded property campaigns and their report.
//!
//! Each suite runs `trials_per_suite` independent trials. Trial `i` uses
//! dimension `dims[i % dims.len()]`, variant `i / dims.len()` (which cycles
//! through the suite's cases) and its own RNG seeded by
//! `mix_seed(seed, suite_id, i)`, so results do not depend on scheduling.

pub mod instances;
mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coexistence::SolverConfig;
use crate::error::{Error, Result};
use crate::hermitian::CMatrix;
use crate::io::{write_document, MatrixDocument};
use crate::random::{mix_seed, rng_from_seed};

/// Failure exemplars kept per suite.
pub const MAX_EXEMPLARS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    LemmaProperties,
    Lem3Roundtrip,
    Convexity,
    Dirsum,
    TheoremConverse,
    Prop1Ccc,
    Prop2Oneway,
    Lem4Witness,
    OracleCrosscheck,
    Reconstruction,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::LemmaProperties,
        Suite::Lem3Roundtrip,
        Suite::Convexity,
        Suite::Dirsum,
        Suite::TheoremConverse,
        Suite::Prop1Ccc,
        Suite::Prop2Oneway,
        Suite::Lem4Witness,
        Suite::OracleCrosscheck,
        Suite::Reconstruction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::LemmaProperties => "lemma_properties",
            Suite::Lem3Roundtrip => "lem3_roundtrip",
            Suite::Convexity => "convexity",
            Suite::Dirsum => "dirsum",
            Suite::TheoremConverse => "theorem_converse",
            Suite::Prop1Ccc => "prop1_ccc",
            Suite::Prop2Oneway => "prop2_oneway",
            Suite::Lem4Witness => "lem4_witness",
            Suite::OracleCrosscheck => "oracle_crosscheck",
            Suite::Reconstruction => "reconstruction",
        }
    }

    /// Stream id used in seed mixing.
    pub fn id(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).expect("listed") as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub dims: Vec<usize>,
    pub trials_per_suite: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub suites: Vec<Suite>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4, 5],
            trials_per_suite: 200,
            seed: 0,
            solver: SolverConfig::default(),
            suites: Suite::ALL.to_vec(),
        }
    }
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().any(|d| !(2..=8).contains(d)) {
            return Err(Error::InvalidSpec(format!("dims must be a nonempty subset of 2..=8, got {:?}", self.dims)));
        }
        if self.trials_per_suite == 0 {
            return Err(Error::InvalidSpec("trials_per_suite must be at least 1".into()));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
}

/// What a single trial produced.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub outcome: Outcome,
    pub residual: f64,
    pub dim: usize,
    pub detail: String,
    pub inputs: Vec<(String, CMatrix)>,
}

impl TrialResult {
    fn new(outcome: Outcome, dim: usize) -> Self {
        Self { outcome, residual: 0.0, dim, detail: String::new(), inputs: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub trial: usize,
    pub dim: usize,
    pub outcome: Outcome,
    pub detail: String,
    pub inputs: BTreeMap<String, MatrixDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
    pub max_residual: f64,
    pub wall_time_seconds: f64,
    /// Failing trials first, then indeterminate ones, at most [`MAX_EXEMPLARS`].
    pub exemplars: Vec<Exemplar>,
}

impl SuiteReport {
    pub fn pass_rate(&self) -> f64 {
        self.pass as f64 / self.trials as f64
    }

    pub fn indeterminate_rate(&self) -> f64 {
        self.indeterminate as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub config: HarnessConfig,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub wall_time_seconds: f64,
}

impl HarnessReport {
    /// Copy with every timing field zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_seconds = 0.0;
        for s in &mut r.suites {
            s.wall_time_seconds = 0.0;
        }
        r
    }

    pub fn suite(&self, suite: Suite) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == suite)
    }
}

/// Per-trial inputs shared by every suite.
pub(crate) struct TrialContext<'a> {
    pub index: usize,
    pub dim: usize,
    pub variant: usize,
    pub seed: u64,
    pub cfg: &'a HarnessConfig,
}

impl TrialContext<'_> {
    pub fn rng(&self) -> crate::random::SeededRng {
        rng_from_seed(self.seed)
    }
}

fn run_trial(suite: Suite, cfg: &HarnessConfig, index: usize) -> TrialResult {
    let len = cfg.dims.len();
    let ctx = TrialContext {
        index,
        dim: cfg.dims[index % len],
        variant: index / len,
        seed: mix_seed(cfg.seed, suite.id(), index as u64),
        cfg,
    };
    suites::run(suite, &ctx).unwrap_or_else(|e| TrialResult {
        detail: format!("error: {e}"),
        ..TrialResult::new(Outcome::Fail, ctx.dim)
    })
}

fn exemplar(index: usize, t: &TrialResult) -> Exemplar {
    Exemplar {
        trial: index,
        dim: t.dim,
        outcome: t.outcome,
        detail: t.detail.clone(),
        inputs: t.inputs.iter().map(|(k, m)| (k.clone(), MatrixDocument::from_matrix(m, None))).collect(),
    }
}

pub fn run_suite(suite: Suite, cfg: &HarnessConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let start = Instant::now();
    let results: Vec<TrialResult> =
        (0..cfg.trials_per_suite).into_par_iter().map(|i| run_trial(suite, cfg, i)).collect();
    let count = |o: Outcome| results.iter().filter(|r| r.outcome == o).count();
    let mut exemplars: Vec<Exemplar> = Vec::new();
    for wanted in [Outcome::Fail, Outcome::Indeterminate] {
        for (i, r) in results.iter().enumerate() {
            if exemplars.len() < MAX_EXEMPLARS && r.outcome == wanted {
                exemplars.push(exemplar(i, r));
            }
        }
    }
    Ok(SuiteReport {
        suite,
        trials: results.len(),
        pass: count(Outcome::Pass),
        fail: count(Outcome::Fail),
        indeterminate: count(Outcome::Indeterminate),
        max_residual: results.iter().map(|r| r.residual).fold(0.0, f64::max),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        exemplars,
    })
}

/// Runs the configured suites in declaration order.
pub fn run_all(cfg: &HarnessConfig) -> Result<HarnessReport> {
    cfg.validate()?;
    let start = Instant::now();
    let selected: Vec<Suite> = Suite::ALL.into_iter().filter(|s| cfg.suites.contains(s)).collect();
    let suites = selected.into_iter().map(|s| run_suite(s, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(HarnessReport { config: cfg.clone(), seed: cfg.seed, suites, wall_time_seconds: start.elapsed().as_secs_f64() })
}

pub fn write_report(report: &HarnessReport, path: &Path) -> Result<()> {
    write_document(path, report)
}
