//! Seeded finite-shot emulation of the three interferometer runs.
//!
//! Randomness comes from ChaCha8 (`rand_chacha` 0.9). A run of kind `k`
//! with seed `s` uses stream `k` of the generator keyed by `s`; shot `n`
//! consumes the 64-bit word at position `2n` of that stream. Shots are
//! split into fixed-size blocks that are sampled in parallel, and since
//! each block seeks to its own position the merged counts do not depend
//! on how the work is scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{self, MZConfig};
use crate::lgi::{self, TwoTimeLGReport};
use crate::qcore::Outcome;

/// Generator name reported in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9)";

const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    /// Output ports `ψ₃`, `ψ₄`.
    Interference,
    /// Arms `ψ₁`, `ψ₂`.
    Path,
    /// Path measurement followed by the output measurement.
    Sequential,
}

impl RunKind {
    pub const ALL: [RunKind; 3] = [RunKind::Interference, RunKind::Path, RunKind::Sequential];

    pub fn name(self) -> &'static str {
        match self {
            RunKind::Interference => "interference",
            RunKind::Path => "path",
            RunKind::Sequential => "sequential",
        }
    }

    fn stream(self) -> u64 {
        match self {
            RunKind::Interference => 0,
            RunKind::Path => 1,
            RunKind::Sequential => 2,
        }
    }

    /// Outcome labels in sampling order.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            RunKind::Interference => &["psi3", "psi4"],
            RunKind::Path => &["psi1", "psi2"],
            RunKind::Sequential => &["m2p_m3p", "m2p_m3m", "m2m_m3p", "m2m_m3m"],
        }
    }
}

impl std::fmt::Display for RunKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RunKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RunKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or(Error::Unsupported("run kind must be interference, path or sequential"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub cfg: MZConfig,
    pub shots: u64,
    pub seed: u64,
    pub kind: RunKind,
}

impl RunSpec {
    pub fn new(cfg: MZConfig, shots: u64, seed: u64, kind: RunKind) -> Result<Self> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(Self { cfg, shots, seed, kind })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEstimate {
    pub kind: RunKind,
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub estimates: Vec<f64>,
    /// `√(p̂(1−p̂)/N)`.
    pub stderr: Vec<f64>,
    /// Rule-of-three 95% upper bound `3/N` for outcomes never observed.
    pub zero_count_upper: Vec<Option<f64>>,
}

impl SampleEstimate {
    pub fn from_counts(kind: RunKind, counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let n = total as f64;
        let estimates: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        let stderr = estimates.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
        let zero_count_upper = counts.iter().map(|&c| (c == 0).then(|| 3.0 / n)).collect();
        Self {
            kind,
            labels: kind.labels().iter().map(|s| s.to_string()).collect(),
            counts,
            total,
            estimates,
            stderr,
            zero_count_upper,
        }
    }

    pub fn estimate(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.estimates[i])
    }
}

/// Outcome probabilities of a run kind, in [`RunKind::labels`] order.
pub fn outcome_probabilities(cfg: &MZConfig, kind: RunKind) -> Result<Vec<f64>> {
    Ok(match kind {
        RunKind::Interference => {
            let (p3, p4) = interferometer::detection_probabilities(cfg);
            vec![p3, p4]
        }
        RunKind::Path => vec![cfg.alpha() * cfg.alpha(), cfg.beta() * cfg.beta()],
        RunKind::Sequential => {
            let pre = interferometer::input_state(cfg)?;
            let m3 = interferometer::effective_output_observable(cfg)?;
            let p = lgi::sequential_joint(&pre, &interferometer::path_observable(), &m3)?;
            vec![p[0][0], p[0][1], p[1][0], p[1][1]]
        }
    })
}

fn uniform(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Index of the first outcome with `u` below its cumulative probability.
/// Zero-probability outcomes are never returned.
fn categorize(u: f64, probs: &[f64]) -> usize {
    let mut cum = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = k;
        if u < cum {
            return k;
        }
    }
    last
}

fn sample_block(spec: &RunSpec, probs: &[f64], start: u64, end: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.kind.stream());
    rng.set_word_pos(2 * start as u128);
    let mut counts = vec![0u64; probs.len()];
    for _ in start..end {
        counts[categorize(uniform(rng.next_u64()), probs)] += 1;
    }
    counts
}

fn run_blocked(spec: &RunSpec, block: u64) -> Result<SampleEstimate> {
    if spec.shots == 0 {
        return Err(Error::ZeroShots);
    }
    let probs = outcome_probabilities(&spec.cfg, spec.kind)?;
    let n_blocks = spec.shots.div_ceil(block);
    let counts = (0..n_blocks)
        .into_par_iter()
        .map(|b| sample_block(spec, &probs, b * block, ((b + 1) * block).min(spec.shots)))
        .reduce(
            || vec![0u64; probs.len()],
            |mut acc, c| {
                acc.iter_mut().zip(c).for_each(|(a, x)| *a += x);
                acc
            },
        );
    Ok(SampleEstimate::from_counts(spec.kind, counts))
}

pub fn run(spec: &RunSpec) -> Result<SampleEstimate> {
    run_blocked(spec, BLOCK)
}

/// The three runs sharing one configuration, shot count and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MzRuns {
    pub interference: SampleEstimate,
    pub path: SampleEstimate,
    pub sequential: SampleEstimate,
}

impl MzRuns {
    pub fn collect(cfg: &MZConfig, shots: u64, seed: u64) -> Result<Self> {
        let go = |kind| run(&RunSpec::new(*cfg, shots, seed, kind)?);
        Ok(Self {
            interference: go(RunKind::Interference)?,
            path: go(RunKind::Path)?,
            sequential: go(RunKind::Sequential)?,
        })
    }
}

fn moment_stderr(e: f64, n: u64) -> f64 {
    ((1.0 - e * e).max(0.0) / n as f64).sqrt()
}

/// LG quantities estimated from data, with one-sigma errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLg {
    pub report: TwoTimeLGReport,
    /// In `K31..K34` order.
    pub stderr: [f64; 4],
    pub e2: f64,
    pub e3: f64,
    pub e23: f64,
    pub e2_stderr: f64,
    pub e3_stderr: f64,
    pub e23_stderr: f64,
}

impl EmpiricalLg {
    /// Values below `−nσ`.
    pub fn significant_violations(&self, n_sigma: f64) -> Vec<lgi::LgIndex> {
        lgi::LgIndex::ALL
            .into_iter()
            .filter(|&i| self.report.get(i) < -n_sigma * self.stderr[i.position()])
            .collect()
    }
}

/// `⟨M₂⟩` from the path run, `⟨M₃⟩` from the interference run and
/// `⟨M₂M₃⟩` from the sequential run.
pub fn empirical_lg_from_runs(runs: &MzRuns) -> EmpiricalLg {
    let i = &runs.interference.estimates;
    let p = &runs.path.estimates;
    let s = &runs.sequential.estimates;
    let e2 = p[0] - p[1];
    let e3 = i[1] - i[0];
    let e23 = s[0] - s[1] - s[2] + s[3];
    let e2_stderr = moment_stderr(e2, runs.path.total);
    let e3_stderr = moment_stderr(e3, runs.interference.total);
    let e23_stderr = moment_stderr(e23, runs.sequential.total);
    let sigma = (e2_stderr.powi(2) + e3_stderr.powi(2) + e23_stderr.powi(2)).sqrt();
    EmpiricalLg {
        report: TwoTimeLGReport::from_values(lgi::lg_values_from_moments(e2, e3, e23)),
        stderr: [sigma; 4],
        e2,
        e3,
        e23,
        e2_stderr,
        e3_stderr,
        e23_stderr,
    }
}

pub fn empirical_lg(cfg: &MZConfig, shots: u64, seed: u64) -> Result<EmpiricalLg> {
    Ok(empirical_lg_from_runs(&MzRuns::collect(cfg, shots, seed)?))
}

/// `p̂(ψ₃)` from the interference run minus its sequential-run marginal,
/// with its standard error. The true value is `αβ` at φ = 0.
pub fn empirical_nsit_from_runs(runs: &MzRuns) -> (f64, f64) {
    let a = runs.interference.estimates[0];
    let s = &runs.sequential.estimates;
    let b = s[Outcome::Minus.index()] + s[2 + Outcome::Minus.index()];
    let na = runs.interference.total as f64;
    let nb = runs.sequential.total as f64;
    let sigma = (a * (1.0 - a) / na + b * (1.0 - b) / nb).sqrt();
    (a - b, sigma)
}

pub fn empirical_nsit(cfg: &MZConfig, shots: u64, seed: u64) -> Result<(f64, f64)> {
    Ok(empirical_nsit_from_runs(&MzRuns::collect(cfg, shots, seed)?))
}
