//! Repeated-draw z-test audit.
//!
//! Over `n` draws with win probability `p = W / P`, each participant's win
//! count `X` is standardized as `z = (X - n p) / sqrt(n p (1 - p))`. The audit
//! passes when every `|z|` is below `z_max` (two-sided). For `p` of 0 or 1 the
//! denominator vanishes; such trials are flagged degenerate and pass.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::hash::{sha256, Hash32};
use crate::lottery::{fisher_yates_draw, LotteryError, ParticipantDigest};

/// Below this many runs the normal approximation is not trusted.
pub const MIN_RUNS: usize = 30;
pub const DEFAULT_Z_MAX: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FairnessError {
    #[error("{runs} runs is below the minimum of {MIN_RUNS}")]
    InsufficientRuns { runs: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Draw(#[from] LotteryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantTally {
    pub digest: ParticipantDigest,
    pub wins: u64,
    /// `None` when the trial is degenerate.
    pub z_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub runs: usize,
    pub num_winners: usize,
    pub num_participants: usize,
    pub win_probability: f64,
    pub per_participant: Vec<ParticipantTally>,
    pub z_max: f64,
    pub degenerate: bool,
    pub passed: bool,
}

impl FairnessReport {
    pub fn max_abs_z(&self) -> Option<f64> {
        self.per_participant
            .iter()
            .filter_map(|t| t.z_score.map(f64::abs))
            .reduce(f64::max)
    }

    pub fn win_counts(&self) -> Vec<u64> {
        self.per_participant.iter().map(|t| t.wins).collect()
    }

    /// Tab-separated export: `#`-prefixed summary lines, a header row, then
    /// one `digest<TAB>wins<TAB>z_score` row per participant. Degenerate
    /// z-scores are written as `UNDEFINED`.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# runs={}", self.runs);
        let _ = writeln!(
            out,
            "# win_probability={}/{}",
            self.num_winners, self.num_participants
        );
        let _ = writeln!(out, "# z_max={}", self.z_max);
        let _ = writeln!(out, "# degenerate={}", self.degenerate);
        let _ = writeln!(out, "# passed={}", self.passed);
        out.push_str("digest\twins\tz_score\n");
        for t in &self.per_participant {
            let z = t
                .z_score
                .map(|z| format!("{z:.12}"))
                .unwrap_or_else(|| crate::lottery::UNDEFINED.to_string());
            let _ = writeln!(out, "{}\t{}\t{}", t.digest, t.wins, z);
        }
        out
    }
}

/// `(wins - n p) / sqrt(n p (1 - p))`, or `None` when `p` is 0 or 1.
pub fn z_score(wins: u64, runs: usize, p: f64) -> Option<f64> {
    let n = runs as f64;
    let variance = n * p * (1.0 - p);
    (variance > 0.0).then(|| (wins as f64 - n * p) / variance.sqrt())
}

/// Reproducible audit seeds: `s1 = SHA-256(audit_seed)`, `s(k+1) = SHA-256(s(k))`.
pub fn audit_seed_schedule(audit_seed: &[u8], runs: usize) -> Vec<Hash32> {
    let mut out = Vec::with_capacity(runs);
    let mut s = sha256(&[audit_seed]);
    for _ in 0..runs {
        out.push(s);
        s = sha256(&[s.as_bytes()]);
    }
    out
}

pub fn run_fairness_trial(
    members: &[ParticipantDigest],
    num_winners: usize,
    runs: usize,
    seed_schedule: &[Hash32],
    z_max: f64,
) -> Result<FairnessReport, FairnessError> {
    run_fairness_trial_with(fisher_yates_draw, members, num_winners, runs, seed_schedule, z_max)
}

/// Same as [`run_fairness_trial`] with a caller-supplied draw function.
pub fn run_fairness_trial_with<D>(
    draw: D,
    members: &[ParticipantDigest],
    num_winners: usize,
    runs: usize,
    seed_schedule: &[Hash32],
    z_max: f64,
) -> Result<FairnessReport, FairnessError>
where
    D: Fn(&[ParticipantDigest], usize, &Hash32) -> Result<Vec<ParticipantDigest>, LotteryError>,
{
    if runs != seed_schedule.len() {
        return Err(FairnessError::InvalidParameter(format!(
            "runs = {runs} but the seed schedule has {} entries",
            seed_schedule.len()
        )));
    }
    if runs < MIN_RUNS {
        return Err(FairnessError::InsufficientRuns { runs });
    }
    if members.is_empty() {
        return Err(LotteryError::EmptyEvent.into());
    }
    if num_winners == 0 || num_winners > members.len() {
        return Err(LotteryError::TooManyWinners {
            winners: num_winners,
            participants: members.len(),
        }
        .into());
    }
    if z_max.is_nan() || z_max <= 0.0 {
        return Err(FairnessError::InvalidParameter("z_max must be positive".into()));
    }

    let index: HashMap<&ParticipantDigest, usize> =
        members.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut wins = vec![0u64; members.len()];
    for seed in seed_schedule {
        for w in draw(members, num_winners, seed)? {
            let i = index.get(&w).ok_or_else(|| {
                FairnessError::InvalidParameter(format!("draw returned non-member {w}"))
            })?;
            wins[*i] += 1;
        }
    }

    let p = num_winners as f64 / members.len() as f64;
    let degenerate = num_winners == members.len();
    let per_participant: Vec<ParticipantTally> = members
        .iter()
        .zip(&wins)
        .map(|(d, &x)| ParticipantTally {
            digest: *d,
            wins: x,
            z_score: if degenerate { None } else { z_score(x, runs, p) },
        })
        .collect();
    let passed = degenerate
        || per_participant
            .iter()
            .all(|t| t.z_score.is_some_and(|z| z.abs() < z_max));

    Ok(FairnessReport {
        runs,
        num_winners,
        num_participants: members.len(),
        win_probability: p,
        per_participant,
        z_max,
        degenerate,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `counts` against the uniform distribution.
pub fn chi_square_uniformity(counts: &[u64]) -> Option<ChiSquare> {
    if counts.len() < 2 {
        return None;
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = counts.len() - 1;
    let p_value = ChiSquared::new(dof as f64).ok()?.sf(statistic);
    Some(ChiSquare {
        statistic,
        degrees_of_freedom: dof,
        p_value,
    })
}
