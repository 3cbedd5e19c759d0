//! Monte Carlo harness: the four six-component scenarios, the `e_r`
//! criterion and seeded, order-stable campaigns.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::cf::analytic_cf;
use crate::em::{em_fit, EmConfig, EmVariant};
use crate::error::{Error, Result};
use crate::mixture::{Component, GaussianMixture};
use crate::spectral::{analytic_period, eigenvalue_spectrum, estimate_means, spectrum_of};

pub const SCENARIO_MEANS: [f64; 6] = [0.0, 1.0, 2.0, 4.0, 5.0, 6.0];
pub const DEFAULT_SIGMAS: [f64; 5] = [0.05, 0.10, 0.15, 0.20, 0.25];
pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.1, 0.2];
pub const DEFAULT_RUNS_PER_CELL: usize = 500;

const UNEQUAL_WEIGHTS: [f64; 6] = [0.2, 0.2, 0.1, 0.2, 0.2, 0.1];
const ALTERNATING_VARIANCE: [f64; 6] = [1.0, 0.5, 1.0, 0.5, 1.0, 0.5];

/// One of the four preset mixtures, scaled by `sigma`.
///
/// | id | variances                    | weights                     |
/// |----|------------------------------|-----------------------------|
/// | 1  | all `sigma^2`                | all 1/6                     |
/// | 2  | alternating `sigma^2, sigma^2/2` | all 1/6                 |
/// | 3  | all `sigma^2`                | 0.2, 0.2, 0.1, 0.2, 0.2, 0.1 |
/// | 4  | as scenario 2                | as scenario 3               |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    id: u8,
    sigma: f64,
}

impl Scenario {
    /// `sigma = 0` is accepted and yields point masses.
    pub fn new(id: u8, sigma: f64) -> Result<Self> {
        if !(1..=4).contains(&id) {
            return Err(Error::InvalidParameter(format!(
                "scenario id must be 1..=4, got {id}"
            )));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        Ok(Self { id, sigma })
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn means(&self) -> Vec<f64> {
        SCENARIO_MEANS.to_vec()
    }

    pub fn mixture(&self) -> GaussianMixture {
        let variance_scale = match self.id {
            2 | 4 => ALTERNATING_VARIANCE,
            _ => [1.0; 6],
        };
        let weights = match self.id {
            3 | 4 => UNEQUAL_WEIGHTS,
            _ => [1.0 / 6.0; 6],
        };
        let components = (0..6)
            .map(|k| Component {
                weight: weights[k],
                mean: SCENARIO_MEANS[k],
                std: self.sigma * variance_scale[k].sqrt(),
            })
            .collect();
        GaussianMixture::new(components).expect("preset scenarios are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimator {
    Spectral,
    EmStandard,
    EmConstrained,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [
        Estimator::Spectral,
        Estimator::EmStandard,
        Estimator::EmConstrained,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Spectral => "spectral",
            Estimator::EmStandard => "em_standard",
            Estimator::EmConstrained => "em_constrained",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown estimator `{s}`")))
    }
}

/// `e_r = || sort(a) - sort(a_hat) ||_inf`.
pub fn error_criterion(true_means: &[f64], estimated: &[f64]) -> Result<f64> {
    if true_means.len() != estimated.len() {
        return Err(Error::LengthMismatch {
            left: true_means.len(),
            right: estimated.len(),
        });
    }
    let mut a = true_means.to_vec();
    let mut b = estimated.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario: u8,
    pub sigma: f64,
    pub run: usize,
    pub seed: u64,
    pub estimator: Estimator,
    /// `+inf` for failed runs.
    pub error: f64,
    pub failed: bool,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub scenarios: Vec<u8>,
    pub sigmas: Vec<f64>,
    pub runs_per_cell: usize,
    pub observations: usize,
    pub order: usize,
    pub estimators: Vec<Estimator>,
    pub base_seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![1, 2, 3, 4],
            sigmas: DEFAULT_SIGMAS.to_vec(),
            runs_per_cell: DEFAULT_RUNS_PER_CELL,
            observations: 200,
            order: 12,
            estimators: vec![Estimator::Spectral, Estimator::EmConstrained],
            base_seed: 0,
            jobs: None,
        }
    }
}

/// Seed of one run, a pure function of its coordinates.
pub fn run_seed(base_seed: u64, scenario: u8, sigma: f64, run: usize) -> u64 {
    let mut h = splitmix64(base_seed);
    for word in [scenario as u64, sigma.to_bits(), run as u64] {
        h = splitmix64(h ^ word);
    }
    h
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs every (scenario, sigma, run) cell and every estimator on the same
/// sampled data. Records are ordered by scenario, sigma, run, then estimator
/// as listed, whatever the thread count.
pub fn run_campaign(config: &CampaignConfig) -> Result<Vec<RunRecord>> {
    if config.runs_per_cell == 0 {
        return Err(Error::InvalidParameter(
            "runs_per_cell must be at least 1".into(),
        ));
    }
    if config.observations < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: config.observations,
        });
    }
    let mut tasks = Vec::new();
    for &id in &config.scenarios {
        for &sigma in &config.sigmas {
            let scenario = Scenario::new(id, sigma)?;
            for run in 0..config.runs_per_cell {
                tasks.push((scenario, run));
            }
        }
    }
    let work = || -> Vec<RunRecord> {
        tasks
            .par_iter()
            .flat_map_iter(|&(scenario, run)| simulate_run(config, scenario, run))
            .collect()
    };
    match config.jobs {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

fn simulate_run(config: &CampaignConfig, scenario: Scenario, run: usize) -> Vec<RunRecord> {
    let seed = run_seed(config.base_seed, scenario.id, scenario.sigma, run);
    let obs = scenario.mixture().sample(config.observations, seed);
    let truth = scenario.means();
    let k = truth.len();
    config
        .estimators
        .iter()
        .map(|&estimator| {
            let start = Instant::now();
            let means = match estimator {
                Estimator::Spectral => estimate_means(&obs, k, config.order).map(|r| r.means),
                Estimator::EmStandard | Estimator::EmConstrained => {
                    let variant = if estimator == Estimator::EmStandard {
                        EmVariant::Standard
                    } else {
                        EmVariant::Constrained
                    };
                    em_fit(&obs, &EmConfig::new(k, variant, splitmix64(seed ^ 0x45_4d)))
                        .map(|f| f.means)
                }
            };
            let wall_time = start.elapsed();
            let error = means.and_then(|m| error_criterion(&truth, &m));
            let (error, failed) = match error {
                Ok(e) if e.is_finite() => (e, false),
                _ => (f64::INFINITY, true),
            };
            RunRecord {
                scenario: scenario.id,
                sigma: scenario.sigma,
                run,
                seed,
                estimator,
                error,
                failed,
                wall_time,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: u8,
    pub sigma: f64,
    pub estimator: Estimator,
    pub threshold: f64,
    pub runs: usize,
    /// Fraction of runs with `e_r < threshold`; failed runs count as misses.
    pub probability: f64,
    pub failures: usize,
    pub median_error: f64,
}

/// One row per (scenario, sigma, estimator, threshold), in ascending key order.
pub fn summarize(records: &[RunRecord], thresholds: &[f64]) -> Vec<SummaryRow> {
    // (scenario, sigma bits, estimator) -> (sigma, errors, failures)
    type Cell = (f64, Vec<f64>, usize);
    let mut cells: BTreeMap<(u8, u64, Estimator), Cell> = BTreeMap::new();
    for r in records {
        let cell = cells
            .entry((r.scenario, r.sigma.to_bits(), r.estimator))
            .or_insert_with(|| (r.sigma, Vec::new(), 0));
        cell.1.push(r.error);
        if r.failed {
            cell.2 += 1;
        }
    }
    let mut rows = Vec::new();
    for ((scenario, _, estimator), (sigma, mut errors, failures)) in cells {
        errors.sort_by(f64::total_cmp);
        let median = median_of_sorted(&errors);
        for &threshold in thresholds {
            let hits = errors.iter().filter(|&&e| e < threshold).count();
            rows.push(SummaryRow {
                scenario,
                sigma,
                estimator,
                threshold,
                runs: errors.len(),
                probability: hits as f64 / errors.len() as f64,
                failures,
                median_error: median,
            });
        }
    }
    rows
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Descending spectrum of `R_M` for one sampled data set.
pub fn eigen_study(
    scenario: Scenario,
    observations: usize,
    order: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let obs = scenario.mixture().sample(observations, seed);
    eigenvalue_spectrum(&obs, order)
}

/// Spectrum of `R_M` from the exact CF, sampled with the period matched to
/// the range of the scenario means.
pub fn analytic_eigen_study(scenario: Scenario, order: usize) -> Result<Vec<f64>> {
    let means = scenario.means();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cf = analytic_cf(&scenario.mixture(), analytic_period(lo, hi)?, order)?;
    spectrum_of(&cf)
}
