//! Expectation-Maximization baselines: the standard EM and the constrained
//! EM_c that ties all weights to `1/K` and all variances to one pooled value.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mixture::ObservationSet;

/// Smallest admissible variance in the standard variant.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Responsibility mass under which a component is considered collapsed.
pub const COLLAPSE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmVariant {
    Standard,
    Constrained,
}

impl EmVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            EmVariant::Standard => "standard",
            EmVariant::Constrained => "constrained",
        }
    }
}

impl std::str::FromStr for EmVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(EmVariant::Standard),
            "constrained" => Ok(EmVariant::Constrained),
            other => Err(Error::InvalidParameter(format!(
                "unknown EM variant `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub components: usize,
    pub max_iterations: usize,
    pub log_likelihood_tolerance: f64,
    pub variant: EmVariant,
    pub seed: u64,
    /// Starting variance of every component; `None` uses the sample variance.
    pub initial_variance: Option<f64>,
}

impl EmConfig {
    pub fn new(components: usize, variant: EmVariant, seed: u64) -> Self {
        Self {
            components,
            max_iterations: 100,
            log_likelihood_tolerance: 1e-8,
            variant,
            seed,
            initial_variance: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.components == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.log_likelihood_tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if let Some(v) = self.initial_variance {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "initial variance must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub weights: Vec<f64>,
    /// Log-likelihood of the initial parameters followed by one entry per iteration.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations_used: usize,
}

impl EmFit {
    pub fn final_log_likelihood(&self) -> f64 {
        *self
            .log_likelihood_trace
            .last()
            .expect("trace is never empty")
    }
}

#[derive(Debug, Clone)]
struct Params {
    means: Vec<f64>,
    variances: Vec<f64>,
    weights: Vec<f64>,
}

/// Fits with means drawn uniformly on `[min z, max z]` from `config.seed`.
pub fn em_fit(obs: &ObservationSet, config: &EmConfig) -> Result<EmFit> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (lo, hi) = (obs.min(), obs.max());
    let means: Vec<f64> = (0..config.components)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect();
    em_fit_from(obs, config, &means)
}

/// Fits from explicit initial means; initial variances are the sample
/// variance and initial weights `1/K`.
pub fn em_fit_from(
    obs: &ObservationSet,
    config: &EmConfig,
    initial_means: &[f64],
) -> Result<EmFit> {
    config.validate()?;
    let k = config.components;
    if initial_means.len() != k {
        return Err(Error::LengthMismatch {
            left: initial_means.len(),
            right: k,
        });
    }
    if obs.len() <= k {
        return Err(Error::TooFewObservations {
            needed: k + 1,
            got: obs.len(),
        });
    }
    let spread = match config.initial_variance {
        Some(v) => v,
        None => obs.variance(),
    };
    if !(spread > 0.0) {
        return Err(Error::DegenerateRange { value: obs.min() });
    }
    let mut params = Params {
        means: initial_means.to_vec(),
        variances: vec![spread; k],
        weights: vec![1.0 / k as f64; k],
    };

    let n = obs.len();
    let mut resp = vec![0.0; n * k];
    let mut ll = e_step(obs.values(), &params, &mut resp);
    let mut trace = vec![ll];
    let mut iterations_used = 0;
    for iteration in 1..=config.max_iterations {
        params = m_step(obs.values(), &resp, k, config.variant)?;
        let next = e_step(obs.values(), &params, &mut resp);
        trace.push(next);
        iterations_used = iteration;
        if next - ll < config.log_likelihood_tolerance {
            break;
        }
        ll = next;
    }
    Ok(EmFit {
        means: params.means,
        variances: params.variances,
        weights: params.weights,
        log_likelihood_trace: trace,
        iterations_used,
    })
}

/// Fills `resp` (row-major N x K) and returns the log-likelihood.
fn e_step(z: &[f64], params: &Params, resp: &mut [f64]) -> f64 {
    let k = params.means.len();
    let log_norm: Vec<f64> = params
        .variances
        .iter()
        .zip(&params.weights)
        .map(|(v, w)| w.ln() - 0.5 * (2.0 * PI * v).ln())
        .collect();
    let mut total = 0.0;
    for (n, &x) in z.iter().enumerate() {
        let row = &mut resp[n * k..(n + 1) * k];
        let mut peak = f64::NEG_INFINITY;
        for j in 0..k {
            let d = x - params.means[j];
            row[j] = log_norm[j] - 0.5 * d * d / params.variances[j];
            peak = peak.max(row[j]);
        }
        let mut sum = 0.0;
        for r in row.iter_mut() {
            *r = (*r - peak).exp();
            sum += *r;
        }
        for r in row.iter_mut() {
            *r /= sum;
        }
        total += peak + sum.ln();
    }
    total
}

fn m_step(z: &[f64], resp: &[f64], k: usize, variant: EmVariant) -> Result<Params> {
    let n = z.len();
    let mut mass = vec![0.0; k];
    let mut sums = vec![0.0; k];
    for (i, &x) in z.iter().enumerate() {
        for j in 0..k {
            let g = resp[i * k + j];
            mass[j] += g;
            sums[j] += g * x;
        }
    }
    if let Some(index) = mass.iter().position(|&m| !(m >= COLLAPSE_THRESHOLD)) {
        return Err(Error::DegenerateComponent {
            index,
            reason: "responsibilities collapsed".into(),
        });
    }
    let means: Vec<f64> = sums.iter().zip(&mass).map(|(s, m)| s / m).collect();
    let mut scatter = vec![0.0; k];
    for (i, &x) in z.iter().enumerate() {
        for j in 0..k {
            let d = x - means[j];
            scatter[j] += resp[i * k + j] * d * d;
        }
    }
    let (variances, weights) = match variant {
        EmVariant::Standard => {
            let variances: Vec<f64> = scatter.iter().zip(&mass).map(|(s, m)| s / m).collect();
            if let Some(index) = variances.iter().position(|&v| !(v >= VARIANCE_FLOOR)) {
                return Err(Error::DegenerateComponent {
                    index,
                    reason: format!("variance fell below {VARIANCE_FLOOR:e}"),
                });
            }
            let weights = mass.iter().map(|m| m / n as f64).collect();
            (variances, weights)
        }
        EmVariant::Constrained => {
            let pooled = scatter.iter().sum::<f64>() / n as f64;
            if !(pooled >= VARIANCE_FLOOR) {
                return Err(Error::DegenerateComponent {
                    index: 0,
                    reason: format!("pooled variance fell below {VARIANCE_FLOOR:e}"),
                });
            }
            (vec![pooled; k], vec![1.0 / k as f64; k])
        }
    };
    Ok(Params {
        means,
        variances,
        weights,
    })
}
