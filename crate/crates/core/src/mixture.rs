//! Ground-truth mixture model, sampling and analytic oracles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// Tolerance on `sum p_k = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

/// A univariate K-component Gaussian mixture.
///
/// Zero standard deviations are allowed and describe point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
}

impl GaussianMixture {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel(
                "at least one component is required".into(),
            ));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "component {i}: weight must be positive, got {}",
                    c.weight
                )));
            }
            if !c.mean.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "component {i}: mean is not finite"
                )));
            }
            if !(c.std.is_finite() && c.std >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "component {i}: std must be non-negative, got {}",
                    c.std
                )));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "weights sum to {total}, not 1"
            )));
        }
        for i in 0..components.len() {
            for j in i + 1..components.len() {
                if components[i].mean == components[j].mean {
                    return Err(Error::InvalidModel(format!(
                        "components {i} and {j} share the mean {}",
                        components[i].mean
                    )));
                }
            }
        }
        Ok(Self { components })
    }

    /// Builds a mixture after dividing the weights by their sum.
    pub fn normalized(mut components: Vec<Component>) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidModel(format!("weights sum to {total}")));
        }
        for c in &mut components {
            c.weight /= total;
        }
        Self::new(components)
    }

    /// `(weight, mean, std)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        Self::new(
            triples
                .iter()
                .map(|&(weight, mean, std)| Component { weight, mean, std })
                .collect(),
        )
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn means(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.mean).collect()
    }

    /// Density of the mixture at `z`. Point-mass components have no density.
    pub fn pdf(&self, z: f64) -> Result<f64> {
        let mut total = 0.0;
        for (index, c) in self.components.iter().enumerate() {
            if c.std == 0.0 {
                return Err(Error::DegenerateComponent {
                    index,
                    reason: "zero standard deviation has no density".into(),
                });
            }
            total += c.weight * gaussian_density(z, c.mean, c.std);
        }
        Ok(total)
    }

    /// Characteristic function `E[exp(i t Z)]`.
    pub fn exact_cf(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        self.components
            .iter()
            .map(|c| {
                let damping = (-0.5 * c.std * c.std * t * t).exp();
                Complex64::from_polar(c.weight * damping, c.mean * t)
            })
            .sum()
    }

    /// Draws `n` observations; identical `(model, n, seed)` give identical output.
    pub fn sample(&self, n: usize, seed: u64) -> ObservationSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ObservationSet {
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let c = self.pick_component(rng.random::<f64>());
            let z = if c.std == 0.0 {
                c.mean
            } else {
                let x: f64 = StandardNormal.sample(rng);
                c.mean + c.std * x
            };
            values.push(z);
        }
        ObservationSet { values }
    }

    fn pick_component(&self, u: f64) -> &Component {
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                return c;
            }
        }
        self.components.last().expect("mixture is never empty")
    }

    /// Splits the analytic Toeplitz matrix into its rank-K signal part and the
    /// perturbation caused by nonzero component variances.
    pub fn exact_signal_and_perturbation(
        &self,
        order: usize,
        period: f64,
    ) -> Result<(HermitianMatrix, HermitianMatrix)> {
        let k = self.len();
        if order <= k {
            return Err(Error::Order(format!(
                "matrix order {order} must exceed the component count {k}"
            )));
        }
        let roots: Vec<Complex64> = self
            .components
            .iter()
            .map(|c| Complex64::from_polar(1.0, c.mean * period))
            .collect();
        let signal = HermitianMatrix::from_fn(order, |j, l| {
            let lag = l as i64 - j as i64;
            self.components
                .iter()
                .zip(&roots)
                .map(|(c, w)| c.weight * w.powi(lag as i32))
                .sum()
        });
        let perturbation = HermitianMatrix::from_fn(order, |j, l| {
            let lag = l as i64 - j as i64;
            let t = lag as f64 * period;
            self.components
                .iter()
                .zip(&roots)
                .map(|(c, w)| {
                    let alpha = (-0.5 * c.std * c.std * t * t).exp();
                    c.weight * (alpha - 1.0) * w.powi(lag as i32)
                })
                .sum()
        });
        Ok((signal, perturbation))
    }
}

pub fn gaussian_density(z: f64, mean: f64, std: f64) -> f64 {
    let u = (z - mean) / std;
    (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * std)
}

/// N real-valued observations.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    values: Vec<f64>,
}

impl ObservationSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewObservations { needed: 1, got: 0 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "observation {i} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Population variance (divides by N).
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|z| (z - m) * (z - m)).sum::<f64>() / self.len() as f64
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            values: self.values.iter().map(|z| z + offset).collect(),
        }
    }
}
