//! Sampling period selection and characteristic-function samples.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mixture::{GaussianMixture, ObservationSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Empirical,
    Analytic,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Empirical => "empirical",
            Provenance::Analytic => "analytic",
        }
    }
}

/// Samples `phi_0 .. phi_{M-1}` of a characteristic function at multiples of
/// `period`. Negative lags follow from `phi_{-m} = conj(phi_m)` and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CfSamples {
    period: f64,
    values: Vec<Complex64>,
    provenance: Provenance,
}

impl CfSamples {
    pub fn new(period: f64, values: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        check_period(period)?;
        if values.is_empty() {
            return Err(Error::Order("at least one CF sample is required".into()));
        }
        if let Some(m) = values.iter().position(|v| !(v.norm() <= 1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "|phi_{m}| = {} exceeds 1",
                values[m].norm()
            )));
        }
        Ok(Self {
            period,
            values,
            provenance,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `phi_lag` for any `|lag| < M`.
    pub fn at(&self, lag: i64) -> Complex64 {
        let v = self.values[lag.unsigned_abs() as usize];
        if lag < 0 {
            v.conj()
        } else {
            v
        }
    }
}

/// `T_e = 2 pi / (2 (max z - min z))`, half the largest period that keeps
/// the phase-to-mean map unambiguous over the data range.
pub fn sampling_period(obs: &ObservationSet) -> Result<f64> {
    period_for_range(obs.min(), obs.max())
}

pub fn period_for_range(min: f64, max: f64) -> Result<f64> {
    if !(max > min) {
        return Err(Error::DegenerateRange { value: min });
    }
    Ok(2.0 * PI / (2.0 * (max - min)))
}

/// `phi_hat_m = (1/N) sum_n exp(i z_n m T_e)` for `m = 0..M-1`.
pub fn empirical_cf(obs: &ObservationSet, period: f64, order: usize) -> Result<CfSamples> {
    check_period(period)?;
    if order == 0 {
        return Err(Error::Order("at least one CF sample is required".into()));
    }
    let n = obs.len() as f64;
    let mut values = Vec::with_capacity(order);
    values.push(Complex64::new(1.0, 0.0));
    for m in 1..order {
        let t = m as f64 * period;
        let (mut re, mut im) = (0.0, 0.0);
        for &z in obs.values() {
            let (s, c) = (z * t).sin_cos();
            re += c;
            im += s;
        }
        values.push(Complex64::new(re / n, im / n));
    }
    Ok(CfSamples {
        period,
        values,
        provenance: Provenance::Empirical,
    })
}

/// `phi_m = sum_k p_k alpha_{k,m} w_k^m` with `w_k = exp(i a_k T_e)` and
/// `alpha_{k,m} = exp(-sigma_k^2 (m T_e)^2 / 2)`.
pub fn analytic_cf(model: &GaussianMixture, period: f64, order: usize) -> Result<CfSamples> {
    check_period(period)?;
    if order == 0 {
        return Err(Error::Order("at least one CF sample is required".into()));
    }
    let values = (0..order)
        .map(|m| {
            if m == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let t = m as f64 * period;
            model
                .components()
                .iter()
                .map(|c| {
                    let alpha = (-0.5 * c.std * c.std * t * t).exp();
                    let w = Complex64::from_polar(1.0, c.mean * period);
                    c.weight * alpha * w.powi(m as i32)
                })
                .sum()
        })
        .collect();
    Ok(CfSamples {
        period,
        values,
        provenance: Provenance::Analytic,
    })
}

fn check_period(period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sampling period must be positive, got {period}"
        )));
    }
    Ok(())
}
