//! Subspace estimator of the component means.
//!
//! The Toeplitz matrix `R_M` of CF samples is the autocorrelation matrix of a
//! sum of `K` complex exponentials `w_k = exp(i a_k T_e)` with powers `p_k`,
//! plus a perturbation that vanishes as the component variances go to zero.
//! The `M - K` weakest eigenvectors span (approximately) the space orthogonal
//! to the steering vectors `(1, w_k, ..., w_k^{M-1})^H`, so the polynomial
//! built from the diagonal sums of `V V^H` vanishes at every `w_k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cf::{empirical_cf, period_for_range, sampling_period, CfSamples};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexPolynomial, HermitianMatrix};
use crate::mixture::ObservationSet;

/// Roots with `|y| <= 1 + UNIT_CIRCLE_TOLERANCE` count as inside the unit circle.
pub const UNIT_CIRCLE_TOLERANCE: f64 = 1e-6;

/// Candidates closer than this to an already selected root are treated as the
/// other half of a numerically split double root on the unit circle.
pub const DUPLICATE_ROOT_RADIUS: f64 = 1e-4;

pub fn default_order(components: usize) -> usize {
    2 * components
}

/// Hermitian Toeplitz matrix with entry `(j, l) = phi_{l-j}`.
#[derive(Debug, Clone)]
pub struct ToeplitzCfMatrix {
    samples: CfSamples,
    matrix: HermitianMatrix,
}

impl ToeplitzCfMatrix {
    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn samples(&self) -> &CfSamples {
        &self.samples
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

pub fn build_rm(cf: &CfSamples) -> Result<ToeplitzCfMatrix> {
    let order = cf.len();
    if order < 2 {
        return Err(Error::Order(format!(
            "need at least 2 CF samples to build R_M, got {order}"
        )));
    }
    let matrix = HermitianMatrix::from_fn(order, |j, l| cf.at(l as i64 - j as i64));
    Ok(ToeplitzCfMatrix {
        samples: cf.clone(),
        matrix,
    })
}

#[derive(Debug, Clone)]
pub struct SubspaceDecomposition {
    /// All `M` eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of the `M - K` smallest eigenvalues.
    pub noise_basis: Vec<Vec<Complex64>>,
    pub signal_dim: usize,
}

impl SubspaceDecomposition {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn decompose(r: &ToeplitzCfMatrix, signal_dim: usize) -> Result<SubspaceDecomposition> {
    let order = r.order();
    if signal_dim == 0 || signal_dim >= order {
        return Err(Error::Order(format!(
            "signal dimension {signal_dim} must satisfy 1 <= K < M = {order}"
        )));
    }
    let eig = linalg::eigh(r.matrix())?;
    let noise_basis = eig.eigenvectors[signal_dim..].to_vec();
    Ok(SubspaceDecomposition {
        eigenvalues: eig.eigenvalues,
        noise_basis,
        signal_dim,
    })
}

/// Root-MUSIC polynomial `y^{M-1} sum_j t_{-j} y^j`, where `t_j` is the sum of
/// the `j`-th diagonal of `V V^H` (`t_0` the trace, `j > 0` above the main
/// diagonal). Coefficient `n` is `t_{M-1-n}`, so the coefficients are
/// conjugate-reciprocal.
pub fn noise_polynomial(s: &SubspaceDecomposition) -> Result<ComplexPolynomial> {
    if s.noise_basis.is_empty() {
        return Err(Error::Order("noise subspace is empty".into()));
    }
    let m = s.order();
    let mut projector = vec![Complex64::new(0.0, 0.0); m * m];
    for v in &s.noise_basis {
        for i in 0..m {
            for l in 0..m {
                projector[i * m + l] += v[i] * v[l].conj();
            }
        }
    }
    let diagonal_sum = |j: i64| -> Complex64 {
        (0..m as i64)
            .filter_map(|i| {
                let l = i + j;
                (0..m as i64)
                    .contains(&l)
                    .then(|| projector[i as usize * m + l as usize])
            })
            .sum()
    };
    let coefficients = (0..2 * m - 1)
        .map(|n| diagonal_sum(m as i64 - 1 - n as i64))
        .collect();
    ComplexPolynomial::new(coefficients)
}

/// Pairs of roots closer than [`DUPLICATE_ROOT_RADIUS`] are a numerically split
/// double root (the noise polynomial is non-negative on the unit circle, so
/// its zeros there are even). Both members are replaced by the zero of the
/// derivative started from their midpoint.
pub fn merge_double_roots(poly: &ComplexPolynomial, roots: &[Complex64]) -> Vec<Complex64> {
    let mut merged = roots.to_vec();
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let partner = (i + 1..roots.len()).filter(|&j| !used[j]).min_by(|&a, &b| {
            (roots[a] - roots[i])
                .norm()
                .total_cmp(&(roots[b] - roots[i]).norm())
        });
        let Some(j) = partner else { continue };
        if (roots[j] - roots[i]).norm() > DUPLICATE_ROOT_RADIUS {
            continue;
        }
        let midpoint = 0.5 * (roots[i] + roots[j]);
        let refined = linalg::refine_double_root(poly, midpoint);
        if (refined - midpoint).norm() <= DUPLICATE_ROOT_RADIUS {
            merged[i] = refined;
            merged[j] = refined;
        }
        used[i] = true;
        used[j] = true;
    }
    merged
}

/// Keeps the roots inside the unit circle (with tolerance) and returns the `K`
/// closest to it, sorted by phase.
pub fn select_roots(all_roots: &[Complex64], count: usize) -> Result<Vec<Complex64>> {
    let mut candidates: Vec<Complex64> = all_roots
        .iter()
        .copied()
        .filter(|y| y.norm() <= 1.0 + UNIT_CIRCLE_TOLERANCE)
        .collect();
    candidates.sort_by(|a, b| {
        let da = (1.0 - a.norm()).abs();
        let db = (1.0 - b.norm()).abs();
        da.total_cmp(&db).then(a.arg().total_cmp(&b.arg()))
    });
    let mut selected: Vec<Complex64> = Vec::with_capacity(count);
    for y in candidates {
        if selected.len() == count {
            break;
        }
        if selected
            .iter()
            .all(|s| (s - y).norm() > DUPLICATE_ROOT_RADIUS)
        {
            selected.push(y);
        }
    }
    if selected.len() < count {
        return Err(Error::InsufficientRoots {
            found: selected.len(),
            needed: count,
        });
    }
    selected.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    Ok(selected)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnwrappedMean {
    pub mean: f64,
    pub unwrap: i64,
    /// No integer placed the mean inside the data range; `mean` is the
    /// candidate nearest to it.
    pub out_of_range: bool,
}

/// `a = angle(w) / T_e + l 2 pi / T_e` with the integer `l` placing `a` in
/// `[z_min, z_max]`.
pub fn unwrap_mean(root: Complex64, period: f64, z_min: f64, z_max: f64) -> Result<UnwrappedMean> {
    if !(period > 0.0) || !(z_max >= z_min) {
        return Err(Error::InvalidParameter(format!(
            "bad unwrap setup: T_e = {period}, interval [{z_min}, {z_max}]"
        )));
    }
    let base = root.arg() / period;
    let step = 2.0 * PI / period;
    let lo = ((z_min - base) / step).ceil() as i64;
    let hi = ((z_max - base) / step).floor() as i64;
    let candidate = |l: i64| base + l as f64 * step;
    let inside: Vec<i64> = (lo..=hi)
        .filter(|&l| (z_min..=z_max).contains(&candidate(l)))
        .collect();
    match inside.as_slice() {
        [l] => Ok(UnwrappedMean {
            mean: candidate(*l),
            unwrap: *l,
            out_of_range: false,
        }),
        [first, second, ..] => {
            // both on the boundary of the interval is only possible when the
            // interval is exactly one period wide
            let a = candidate(*first);
            let b = candidate(*second);
            if a == z_min && b == z_max && inside.len() == 2 {
                Ok(UnwrappedMean {
                    mean: a,
                    unwrap: *first,
                    out_of_range: false,
                })
            } else {
                Err(Error::Ambiguity {
                    first: *first,
                    second: *second,
                })
            }
        }
        [] => {
            let distance = |l: i64| {
                let a = candidate(l);
                (z_min - a).max(a - z_max).max(0.0)
            };
            // the nearest candidates are the ones just below and above the interval
            let below = hi;
            let above = lo;
            let l = if distance(above) < distance(below)
                || (distance(above) == distance(below) && above.abs() < below.abs())
            {
                above
            } else {
                below
            };
            Ok(UnwrappedMean {
                mean: candidate(l),
                unwrap: l,
                out_of_range: true,
            })
        }
    }
}

pub fn unwrap_means(
    roots: &[Complex64],
    period: f64,
    z_min: f64,
    z_max: f64,
) -> Result<Vec<UnwrappedMean>> {
    roots
        .iter()
        .map(|&r| unwrap_mean(r, period, z_min, z_max))
        .collect()
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    /// Estimated means, ascending.
    pub means: Vec<f64>,
    /// `roots[k]` is the selected root that produced `means[k]`.
    pub roots: Vec<Complex64>,
    pub unwrap_integers: Vec<i64>,
    pub out_of_range: Vec<bool>,
    pub eigenvalue_spectrum: Vec<f64>,
    pub period: f64,
    pub interval: (f64, f64),
}

impl EstimationResult {
    pub fn any_out_of_range(&self) -> bool {
        self.out_of_range.iter().any(|&f| f)
    }
}

/// Full pipeline on observed data.
pub fn estimate_means(
    obs: &ObservationSet,
    components: usize,
    order: usize,
) -> Result<EstimationResult> {
    check_orders(components, order)?;
    let period = sampling_period(obs)?;
    let cf = empirical_cf(obs, period, order)?;
    estimate_from_cf(&cf, components, obs.min(), obs.max())
}

/// Pipeline from step 3 on, for CF samples whose period satisfies
/// `2 pi / T_e >= 2 (z_max - z_min)`.
pub fn estimate_from_cf(
    cf: &CfSamples,
    components: usize,
    z_min: f64,
    z_max: f64,
) -> Result<EstimationResult> {
    check_orders(components, cf.len())?;
    let r = build_rm(cf)?;
    let subspace = decompose(&r, components)?;
    let poly = noise_polynomial(&subspace)?;
    let all_roots = merge_double_roots(&poly, &linalg::roots(&poly)?);
    let selected = select_roots(&all_roots, components)?;
    let unwrapped = unwrap_means(&selected, cf.period(), z_min, z_max)?;

    let mut paired: Vec<(UnwrappedMean, Complex64)> = unwrapped.into_iter().zip(selected).collect();
    paired.sort_by(|a, b| a.0.mean.total_cmp(&b.0.mean));
    Ok(EstimationResult {
        means: paired.iter().map(|(u, _)| u.mean).collect(),
        roots: paired.iter().map(|(_, r)| *r).collect(),
        unwrap_integers: paired.iter().map(|(u, _)| u.unwrap).collect(),
        out_of_range: paired.iter().map(|(u, _)| u.out_of_range).collect(),
        eigenvalue_spectrum: subspace.eigenvalues,
        period: cf.period(),
        interval: (z_min, z_max),
    })
}

/// Descending eigenvalues of `R_M` built from the data; needs no `K`.
pub fn eigenvalue_spectrum(obs: &ObservationSet, order: usize) -> Result<Vec<f64>> {
    if order < 2 {
        return Err(Error::Order(format!("spectrum needs M >= 2, got {order}")));
    }
    let period = sampling_period(obs)?;
    spectrum_of(&empirical_cf(obs, period, order)?)
}

pub fn spectrum_of(cf: &CfSamples) -> Result<Vec<f64>> {
    Ok(linalg::eigh(build_rm(cf)?.matrix())?.eigenvalues)
}

/// Sampling period used for an analytic CF whose means span `[min, max]`.
pub fn analytic_period(min: f64, max: f64) -> Result<f64> {
    period_for_range(min, max)
}

fn check_orders(components: usize, order: usize) -> Result<()> {
    if components == 0 {
        return Err(Error::Order("need at least one component".into()));
    }
    if order <= components {
        return Err(Error::Order(format!(
            "M = {order} must exceed K = {components}"
        )));
    }
    Ok(())
}
