use cfmusic_core::cf::{analytic_cf, empirical_cf, period_for_range, sampling_period};
use cfmusic_core::em::{em_fit, EmConfig, EmVariant};
use cfmusic_core::experiments::{error_criterion, Scenario};
use cfmusic_core::mixture::{Component, GaussianMixture, ObservationSet};
use cfmusic_core::spectral::{build_rm, decompose, estimate_from_cf, estimate_means};
use cfmusic_core::Complex64;
use proptest::prelude::*;

fn point_masses(means: &[f64], weights: &[f64]) -> GaussianMixture {
    GaussianMixture::normalized(
        means
            .iter()
            .zip(weights)
            .map(|(&mean, &weight)| Component {
                weight,
                mean,
                std: 0.0,
            })
            .collect(),
    )
    .unwrap()
}

fn spaced_means() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|k| {
        (
            prop::collection::vec(0.1f64..1.5, k),
            prop::collection::vec(0.2f64..1.0, k),
        )
            .prop_map(|(gaps, weights)| {
                let mut acc = 0.0;
                let means = gaps
                    .iter()
                    .map(|g| {
                        acc += g;
                        acc
                    })
                    .collect();
                (means, weights)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_cf_is_recovered_exactly(
        (means, weights) in spaced_means(),
        extra in 1usize..=6,
    ) {
        let k = means.len();
        let lo = means[0];
        let hi = means[k - 1];
        let (lo, hi) = if k == 1 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
        let model = point_masses(&means, &weights);
        let cf = analytic_cf(&model, period_for_range(lo, hi).unwrap(), k + extra).unwrap();
        let result = estimate_from_cf(&cf, k, lo, hi).unwrap();
        prop_assert!(error_criterion(&means, &result.means).unwrap() < 1e-6);
    }

    #[test]
    fn noise_subspace_is_orthogonal_to_steering_vectors(
        (means, weights) in spaced_means(),
        extra in 1usize..=6,
    ) {
        let k = means.len();
        let m = k + extra;
        let period = period_for_range(means[0] - 0.5, means[k - 1] + 0.5).unwrap();
        let cf = analytic_cf(&point_masses(&means, &weights), period, m).unwrap();
        let sub = decompose(&build_rm(&cf).unwrap(), k).unwrap();
        for &a in &means {
            // steering vector (1, w, ..., w^{M-1})^H with w = exp(i a T_e)
            let w: Vec<Complex64> = (0..m)
                .map(|j| Complex64::from_polar(1.0, -(j as f64) * a * period))
                .collect();
            let residual: f64 = sub
                .noise_basis
                .iter()
                .map(|v| v.iter().zip(&w).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr())
                .sum::<f64>()
                .sqrt();
            prop_assert!(residual <= 1e-8, "residual {residual}");
        }
    }

    #[test]
    fn estimates_are_shift_equivariant(seed in 0u64..10_000, shift in -50.0f64..50.0) {
        let obs = Scenario::new(1, 0.1).unwrap().mixture().sample(200, seed);
        let base = estimate_means(&obs, 6, 12).unwrap();
        let moved = estimate_means(&obs.shifted(shift), 6, 12).unwrap();
        for (a, b) in base.means.iter().zip(&moved.means) {
            prop_assert!((b - a - shift).abs() <= 1e-6, "{a} + {shift} vs {b}");
        }
    }

    #[test]
    fn empirical_cf_ignores_observation_order(seed in 0u64..10_000, rotate in 0usize..200) {
        let obs = Scenario::new(3, 0.2).unwrap().mixture().sample(200, seed);
        let mut values = obs.values().to_vec();
        values.rotate_left(rotate);
        values.reverse();
        let permuted = ObservationSet::new(values).unwrap();
        let period = sampling_period(&obs).unwrap();
        let a = empirical_cf(&obs, period, 12).unwrap();
        let b = empirical_cf(&permuted, period, 12).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn error_criterion_is_a_permutation_free_pseudometric(
        x in prop::collection::vec(-10.0f64..10.0, 1..8),
        seed in any::<u64>(),
    ) {
        let k = x.len();
        let y: Vec<f64> = x.iter().map(|v| v + (seed % 7) as f64 * 0.1).collect();
        let z: Vec<f64> = x.iter().rev().map(|v| v * 0.5).collect();
        let mut shuffled = x.clone();
        shuffled.rotate_left((seed as usize) % k);
        let e = |a: &[f64], b: &[f64]| error_criterion(a, b).unwrap();
        prop_assert_eq!(e(&x, &y), e(&y, &x));
        prop_assert_eq!(e(&x, &shuffled), 0.0);
        prop_assert_eq!(e(&shuffled, &y), e(&x, &y));
        prop_assert!(e(&x, &z) <= e(&x, &y) + e(&y, &z) + 1e-12);
    }

    #[test]
    fn em_log_likelihood_never_decreases(
        seed in 0u64..10_000,
        k in 1usize..=6,
        constrained in any::<bool>(),
    ) {
        let obs = Scenario::new(4, 0.15).unwrap().mixture().sample(200, seed);
        let variant = if constrained { EmVariant::Constrained } else { EmVariant::Standard };
        if let Ok(fit) = em_fit(&obs, &EmConfig::new(k, variant, seed)) {
            let trace = &fit.log_likelihood_trace;
            prop_assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
            prop_assert!((fit.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(fit.variances.iter().all(|&v| v > 0.0));
        }
    }
}

#[test]
fn median_error_grows_with_sigma() {
    let medians: Vec<f64> = [0.05, 0.1, 0.15, 0.2]
        .iter()
        .map(|&sigma| {
            let model = Scenario::new(1, sigma).unwrap();
            let mut errors: Vec<f64> = (0..200u64)
                .map(|seed| {
                    let obs = model.mixture().sample(200, seed);
                    estimate_means(&obs, 6, 12)
                        .map(|r| error_criterion(&model.means(), &r.means).unwrap())
                        .unwrap_or(f64::INFINITY)
                })
                .collect();
            errors.sort_by(f64::total_cmp);
            errors[100]
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] > w[0]), "{medians:?}");
}

#[test]
fn em_converged_fits_match_cluster_means() {
    // oracle: per-cluster sample means after thresholding at 5
    let model = GaussianMixture::from_triples(&[(0.5, 0.0, 0.1), (0.5, 10.0, 0.1)]).unwrap();
    let mut checked = 0;
    for seed in 0..200u64 {
        let obs = model.sample(200, seed);
        let (low, high): (Vec<f64>, Vec<f64>) = obs.values().iter().partition(|&&z| z < 5.0);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let mut config = EmConfig::new(2, EmVariant::Constrained, seed);
        config.max_iterations = 1000;
        let fit = em_fit(&obs, &config).unwrap();
        let mut means = fit.means.clone();
        means.sort_by(f64::total_cmp);
        if (means[0] - 0.0).abs() < 0.05 && (means[1] - 10.0).abs() < 0.05 {
            checked += 1;
            assert!((means[0] - mean(&low)).abs() < 1e-6);
            assert!((means[1] - mean(&high)).abs() < 1e-6);
        }
    }
    assert!(checked > 100);
}

#[test]
fn em_separates_distant_clusters() {
    let model = GaussianMixture::from_triples(&[(0.5, 0.0, 0.1), (0.5, 10.0, 0.1)]).unwrap();
    let seeds = 200u64;
    let hits = (0..seeds)
        .filter(|&seed| {
            let obs = model.sample(200, seed);
            em_fit(&obs, &EmConfig::new(2, EmVariant::Constrained, seed)).is_ok_and(|fit| {
                let mut means = fit.means;
                means.sort_by(f64::total_cmp);
                means[0].abs() < 0.05 && (means[1] - 10.0).abs() < 0.05
            })
        })
        .count();
    assert!(
        hits as f64 >= 0.95 * seeds as f64,
        "{hits}/{seeds} seeds separated the clusters"
    );
}
