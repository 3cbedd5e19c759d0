//! Acceptance suite. Every criterion runs at its frozen tolerance and prints
//! one PASS/FAIL line; the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cfmusic_core::cf::{analytic_cf, empirical_cf, sampling_period};
use cfmusic_core::em::{em_fit, EmConfig, EmVariant};
use cfmusic_core::experiments::{
    eigen_study, error_criterion, run_campaign, summarize, CampaignConfig, Estimator, Scenario,
};
use cfmusic_core::io::{write_runs_csv, write_summary_csv};
use cfmusic_core::linalg::{self, eigh, HermitianMatrix};
use cfmusic_core::mixture::{Component, GaussianMixture};
use cfmusic_core::spectral::{build_rm, decompose, estimate_from_cf, noise_polynomial};
use cfmusic_core::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!(
        "{} [{:.2}s, limit {}s]",
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    out.pass &= elapsed <= limit;
    out
}

fn success_rate(
    scenario: u8,
    sigma: f64,
    runs: usize,
    estimator: Estimator,
    threshold: f64,
) -> f64 {
    let config = CampaignConfig {
        scenarios: vec![scenario],
        sigmas: vec![sigma],
        runs_per_cell: runs,
        estimators: vec![estimator],
        ..CampaignConfig::default()
    };
    let records = run_campaign(&config).expect("campaign");
    summarize(&records, &[threshold])[0].probability
}

fn distinct_means(rng: &mut ChaCha8Rng, k: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let mut means: Vec<f64> = (0..k).map(|_| 10.0 * rng.random::<f64>()).collect();
        means.sort_by(f64::total_cmp);
        if means.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return means;
        }
    }
}

fn noiseless_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let period = PI / 10.0;
    let mut worst = 0.0f64;
    let mut failures = 0;
    for k in [1usize, 2, 6] {
        for _ in 0..20 {
            let means = distinct_means(&mut rng, k, 0.1);
            let components = means
                .iter()
                .map(|&mean| Component {
                    weight: 0.5 + rng.random::<f64>(),
                    mean,
                    std: 0.0,
                })
                .collect();
            let model = GaussianMixture::normalized(components).unwrap();
            let cf = analytic_cf(&model, period, 2 * k).unwrap();
            match estimate_from_cf(&cf, k, 0.0, 10.0) {
                Ok(r) => worst = worst.max(error_criterion(&means, &r.means).unwrap()),
                Err(_) => failures += 1,
            }
        }
    }
    outcome(
        failures == 0 && worst < 1e-6,
        format!("60 models, K in {{1,2,6}}: max error {worst:.2e} (< 1e-6), {failures} failures"),
    )
}

fn spectral_regime(sigma: f64, threshold: f64, bound: f64) -> Outcome {
    let p = success_rate(1, sigma, 500, Estimator::Spectral, threshold);
    outcome(
        p >= bound,
        format!("scenario 1, sigma={sigma}, 500 runs: P(e_r<{threshold}) = {p:.3} (>= {bound})"),
    )
}

fn em_failure_rate() -> Outcome {
    let p = success_rate(1, 0.1, 1000, Estimator::EmConstrained, 0.1);
    outcome(
        (0.25..=0.55).contains(&p),
        format!("EM_c, scenario 1, sigma=0.1, 1000 runs: P(e_r<0.1) = {p:.3} (in [0.25, 0.55])"),
    )
}

fn dominance() -> Outcome {
    let config = CampaignConfig {
        scenarios: vec![1, 2, 3, 4],
        sigmas: vec![0.05, 0.10, 0.15],
        runs_per_cell: 500,
        estimators: vec![Estimator::Spectral, Estimator::EmConstrained],
        ..CampaignConfig::default()
    };
    let rows = summarize(&run_campaign(&config).expect("campaign"), &[0.2]);
    let mut violations = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for pair in rows.chunks(2) {
        let (spectral, em) = match pair[0].estimator {
            Estimator::Spectral => (&pair[0], &pair[1]),
            _ => (&pair[1], &pair[0]),
        };
        let margin = spectral.probability - em.probability;
        worst_margin = worst_margin.min(margin);
        if margin < 0.0 {
            violations.push(format!("s{} sigma={}", spectral.scenario, spectral.sigma));
        }
    }
    outcome(
        violations.is_empty() && rows.len() == 24,
        format!(
            "12 cells: min P_spectral - P_EMc = {worst_margin:.3}, violations: [{}]",
            violations.join(", ")
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn fig2_spectrum() -> Outcome {
    let scenario = Scenario::new(4, 0.15).unwrap();
    let mut small = Vec::new();
    let mut ratio = Vec::new();
    for seed in 0..50u64 {
        let spectrum = eigen_study(scenario, 200, 10, seed).unwrap();
        let trace: f64 = spectrum.iter().sum();
        small.push(spectrum[6..].iter().sum::<f64>() / trace);
        ratio.push(spectrum[5] / spectrum[6]);
    }
    let (small, ratio) = (median(small), median(ratio));
    outcome(
        small < 0.1 && ratio > 2.0,
        format!("median 4-smallest/trace = {small:.4} (< 0.1), median lambda6/lambda7 = {ratio:.2} (> 2)"),
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng, order: usize) -> HermitianMatrix {
    HermitianMatrix::from_fn(order, |j, l| {
        let re = rng.random::<f64>() * 2.0 - 1.0;
        let im = if j == l {
            0.0
        } else {
            rng.random::<f64>() * 2.0 - 1.0
        };
        Complex64::new(re, im)
    })
}

fn invariant_suites() -> Outcome {
    let mut failed = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // structure of R_M and of the noise polynomial on empirical data
    let mut worst_reciprocal = 0.0f64;
    for trial in 0..40u64 {
        let scenario =
            Scenario::new(1 + (trial % 4) as u8, 0.05 + 0.05 * (trial % 5) as f64).unwrap();
        let obs = scenario.mixture().sample(200, 500 + trial);
        let cf = empirical_cf(&obs, sampling_period(&obs).unwrap(), 12).unwrap();
        let r = build_rm(&cf).unwrap();
        let m = r.order();
        let toeplitz = (0..m).all(|j| {
            (0..m).all(|l| {
                let e = r.matrix().get(j, l);
                e == cf.at(l as i64 - j as i64) && e == r.matrix().get(l, j).conj()
            })
        });
        if !toeplitz {
            failed.push("R_M structure");
        }
        let poly = noise_polynomial(&decompose(&r, 6).unwrap()).unwrap();
        let c = poly.coefficients();
        let d = c.len() - 1;
        let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if (0..=d).any(|n| (c[d - n] - c[n].conj()).norm() > 1e-12 * scale) {
            failed.push("q coefficient symmetry");
        }
        let roots = linalg::roots(&poly).unwrap();
        for y in &roots {
            let mirror = y.conj().inv();
            let nearest = roots
                .iter()
                .map(|z| (z - mirror).norm() / mirror.norm().max(1.0))
                .fold(f64::INFINITY, f64::min);
            worst_reciprocal = worst_reciprocal.max(nearest);
        }
    }
    if worst_reciprocal > 1e-6 {
        failed.push("q root inverse-symmetry");
    }

    // eigensolver identities
    for order in 2..=16 {
        let a = random_hermitian(&mut rng, order);
        let eig = eigh(&a).unwrap();
        let mut residual = 0.0;
        for j in 0..order {
            for l in 0..order {
                let rebuilt: Complex64 = (0..order)
                    .map(|k| {
                        eig.eigenvectors[k][j] * eig.eigenvalues[k] * eig.eigenvectors[k][l].conj()
                    })
                    .sum();
                residual += (rebuilt - a.get(j, l)).norm_sqr();
            }
        }
        let trace_gap = (eig.eigenvalues.iter().sum::<f64>() - a.trace()).abs();
        if residual.sqrt() > 1e-10 * a.frobenius_norm() || trace_gap > 1e-10 * a.frobenius_norm() {
            failed.push("eigensolver identities");
        }
    }

    // empirical CF convergence at N = 1e5
    let model = Scenario::new(1, 0.1).unwrap().mixture();
    let bound = 5.0 / (1e5f64).sqrt();
    let within = (0..100u64)
        .filter(|&seed| {
            let obs = model.sample(100_000, seed);
            let period = sampling_period(&obs).unwrap();
            let cf = empirical_cf(&obs, period, 12).unwrap();
            cf.values()
                .iter()
                .enumerate()
                .all(|(m, v)| (v - model.exact_cf(m as f64 * period)).norm() <= bound)
        })
        .count();
    if within < 99 {
        failed.push("empirical CF bound");
    }

    // EM log-likelihood monotonicity
    for instance in 0..100u64 {
        let scenario =
            Scenario::new(1 + (instance % 4) as u8, 0.05 + 0.2 * rng.random::<f64>()).unwrap();
        let obs = scenario.mixture().sample(200, 9000 + instance);
        let variant = if instance % 2 == 0 {
            EmVariant::Constrained
        } else {
            EmVariant::Standard
        };
        let k = 1 + (instance % 6) as usize;
        if let Ok(fit) = em_fit(&obs, &EmConfig::new(k, variant, instance)) {
            let t = &fit.log_likelihood_trace;
            if t.windows(2).any(|w| w[1] < w[0] - 1e-9) {
                failed.push("EM monotonicity");
            }
        }
    }

    // e_r permutation invariance and pseudometric
    for _ in 0..1000 {
        let k = rng.random_range(1..=6);
        let mut draw = || -> Vec<f64> { (0..k).map(|_| 10.0 * rng.random::<f64>()).collect() };
        let (x, y, z) = (draw(), draw(), draw());
        let e = |a: &[f64], b: &[f64]| error_criterion(a, b).unwrap();
        let mut shuffled = x.clone();
        shuffled.shuffle(&mut rng);
        let ok = e(&x, &y) == e(&y, &x)
            && e(&x, &x) == 0.0
            && e(&x, &y) > 0.0
            && e(&x, &z) <= e(&x, &y) + e(&y, &z) + 1e-12
            && e(&shuffled, &y) == e(&x, &y)
            && e(&shuffled, &x) == 0.0;
        if !ok {
            failed.push("e_r properties");
        }
    }

    // byte-identical campaign output across thread counts
    let csv = |jobs| {
        let config = CampaignConfig {
            sigmas: vec![0.1, 0.2],
            runs_per_cell: 25,
            estimators: Estimator::ALL.to_vec(),
            base_seed: 42,
            jobs: Some(jobs),
            ..CampaignConfig::default()
        };
        let records = run_campaign(&config).unwrap();
        let mut out = Vec::new();
        write_runs_csv(&records, false, &mut out).unwrap();
        write_summary_csv(&summarize(&records, &[0.1, 0.2]), &mut out).unwrap();
        out
    };
    let reference = csv(1);
    if [1, 2, 4].into_iter().any(|jobs| csv(jobs) != reference) {
        failed.push("campaign determinism");
    }

    failed.dedup();
    outcome(
        failed.is_empty(),
        format!(
            "R_M, q(y) (root mirror gap {worst_reciprocal:.1e}), eigh, CF bound ({within}/100), EM, e_r, determinism; failing: [{}]",
            failed.join(", ")
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (
            "1 noiseless exactness",
            Duration::from_secs(1),
            noiseless_exactness,
        ),
        ("2 spectral, sigma=0.10", Duration::from_secs(60), || {
            spectral_regime(0.1, 0.1, 0.95)
        }),
        ("3 spectral, sigma=0.15", Duration::from_secs(60), || {
            spectral_regime(0.15, 0.2, 0.90)
        }),
        (
            "4 EM_c success rate",
            Duration::from_secs(120),
            em_failure_rate,
        ),
        ("5 dominance over EM_c", Duration::from_secs(600), dominance),
        (
            "6 eigenvalue spectrum",
            Duration::from_secs(10),
            fig2_spectrum,
        ),
        (
            "7 invariant suites",
            Duration::from_secs(600),
            invariant_suites,
        ),
    ];
    let mut all = true;
    for (name, limit, run) in criteria {
        let result = timed(limit, run);
        all &= result.pass;
        println!(
            "criterion {name}: {} - {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
