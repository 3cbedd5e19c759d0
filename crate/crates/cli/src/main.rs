use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cfmusic_core::em::{em_fit, EmConfig, EmVariant};
use cfmusic_core::experiments::{
    analytic_eigen_study, eigen_study, run_campaign, summarize, CampaignConfig, Estimator,
    Scenario, DEFAULT_RUNS_PER_CELL,
};
use cfmusic_core::io::{
    em_report, estimation_report, read_mixture, read_observations, write_em_csv,
    write_estimation_csv, write_observations, write_runs_csv, write_spectrum_csv,
    write_summary_csv,
};
use cfmusic_core::mixture::ObservationSet;
use cfmusic_core::spectral::{default_order, estimate_means};
use cfmusic_core::Error;
use clap::{Args, Parser, Subcommand};

/// Estimate Gaussian mixture component means from the eigenstructure of a
/// Toeplitz matrix of empirical characteristic-function samples.
#[derive(Debug, Parser)]
#[command(name = "cfmusic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the K component means of an observation file.
    Estimate(EstimateArgs),
    /// Fit a K-component mixture with EM.
    Em(EmArgs),
    /// Run a seeded Monte Carlo campaign and write runs.csv and summary.csv.
    Simulate(SimulateArgs),
    /// Eigenvalue spectrum of R_M for a preset scenario.
    Spectrum(SpectrumArgs),
    /// Draw observations from a mixture file or a preset scenario.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Observation file: one real per line, `#` comments allowed.
    input: PathBuf,
    /// Number of mixture components.
    #[arg(long)]
    k: usize,
    /// Order of R_M (number of CF samples) [default: 2K].
    #[arg(long)]
    m: Option<usize>,
    /// Write the estimates and eigenvalues as CSV to this file.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmArgs {
    /// Observation file: one real per line, `#` comments allowed.
    input: PathBuf,
    /// Number of mixture components.
    #[arg(long)]
    k: usize,
    /// `standard` or `constrained` (common variance and weight).
    #[arg(long, default_value = "constrained")]
    variant: String,
    /// Seed of the random initial means.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap.
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Initial variance of every component [default: sample variance].
    #[arg(long)]
    init_variance: Option<f64>,
    /// Write the fitted parameters as CSV to this file.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario ids (1-4), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    scenario: Vec<u8>,
    /// Values of sigma, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2,0.25")]
    sigma: Vec<f64>,
    /// Runs per (scenario, sigma) cell.
    #[arg(long, default_value_t = DEFAULT_RUNS_PER_CELL)]
    runs: usize,
    /// Observations per run.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Order of R_M for the spectral estimator.
    #[arg(long, default_value_t = 12)]
    m: usize,
    /// Estimators: spectral, em_standard, em_constrained.
    #[arg(long, value_delimiter = ',', default_value = "spectral,em_constrained")]
    estimators: Vec<String>,
    /// Thresholds tau of the success probabilities P(e_r < tau).
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2")]
    thresholds: Vec<f64>,
    /// Base seed; every run seed is derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    jobs: Option<usize>,
    /// Add per-run wall time to runs.csv (output is then no longer reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// Scenario id (1-4).
    #[arg(long, default_value_t = 4)]
    scenario: u8,
    /// Scale of the component standard deviations.
    #[arg(long, default_value_t = 0.15)]
    sigma: f64,
    /// Observations drawn.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Order of R_M.
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Seed of the sampled data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the exact characteristic function instead of sampled data.
    #[arg(long)]
    analytic: bool,
    /// Write the CSV here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Mixture file with `weight mean std` per line; overrides --scenario.
    #[arg(long)]
    mixture: Option<PathBuf>,
    /// Scenario id (1-4).
    #[arg(long, default_value_t = 1)]
    scenario: u8,
    /// Scale of the component standard deviations.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Number of draws.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Seed of the draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the observations here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Exit code 2 for bad input or usage, 3 when an estimator fails.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonConvergence { .. }
        | Error::InsufficientRoots { .. }
        | Error::Ambiguity { .. }
        | Error::DegenerateComponent { .. }
        | Error::NotHermitian { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => estimate(args),
        Command::Em(args) => em(args),
        Command::Simulate(args) => simulate(args),
        Command::Spectrum(args) => spectrum(args),
        Command::Sample(args) => sample(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn load_observations(path: &Path) -> cfmusic_core::Result<ObservationSet> {
    read_observations(BufReader::new(File::open(path)?))
}

fn create(path: &Path) -> cfmusic_core::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs `write` against the file at `path`, or standard output.
fn emit(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> cfmusic_core::Result<()>,
) -> cfmusic_core::Result<()> {
    match path {
        Some(p) => {
            let mut out = create(p)?;
            write(&mut out)?;
            out.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            write(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn estimate(args: EstimateArgs) -> cfmusic_core::Result<()> {
    let obs = load_observations(&args.input)?;
    let order = args.m.unwrap_or_else(|| default_order(args.k));
    let result = estimate_means(&obs, args.k, order)?;
    print!("{}", estimation_report(&result));
    if result.any_out_of_range() {
        eprintln!("warning: some unwrapped means fall outside the observed range");
    }
    if let Some(path) = &args.output {
        let mut out = create(path)?;
        write_estimation_csv(&result, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn em(args: EmArgs) -> cfmusic_core::Result<()> {
    let obs = load_observations(&args.input)?;
    let variant: EmVariant = args.variant.parse()?;
    let mut config = EmConfig::new(args.k, variant, args.seed);
    config.max_iterations = args.max_iterations;
    config.initial_variance = args.init_variance;
    let fit = em_fit(&obs, &config)?;
    print!("{}", em_report(&fit));
    if let Some(path) = &args.output {
        let mut out = create(path)?;
        write_em_csv(&fit, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> cfmusic_core::Result<()> {
    let estimators = args
        .estimators
        .iter()
        .map(|s| s.parse())
        .collect::<cfmusic_core::Result<Vec<Estimator>>>()?;
    let config = CampaignConfig {
        scenarios: args.scenario,
        sigmas: args.sigma,
        runs_per_cell: args.runs,
        observations: args.n,
        order: args.m,
        estimators,
        base_seed: args.seed,
        jobs: args.jobs,
    };
    let records = run_campaign(&config)?;
    let rows = summarize(&records, &args.thresholds);
    fs::create_dir_all(&args.out_dir)?;
    let mut runs = create(&args.out_dir.join("runs.csv"))?;
    write_runs_csv(&records, args.timings, &mut runs)?;
    runs.flush()?;
    let mut summary = create(&args.out_dir.join("summary.csv"))?;
    write_summary_csv(&rows, &mut summary)?;
    summary.flush()?;

    println!("scenario  sigma  estimator        tau   P(e_r<tau)  median e_r  failures");
    for row in &rows {
        println!(
            "{:>8}  {:>5}  {:<15} {:>4}  {:>10.4}  {:>10.4}  {:>8}",
            row.scenario,
            row.sigma,
            row.estimator.as_str(),
            row.threshold,
            row.probability,
            row.median_error,
            row.failures
        );
    }
    eprintln!(
        "wrote {} records to {}",
        records.len(),
        args.out_dir.join("runs.csv").display()
    );
    Ok(())
}

fn spectrum(args: SpectrumArgs) -> cfmusic_core::Result<()> {
    let scenario = Scenario::new(args.scenario, args.sigma)?;
    let values = if args.analytic {
        analytic_eigen_study(scenario, args.m)?
    } else {
        eigen_study(scenario, args.n, args.m, args.seed)?
    };
    emit(args.output.as_deref(), |out| {
        write_spectrum_csv(&values, out)
    })
}

fn sample(args: SampleArgs) -> cfmusic_core::Result<()> {
    let model = match &args.mixture {
        Some(path) => read_mixture(BufReader::new(File::open(path)?))?,
        None => Scenario::new(args.scenario, args.sigma)?.mixture(),
    };
    if args.n == 0 {
        return Err(Error::InvalidParameter("--n must be at least 1".into()));
    }
    let obs = model.sample(args.n, args.seed);
    emit(args.output.as_deref(), |out| write_observations(&obs, out))
}
