//! Experiment runner: JSON config in, CSV/JSON reports out.
//!
//! Exit codes: 0 success (including undecided criteria), 1 verification
//! check failure, 2 config schema violation, 3 scheme certification
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use falpha::config::{self, BuiltExperiment, ExperimentConfig};
use falpha::coupling::{certify_c2, coupling_time_distribution};
use falpha::criteria::classify_growth;
use falpha::export;
use falpha::joint;
use falpha::rng::Streams;
use falpha::scheme::{self, classify_asymptotics, exact_count_pmf, record_law_summary};

mod verify;

#[derive(Parser)]
#[command(
    name = "falpha",
    about = "Simulation and exact analysis of record statistics in power-tail schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replication count.
    #[arg(long)]
    reps: Option<u64>,
    /// Override the horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (affects speed only; outputs are identical).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample trajectories and write per-run CSVs plus a summary.
    Simulate(RunOpts),
    /// Exact record law: probabilities, moments, count pmf, asymptotics.
    Exact(RunOpts),
    /// Growth-rate verdict for the configured threshold.
    Criterion(RunOpts),
    /// Coupled threshold/pure paths and coupling-time statistics.
    Couple(RunOpts),
    /// Run the verification battery relevant to the config.
    Verify(RunOpts),
    /// Combined report: exact law + verdict + coupling summaries.
    Report(RunOpts),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = match &cli.command {
        Command::Simulate(o)
        | Command::Exact(o)
        | Command::Criterion(o)
        | Command::Couple(o)
        | Command::Verify(o)
        | Command::Report(o) => o.clone(),
    };
    let run = || match load(&opts) {
        Err(code) => code,
        Ok(built) => match &cli.command {
            Command::Simulate(_) => cmd_simulate(&built, &opts),
            Command::Exact(_) => cmd_exact(&built, &opts),
            Command::Criterion(_) => cmd_criterion(&built, &opts),
            Command::Couple(_) => cmd_couple(&built, &opts),
            Command::Verify(_) => verify::cmd_verify(&built, &opts.out),
            Command::Report(_) => cmd_report(&built, &opts),
        },
    };
    match opts.threads {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(run),
    }
}

fn load(opts: &RunOpts) -> Result<BuiltExperiment, ExitCode> {
    let text = match std::fs::read_to_string(&opts.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", opts.config.display());
            return Err(ExitCode::from(2));
        }
    };
    let mut cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(ExitCode::from(2));
        }
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(r) = opts.reps {
        cfg.replications = r;
    }
    if let Some(h) = opts.horizon {
        cfg.horizon = h;
    }
    if cfg.horizon == 0 || cfg.replications == 0 {
        eprintln!("error: --horizon and --reps must be at least 1");
        return Err(ExitCode::from(2));
    }
    match config::build(&cfg) {
        Ok(b) => Ok(b),
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(2))
        }
    }
}

fn ensure_out(dir: &Path) -> Result<(), ExitCode> {
    std::fs::create_dir_all(dir).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", dir.display());
        ExitCode::from(2)
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExitCode> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        ExitCode::from(2)
    })
}

/// Certify the threshold scheme, mapping failure to exit code 3.
fn certify_or_exit(built: &BuiltExperiment) -> Result<(), ExitCode> {
    if built.scheme.threshold.is_none() {
        return Ok(());
    }
    match certify_c2(&built.scheme, built.config.horizon) {
        Ok(_) => Ok(()),
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(3))
        }
    }
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    config: &'a ExperimentConfig,
    mean_count_at_horizon: f64,
    exact_mean_scheme_count: f64,
    coupling: Option<falpha::coupling::CouplingTimeReport>,
}

fn cmd_simulate(built: &BuiltExperiment, opts: &RunOpts) -> ExitCode {
    if let Err(code) = certify_or_exit(built) {
        return code;
    }
    if let Err(code) = ensure_out(&opts.out) {
        return code;
    }
    let cfg = &built.config;
    let streams = Streams::new(cfg.seed);
    let horizon = cfg.horizon;

    // Representative path (replication 0): paired when thresholded.
    let first = built.scheme.sample_coupled(horizon, &streams, 0);
    let res = if built.scheme.threshold.is_some() {
        let f = std::fs::File::create(opts.out.join("trajectory.csv"))
            .map(|f| export::write_coupled_csv(f, &first));
        f
    } else {
        std::fs::File::create(opts.out.join("trajectory.csv"))
            .map(|f| export::write_trajectory_csv(f, &first.observed))
    };
    if let Err(e) = res {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    // Per-n empirical record rate over all replications.
    let counts: Vec<(Vec<u64>, u32)> = scheme::map_replications(cfg.replications, |rep| {
        let c = built.scheme.sample_coupled(horizon, &streams, rep);
        let hits: Vec<u64> = c
            .observed
            .indicators
            .iter()
            .map(|&b| u64::from(b))
            .collect();
        (hits, c.observed.counts[horizon - 1])
    });
    let law = record_law_summary(&built.alpha, horizon);
    let mut table = csv::Writer::from_writer(
        std::fs::File::create(opts.out.join("record_rate.csv")).expect("output file"),
    );
    table
        .write_record(["n", "empirical", "exact_scheme_p", "std_error"])
        .expect("csv");
    let reps = cfg.replications as f64;
    for n in 1..=horizon {
        let hits: u64 = counts.iter().map(|(h, _)| h[n - 1]).sum();
        let phat = hits as f64 / reps;
        let se = (phat * (1.0 - phat) / reps).sqrt();
        table
            .write_record(&[
                n.to_string(),
                phat.to_string(),
                law.p[n - 1].to_string(),
                se.to_string(),
            ])
            .expect("csv");
    }
    table.flush().expect("csv");

    let mean_count = counts.iter().map(|(_, c)| *c as f64).sum::<f64>() / reps;
    let coupling = built
        .scheme
        .threshold
        .as_ref()
        .map(|_| coupling_time_distribution(&built.scheme, horizon, &streams, cfg.replications));
    let summary = SimulateSummary {
        config: cfg,
        mean_count_at_horizon: mean_count,
        exact_mean_scheme_count: law.mean[horizon - 1],
        coupling,
    };
    if let Err(code) = write_json(&opts.out.join("summary.json"), &summary) {
        return code;
    }
    println!(
        "simulate: {} replications, horizon {}, outputs in {}",
        cfg.replications,
        horizon,
        opts.out.display()
    );
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct ExactSummary<'a> {
    config: &'a ExperimentConfig,
    pmf_horizon: usize,
    pmf_mass: f64,
    asymptotics: Option<scheme::AsymptoticsReport>,
    asymptotics_error: Option<String>,
}

fn cmd_exact(built: &BuiltExperiment, opts: &RunOpts) -> ExitCode {
    if let Err(code) = ensure_out(&opts.out) {
        return code;
    }
    let cfg = &built.config;
    let law = record_law_summary(&built.alpha, cfg.horizon);
    export::write_record_law_csv(
        std::fs::File::create(opts.out.join("record_law.csv")).expect("output file"),
        &law,
    )
    .expect("csv");
    let pmf = match exact_count_pmf(&built.alpha, cfg.horizon) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: horizon: {e}");
            return ExitCode::from(2);
        }
    };
    export::write_pmf_csv(
        std::fs::File::create(opts.out.join("count_pmf.csv")).expect("output file"),
        &pmf,
    )
    .expect("csv");
    let (asymptotics, asymptotics_error) = match classify_asymptotics(&built.alpha) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = ExactSummary {
        config: cfg,
        pmf_horizon: cfg.horizon,
        pmf_mass: pmf.iter().sum(),
        asymptotics,
        asymptotics_error,
    };
    if let Err(code) = write_json(&opts.out.join("exact.json"), &summary) {
        return code;
    }
    println!("exact: law and pmf written to {}", opts.out.display());
    ExitCode::SUCCESS
}

fn cmd_criterion(built: &BuiltExperiment, opts: &RunOpts) -> ExitCode {
    if let Err(code) = ensure_out(&opts.out) {
        return code;
    }
    let Some(thr) = built.threshold() else {
        eprintln!("error: config field `threshold`: criterion needs a threshold");
        return ExitCode::from(2);
    };
    let verdict = classify_growth(built.dist.as_ref(), &built.alpha, thr, built.config.horizon);
    if let Err(code) = write_json(&opts.out.join("verdict.json"), &verdict) {
        return code;
    }
    println!(
        "criterion: verdict {:?} (case {:?})",
        verdict.verdict, verdict.fired_case
    );
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct CoupleSummary<'a> {
    config: &'a ExperimentConfig,
    certification: falpha::coupling::C2Report,
    coupling: falpha::coupling::CouplingTimeReport,
}

fn cmd_couple(built: &BuiltExperiment, opts: &RunOpts) -> ExitCode {
    if built.scheme.threshold.is_none() {
        eprintln!("error: config field `threshold`: couple needs a threshold scheme");
        return ExitCode::from(2);
    }
    let certification = match certify_c2(&built.scheme, built.config.horizon) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    if let Err(code) = ensure_out(&opts.out) {
        return code;
    }
    let cfg = &built.config;
    let streams = Streams::new(cfg.seed);
    let first = built.scheme.sample_coupled(cfg.horizon, &streams, 0);
    export::write_coupled_csv(
        std::fs::File::create(opts.out.join("coupled.csv")).expect("output file"),
        &first,
    )
    .expect("csv");
    let coupling = coupling_time_distribution(&built.scheme, cfg.horizon, &streams, cfg.replications);
    let summary = CoupleSummary { config: cfg, certification, coupling };
    if let Err(code) = write_json(&opts.out.join("coupling.json"), &summary) {
        return code;
    }
    println!(
        "couple: {} paths, horizon {}, outputs in {}",
        cfg.replications,
        cfg.horizon,
        opts.out.display()
    );
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct FullReport<'a> {
    config: &'a ExperimentConfig,
    asymptotics: Option<scheme::AsymptoticsReport>,
    verdict: Option<falpha::criteria::CriterionVerdict>,
    /// Finite-horizon crossing statistics: reported only next to the
    /// verdict, never as an "eventually" claim on their own.
    last_crossing: Option<falpha::extremal::LastCrossingReport>,
    certification: Option<falpha::coupling::C2Report>,
    coupling: Option<falpha::coupling::CouplingTimeReport>,
    ratio_rows: Option<Vec<joint::SupDecayRow>>,
}

fn cmd_report(built: &BuiltExperiment, opts: &RunOpts) -> ExitCode {
    if let Err(code) = ensure_out(&opts.out) {
        return code;
    }
    let cfg = &built.config;
    let law = record_law_summary(&built.alpha, cfg.horizon);
    export::write_record_law_csv(
        std::fs::File::create(opts.out.join("record_law.csv")).expect("output file"),
        &law,
    )
    .expect("csv");
    let asymptotics = classify_asymptotics(&built.alpha).ok();
    let verdict = built
        .threshold()
        .map(|thr| classify_growth(built.dist.as_ref(), &built.alpha, thr, cfg.horizon));
    let last_crossing = built.threshold().and_then(|thr| {
        let n_grid = cfg.horizon.min(2_000);
        let grid: Vec<f64> = (1..=n_grid).map(|k| built.alpha.partial_sum(k)).collect();
        let b = thr.step_boundary(&built.alpha);
        falpha::extremal::last_crossing_statistics(
            built.dist.as_ref(),
            &b,
            &grid,
            &Streams::new(cfg.seed ^ 0x5eed),
            cfg.replications.min(1_000),
        )
        .ok()
    });
    let (certification, coupling) = match built.scheme.threshold.as_ref() {
        None => (None, None),
        Some(_) => {
            let cert = match certify_c2(&built.scheme, cfg.horizon) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(3);
                }
            };
            let streams = Streams::new(cfg.seed);
            let times =
                coupling_time_distribution(&built.scheme, cfg.horizon, &streams, cfg.replications);
            (Some(cert), Some(times))
        }
    };
    // Pairwise-independence decay table for flat thresholds.
    let ratio_rows = built.threshold().and_then(|thr| {
        let h = 1.0 - thr.q(1);
        let flat = (1..=thr.horizon().min(8)).all(|n| thr.level(n) == thr.level(1));
        if !flat || !(0.0..1.0).contains(&h) {
            return None;
        }
        let n_max = cfg.horizon.min(200);
        let ks: Vec<usize> = [5usize, 10, 20, 40]
            .into_iter()
            .filter(|&k| k + 1 < n_max)
            .collect();
        joint::sup_ratio_decay(&built.alpha, h, &ks, n_max).ok()
    });
    let report = FullReport {
        config: cfg,
        asymptotics,
        verdict,
        last_crossing,
        certification,
        coupling,
        ratio_rows,
    };
    if let Err(code) = write_json(&opts.out.join("report.json"), &report) {
        return code;
    }
    println!("report: written to {}", opts.out.display());
    ExitCode::SUCCESS
}

