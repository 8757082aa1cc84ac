//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::output::{Cell, Format, Manifest, OutputDir, Table};
use crate::runs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "smtj", version, about = "SMTJ delay-cell experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Delay histogram and exponential fit at one current.
    PdcHistogram(RunArgs),
    /// Delay CDFs at several currents.
    Cdf(RunArgs),
    /// Mean delay versus current and the dwell-time law fit.
    MeanVsCurrent(RunArgs),
    /// Exponential-clocks weighted sampling.
    WeightedSample(RunArgs),
    /// Metropolis-Hastings Ising chain with temporal acceptance.
    MhIsing(RunArgs),
    /// Drift analysis of a long constant-current record.
    Drift(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::PdcHistogram(a) => ("pdc-histogram", a),
            Command::Cdf(a) => ("cdf", a),
            Command::MeanVsCurrent(a) => ("mean-vs-current", a),
            Command::WeightedSample(a) => ("weighted-sample", a),
            Command::MhIsing(a) => ("mh-ising", a),
            Command::Drift(a) => ("drift", a),
        }
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn cli_dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_RUNTIME
        }
    }
}

fn execute(command: &Command) -> Result<(), Failure> {
    let (name, args) = command.parts();
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let io = |e: std::io::Error| Failure::Runtime(format!("writing {}: {e}", args.out.display()));
    let run = |e: runs::RunError| Failure::Runtime(e.0);
    let mut out = OutputDir::create(&args.out, args.format).map_err(io)?;

    match command {
        Command::PdcHistogram(_) => {
            let r = runs::pdc_histogram(&cfg).map_err(run)?;
            let mut t = Table::new(&["bin_center_s", "count", "error"]);
            for b in r.histogram.bins() {
                t.push(vec![b.bin_center_s.into(), b.count.into(), b.error.into()]);
            }
            out.table("histogram", &t).map_err(io)?;
            let mut trials = Table::new(&["trial_index", "current_uA", "true_time_s", "count", "overflowed", "inferred_time_s"]);
            for rec in &r.records {
                trials.push(vec![
                    rec.trial_index.into(),
                    rec.current_ua.into(),
                    rec.true_time.into(),
                    rec.count.count.into(),
                    rec.count.overflowed.into(),
                    rec.inferred_time.into(),
                ]);
            }
            out.table("trials", &trials).map_err(io)?;
            let fit = serde_json::json!({
                "current_uA": r.current_ua,
                "n_trials": r.records.len(),
                "n_overflow": r.n_overflow,
                "histogram_upper_s": r.histogram.upper,
                "histogram_excluded": r.histogram.excluded,
                "exponential": r.fit,
                "ks": r.ks,
            });
            out.json("fit.json", &fit).map_err(io)?;
            log::info!("rate {:.6e} 1/s, reduced chi2 {:?}", r.fit.value("rate"), r.fit.reduced_chi_squared);
        }
        Command::Cdf(_) => {
            let curves = runs::cdf_curves(&cfg).map_err(run)?;
            for c in &curves {
                let mut t = Table::new(&["t_s", "F_empirical", "F_fit"]);
                for (x, f, g) in c.table() {
                    t.push(vec![x.into(), f.into(), g.into()]);
                }
                out.table(&format!("cdf_{}uA", c.current_ua), &t).map_err(io)?;
            }
            out.json("fit.json", &curves).map_err(io)?;
        }
        Command::MeanVsCurrent(_) => {
            let r = runs::mean_vs_current(&cfg).map_err(run)?;
            let mut t = Table::new(&["current_uA", "mean_s", "stderr_s"]);
            for p in &r.points {
                t.push(vec![p.current_ua.into(), p.mean_s.into(), p.stderr_s.into()]);
            }
            out.table("sweep", &t).map_err(io)?;
            out.json("fit.json", &r).map_err(io)?;
        }
        Command::WeightedSample(_) => {
            let r = runs::weighted_sampling(&cfg).map_err(run)?;
            let mut t = Table::new(&["index", "count", "expected_p"]);
            for (k, (&c, &p)) in r.counts.iter().zip(&r.expected_p).enumerate() {
                t.push(vec![k.into(), c.into(), p.into()]);
            }
            out.table("frequencies", &t).map_err(io)?;
            out.json("fit.json", &r).map_err(io)?;
        }
        Command::MhIsing(_) => {
            let r = runs::mh_ising(&cfg).map_err(run)?;
            let mut t = Table::new(&["index", "empirical_p", "boltzmann_p"]);
            for (k, (&e, &b)) in r.empirical.iter().zip(&r.boltzmann).enumerate() {
                t.push(vec![k.into(), e.into(), b.into()]);
            }
            out.table("distribution", &t).map_err(io)?;
            out.json("chain_stats.json", &r).map_err(io)?;
        }
        Command::Drift(_) => {
            let r = runs::drift_run(&cfg).map_err(run)?;
            let mut t = Table::new(&["bin_index", "mean_s", "stderr_s"]);
            for (k, (&m, &s)) in r.report.bin_means.iter().zip(&r.report.bin_standard_errors).enumerate() {
                t.push(vec![Cell::from(k), m.into(), s.into()]);
            }
            out.table("drift", &t).map_err(io)?;
            out.json("drift.json", &r).map_err(io)?;
        }
    }
    out.json("manifest.json", &Manifest::new(name, args.format, &cfg)).map_err(io)?;
    for path in out.written() {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}
