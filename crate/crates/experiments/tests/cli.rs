use std::fs;
use std::path::{Path, PathBuf};

use smtj_experiments::cli::{cli_dispatch, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("c.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> i32 {
    cli_dispatch(std::iter::once("smtj").chain(args.iter().copied()))
}

fn run_cmd(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend(extra);
    run(&args)
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_rectangular(path: &Path, header: &[&str]) -> usize {
    let mut reader = csv::Reader::from_path(path).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), header, "{}", path.display());
    let mut rows = 0;
    for rec in reader.records() {
        assert_eq!(rec.unwrap().len(), header.len());
        rows += 1;
    }
    rows
}

const SMALL: &str = "seed = 5\n[pdc]\ntrials = 1000\n[cdf]\ntrials = 500\n[sweep]\ntrials = 300\n[ising]\nsteps = 20000\nburn_in = 100\n[drift_run]\nbins = 4\nevents_per_bin = 100\n";

#[test]
fn pdc_histogram_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("results");
    assert_eq!(run_cmd("pdc-histogram", &cfg, &out, &[]), EXIT_OK);
    assert_eq!(assert_rectangular(&out.join("histogram.csv"), &["bin_center_s", "count", "error"]), 50);
    assert_rectangular(&out.join("trials.csv"), &["trial_index", "current_uA", "true_time_s", "count", "overflowed", "inferred_time_s"]);
    let fit = json(out.join("fit.json"));
    assert!(fit["exponential"]["parameters"][0]["value"].as_f64().unwrap() > 0.0);
    let manifest = json(out.join("manifest.json"));
    assert_eq!(manifest["command"], "pdc-histogram");
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["pdc"]["trials"], 1000);
}

#[test]
fn every_command_writes_rectangular_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let cases: [(&str, &str, &[&str]); 5] = [
        ("cdf", "cdf_918uA.csv", &["t_s", "F_empirical", "F_fit"]),
        ("mean-vs-current", "sweep.csv", &["current_uA", "mean_s", "stderr_s"]),
        ("weighted-sample", "frequencies.csv", &["index", "count", "expected_p"]),
        ("mh-ising", "distribution.csv", &["index", "empirical_p", "boltzmann_p"]),
        ("drift", "drift.csv", &["bin_index", "mean_s", "stderr_s"]),
    ];
    for (cmd, file, header) in cases {
        let out = dir.path().join(cmd);
        assert_eq!(run_cmd(cmd, &cfg, &out, &[]), EXIT_OK, "{cmd}");
        assert!(assert_rectangular(&out.join(file), header) > 0);
        assert!(out.join("manifest.json").exists());
    }
    assert!(dir.path().join("cdf/cdf_930uA.csv").exists());
}

#[test]
fn weighted_sample_reports_p_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 9\n[weighted]\nrates = [1.0, 2.0, 3.0]\ndraws = 100000\n");
    let out = dir.path().join("w");
    assert_eq!(run_cmd("weighted-sample", &cfg, &out, &[]), EXIT_OK);
    let p = json(out.join("fit.json"))["gof"]["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    let mut reader = csv::Reader::from_path(out.join("frequencies.csv")).unwrap();
    let total: u64 = reader.records().map(|r| r.unwrap()[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 100_000);
}

#[test]
fn mh_ising_reports_total_variation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 9\n[ising]\nsteps = 200000\nburn_in = 1000\n");
    let out = dir.path().join("i");
    assert_eq!(run_cmd("mh-ising", &cfg, &out, &[]), EXIT_OK);
    let stats = json(out.join("chain_stats.json"));
    assert!(stats["total_variation"].as_f64().unwrap() < 0.05);
    assert_eq!(stats["boltzmann"].as_array().unwrap().len(), 16);
}

#[test]
fn json_format_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("j");
    assert_eq!(run_cmd("weighted-sample", &cfg, &out, &["--format", "json", "--seed", "77"]), EXIT_OK);
    let rows = json(out.join("frequencies.json"));
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert!(!out.join("frequencies.csv").exists());
    let manifest = json(out.join("manifest.json"));
    assert_eq!(manifest["seed"], 77);
    assert_eq!(manifest["format"], "json");
}

#[test]
fn seed_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_cmd("pdc-histogram", &cfg, &a, &[]), EXIT_OK);
    assert_eq!(run_cmd("pdc-histogram", &cfg, &b, &["--seed", "6"]), EXIT_OK);
    assert_ne!(fs::read(a.join("trials.csv")).unwrap(), fs::read(b.join("trials.csv")).unwrap());
}

#[test]
fn usage_and_config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(run(&["frobnicate"]), EXIT_CONFIG);
    assert_eq!(run(&["cdf"]), EXIT_CONFIG);
    assert_eq!(run(&["cdf", "--config", "c.toml", "--bogus"]), EXIT_CONFIG);
    assert_eq!(run_cmd("cdf", &dir.path().join("missing.toml"), &out, &[]), EXIT_CONFIG);
    let bad = write_config(dir.path(), "seed = 1\n[timing]\nperiod = 1e-3\n");
    assert_eq!(run_cmd("cdf", &bad, &out, &[]), EXIT_CONFIG);
    let unparsable = write_config(dir.path(), "seed = ");
    assert_eq!(run_cmd("cdf", &unparsable, &out, &[]), EXIT_CONFIG);
    assert_eq!(run(&["--help"]), EXIT_OK);
}

#[test]
fn runtime_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // too many spins to enumerate the Boltzmann distribution
    let cfg = write_config(dir.path(), "seed = 1\n[ising]\nsteps = 10\n[ising.model]\nkind = \"random\"\nn = 24\nscale = 1.0\nseed = 3\n");
    assert_eq!(run_cmd("mh-ising", &cfg, &dir.path().join("y"), &[]), EXIT_RUNTIME);
}

#[test]
fn shipped_configs_parse_and_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        let cfg = smtj_experiments::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 3);
}
