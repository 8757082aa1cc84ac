//! Experiment runners. Each returns its full result; writing files is the
//! caller's business.

use serde::Serialize;
use smtj_core::device::{generate_telegraph, MagState};
use smtj_core::rng::aux_stream;
use smtj_core::samplers::ising::{exact_boltzmann, ferromagnetic_grid, random_couplings, total_variation, IsingChain};
use smtj_core::samplers::{currents_to_rates, weighted_sample};
use smtj_core::stats::{
    chi_squared_gof, drift_analysis, empirical_cdf, fit_cdf, fit_exponential_with_bins, fit_tau_vs_current, histogram_counting_errors, ks_test,
    ChiSquaredTest, Histogram, KsTest, TauFit, TauPoint,
};
use smtj_core::{DriftReport, FitReport, IsingProblem, SpinState, WeightedDie};

use crate::config::{ExperimentConfig, IsingModel};
use crate::pipeline::{run_batch, trial_drift_offsets, TrialRecord};

pub const WEIGHTED_STREAM: u32 = 2;
pub const ISING_STREAM: u32 = 3;
pub const DRIFT_RUN_STREAM: u32 = 4;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct RunError(pub String);

impl From<smtj_core::Error> for RunError {
    fn from(e: smtj_core::Error) -> Self {
        RunError(e.to_string())
    }
}

type RunResult<T> = Result<T, RunError>;

fn delays(records: &[TrialRecord], cfg: &ExperimentConfig) -> Vec<f64> {
    records.iter().filter_map(|r| r.delay_estimate(&cfg.timing)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PdcHistogramRun {
    pub current_ua: f64,
    pub records: Vec<TrialRecord>,
    pub n_overflow: usize,
    pub delays: Vec<f64>,
    pub histogram: Histogram<f64>,
    pub fit: FitReport,
    pub ks: KsTest,
}

/// Repeated current steps at one current, histogrammed and fit.
pub fn pdc_histogram(cfg: &ExperimentConfig) -> RunResult<PdcHistogramRun> {
    let current = cfg.pdc_current().map_err(|e| RunError(e.to_string()))?;
    let offsets = trial_drift_offsets(cfg, cfg.pdc.trials, cfg.sweep.trial_period);
    let records = run_batch(cfg, current, 0, &offsets)?;
    let delays = delays(&records, cfg);
    let histogram = histogram_counting_errors(&delays, cfg.pdc.n_bins)?;
    let fit = fit_exponential_with_bins(&delays, cfg.pdc.n_bins)?;
    let ks = ks_test(&delays, fit.value("rate"))?;
    Ok(PdcHistogramRun { current_ua: current, n_overflow: records.len() - delays.len(), records, delays, histogram, fit, ks })
}

#[derive(Debug, Clone, Serialize)]
pub struct CdfCurve {
    pub current_ua: f64,
    pub n_overflow: usize,
    #[serde(skip)]
    pub delays: Vec<f64>,
    pub fit: FitReport,
    pub ks: KsTest,
}

impl CdfCurve {
    /// `(t, F_empirical, F_fit)` at every sample.
    pub fn table(&self) -> Vec<(f64, f64, f64)> {
        let rate = self.fit.value("rate");
        empirical_cdf(&self.delays).points().into_iter().map(|(t, f)| (t, f, -(-rate * t).exp_m1())).collect()
    }
}

/// Delay CDFs at several currents, each fit to `1 - exp(-rate t)`.
pub fn cdf_curves(cfg: &ExperimentConfig) -> RunResult<Vec<CdfCurve>> {
    let offsets = trial_drift_offsets(cfg, cfg.cdf.trials * cfg.cdf.currents.len(), cfg.sweep.trial_period);
    cfg.cdf
        .currents
        .iter()
        .enumerate()
        .map(|(k, &current)| {
            let records = run_batch(cfg, current, k as u32, &offsets[k * cfg.cdf.trials..(k + 1) * cfg.cdf.trials])?;
            let delays = delays(&records, cfg);
            let fit = fit_cdf(&delays)?;
            let ks = ks_test(&delays, fit.value("rate"))?;
            Ok(CdfCurve { current_ua: current, n_overflow: records.len() - delays.len(), delays, fit, ks })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub current_ua: f64,
    pub n_trials: usize,
    pub n_overflow: usize,
    pub mean_s: f64,
    pub stderr_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponential: Option<FitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    pub points: Vec<SweepPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_fit: Option<TauFit<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_fit_error: Option<String>,
}

/// Mean switching delay versus current. Overflowed trials are censored at
/// the counter window: the mean is total observed time over the number of
/// switches, the exponential maximum-likelihood estimate. Points whose
/// exponential fit fails keep their error and stay out of the law fit.
pub fn mean_vs_current(cfg: &ExperimentConfig) -> RunResult<SweepRun> {
    let n = cfg.sweep.trials;
    let offsets = trial_drift_offsets(cfg, n * cfg.sweep.currents.len(), cfg.sweep.trial_period);
    let window = cfg.timing.max_window() - cfg.timing.path_offset + cfg.timing.period / 2.0;
    let mut points = Vec::with_capacity(cfg.sweep.currents.len());
    for (k, &current) in cfg.sweep.currents.iter().enumerate() {
        let records = run_batch(cfg, current, k as u32, &offsets[k * n..(k + 1) * n])?;
        let delays = delays(&records, cfg);
        let n_overflow = records.len() - delays.len();
        let switched = delays.len();
        let mut point = SweepPoint { current_ua: current, n_trials: n, n_overflow, mean_s: f64::NAN, stderr_s: f64::NAN, exponential: None, error: None };
        if switched == 0 {
            point.error = Some("no trial switched within the counter window".into());
        } else {
            let total = delays.iter().sum::<f64>() + n_overflow as f64 * window;
            point.mean_s = total / switched as f64;
            point.stderr_s = point.mean_s / (switched as f64).sqrt();
            match fit_exponential_with_bins(&delays, cfg.pdc.n_bins) {
                Ok(fit) => point.exponential = Some(fit),
                Err(e) => point.error = Some(e.to_string()),
            }
        }
        if let Some(e) = &point.error {
            log::warn!("sweep point {current} uA: {e}");
        }
        points.push(point);
    }
    let usable: Vec<TauPoint<f64>> = points
        .iter()
        .filter(|p| p.error.is_none())
        .map(|p| TauPoint { current: p.current_ua, mean: p.mean_s, stderr: p.stderr_s })
        .collect();
    let (tau_fit, tau_fit_error) = match fit_tau_vs_current(&usable, cfg.sweep.fit) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SweepRun { points, tau_fit, tau_fit_error })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedRun {
    pub rates: Vec<f64>,
    pub expected_p: Vec<f64>,
    pub counts: Vec<u64>,
    pub gof: ChiSquaredTest,
}

pub fn weighted_die(cfg: &ExperimentConfig) -> RunResult<WeightedDie> {
    Ok(match &cfg.weighted.currents {
        Some(currents) => currents_to_rates(currents, &cfg.device)?,
        None => WeightedDie::new(cfg.weighted.rates.clone())?,
    })
}

pub fn roll_die(die: &WeightedDie, draws: usize, seed: u64) -> Vec<u64> {
    let mut rng = aux_stream(seed, WEIGHTED_STREAM);
    let mut counts = vec![0u64; die.len()];
    for _ in 0..draws {
        counts[weighted_sample(die, &mut rng)] += 1;
    }
    counts
}

/// Exponential-clocks die rolled `draws` times and tested against its face
/// probabilities.
pub fn weighted_sampling(cfg: &ExperimentConfig) -> RunResult<WeightedRun> {
    let die = weighted_die(cfg)?;
    let counts = roll_die(&die, cfg.weighted.draws, cfg.seed);
    let expected_p = die.probabilities();
    let gof = if die.len() >= 2 { chi_squared_gof(&counts, &expected_p)? } else { ChiSquaredTest { statistic: 0.0, dof: 0, p_value: 1.0 } };
    Ok(WeightedRun { rates: die.rates().to_vec(), expected_p, counts, gof })
}

#[derive(Debug, Clone, Serialize)]
pub struct IsingRun {
    pub n_spins: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub acceptance_rate: f64,
    pub empirical: Vec<f64>,
    pub boltzmann: Vec<f64>,
    pub total_variation: f64,
}

pub fn ising_problem(cfg: &ExperimentConfig) -> RunResult<IsingProblem> {
    let beta = cfg.ising.beta;
    let mut problem = match &cfg.ising.model {
        IsingModel::Grid { rows, cols, coupling, field } => ferromagnetic_grid(*rows, *cols, *coupling, *field, beta)?,
        IsingModel::Explicit { couplings, fields } => IsingProblem::new(couplings.clone(), fields.clone(), beta)?,
        IsingModel::Random { n, scale, seed } => random_couplings(*n, *scale, *seed, beta)?,
    };
    problem.power_scale = cfg.ising.power_scale;
    problem.validate()?;
    Ok(problem)
}

/// Metropolis-Hastings chain with temporal acceptance, compared with the
/// enumerated Boltzmann distribution.
pub fn mh_ising(cfg: &ExperimentConfig) -> RunResult<IsingRun> {
    let problem = ising_problem(cfg)?;
    let boltzmann = exact_boltzmann(&problem)?;
    let n = problem.n_spins();
    let mut chain = IsingChain::new(&problem, SpinState::all_up(n), aux_stream(cfg.seed, ISING_STREAM))?;
    for _ in 0..cfg.ising.burn_in {
        chain.step();
    }
    let mut counts = vec![0u64; boltzmann.len()];
    for _ in 0..cfg.ising.steps {
        counts[chain.step().index()] += 1;
    }
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / cfg.ising.steps as f64).collect();
    Ok(IsingRun {
        n_spins: n,
        steps: cfg.ising.steps,
        burn_in: cfg.ising.burn_in,
        acceptance_rate: chain.acceptance_rate(),
        total_variation: total_variation(&empirical, &boltzmann),
        empirical,
        boltzmann,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftRun {
    pub current_ua: f64,
    pub duration_s: f64,
    pub n_ap_dwells: usize,
    pub report: DriftReport,
}

/// Long constant-current record split into successive bins of AP dwells.
/// The record grows until it holds enough complete AP dwells.
pub fn drift_run(cfg: &ExperimentConfig) -> RunResult<DriftRun> {
    let dr = &cfg.drift_run;
    let needed = dr.bins * dr.events_per_bin;
    let i = dr.current_ua;
    let cycle = cfg.device.law(MagState::P).mean_dwell(i)? + cfg.device.law(MagState::AP).mean_dwell(i)?;
    let mut duration = 1.25 * needed as f64 * cycle;
    for _ in 0..8 {
        let mut rng = aux_stream(cfg.seed, DRIFT_RUN_STREAM);
        let trace = generate_telegraph(&cfg.device, i, duration, &cfg.drift, &mut rng)?;
        let ap = trace.dwells_in(MagState::AP, true);
        if ap.len() >= needed {
            let report = drift_analysis(&ap[..needed], dr.bins)?;
            return Ok(DriftRun { current_ua: i, duration_s: duration, n_ap_dwells: ap.len(), report });
        }
        duration *= 2.0;
    }
    Err(RunError(format!("could not collect {needed} AP dwells at {i} uA")))
}
