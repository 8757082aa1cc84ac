//! Experiment configuration, read from TOML (or from the `config` field of a
//! run manifest).

use serde::{Deserialize, Serialize};
use smtj_core::device::MagState;
use smtj_core::frontend::transconductance_current;
use smtj_core::stats::TauFitOptions;
use smtj_core::{ClockConfig, DeviceParams, DriftModel, HysteresisConfig, TransconductanceConfig};

/// Accepted counter clock periods, seconds.
pub const PERIOD_RANGE: (f64, f64) = (50e-9, 50e-6);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default)]
    pub device: DeviceParams,
    #[serde(default)]
    pub drift: DriftModel,
    #[serde(default)]
    pub frontend: FrontendConfig,
    #[serde(default)]
    pub timing: ClockConfig,
    #[serde(default)]
    pub pdc: PdcConfig,
    #[serde(default)]
    pub cdf: CdfConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub weighted: WeightedConfig,
    #[serde(default)]
    pub ising: IsingConfig,
    #[serde(default)]
    pub drift_run: DriftRunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontendConfig {
    #[serde(default)]
    pub transconductance: TransconductanceConfig,
    #[serde(default = "HysteresisConfig::signal_path")]
    pub signal: HysteresisConfig,
    #[serde(default = "HysteresisConfig::reference_path")]
    pub reference: HysteresisConfig,
    /// Re-center the signal comparator window on the junction voltage levels
    /// at currents where the fixed thresholds cannot resolve them.
    #[serde(default = "yes")]
    pub auto_reference: bool,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            transconductance: TransconductanceConfig::default(),
            signal: HysteresisConfig::signal_path(),
            reference: HysteresisConfig::reference_path(),
            auto_reference: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdcConfig {
    /// Step current in microamps; defaults to the transconductance setting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_ua: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_bins")]
    pub n_bins: usize,
}

impl Default for PdcConfig {
    fn default() -> Self {
        Self { current_ua: None, trials: default_trials(), n_bins: default_bins() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdfConfig {
    #[serde(default = "default_cdf_currents")]
    pub currents: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl Default for CdfConfig {
    fn default() -> Self {
        Self { currents: default_cdf_currents(), trials: default_trials() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_sweep_currents")]
    pub currents: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Experiment-clock spacing of successive trials, seconds. Only matters
    /// for the drift process.
    #[serde(default = "default_trial_period")]
    pub trial_period: f64,
    #[serde(default)]
    pub fit: TauFitOptions<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { currents: default_sweep_currents(), trials: default_trials(), trial_period: default_trial_period(), fit: TauFitOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedConfig {
    /// Clock rates, 1/s. Ignored when `currents` is given.
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    /// Device currents in microamps; rates follow from the device law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub currents: Option<Vec<f64>>,
    #[serde(default = "default_draws")]
    pub draws: usize,
}

impl Default for WeightedConfig {
    fn default() -> Self {
        Self { rates: default_rates(), currents: None, draws: default_draws() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum IsingModel {
    Grid { rows: usize, cols: usize, coupling: f64, #[serde(default)] field: f64 },
    Explicit { couplings: Vec<Vec<f64>>, fields: Vec<f64> },
    Random { n: usize, scale: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingConfig {
    #[serde(default = "default_ising_model")]
    pub model: IsingModel,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_power_scale")]
    pub power_scale: f64,
    #[serde(default = "default_ising_steps")]
    pub steps: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

impl Default for IsingConfig {
    fn default() -> Self {
        Self {
            model: default_ising_model(),
            beta: default_beta(),
            power_scale: default_power_scale(),
            steps: default_ising_steps(),
            burn_in: default_burn_in(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftRunConfig {
    #[serde(default)]
    pub current_ua: f64,
    #[serde(default = "default_drift_bins")]
    pub bins: usize,
    #[serde(default = "default_events_per_bin")]
    pub events_per_bin: usize,
}

impl Default for DriftRunConfig {
    fn default() -> Self {
        Self { current_ua: 0.0, bins: default_drift_bins(), events_per_bin: default_events_per_bin() }
    }
}

fn yes() -> bool {
    true
}
fn default_trials() -> usize {
    10_000
}
fn default_bins() -> usize {
    smtj_core::stats::DEFAULT_HISTOGRAM_BINS
}
fn default_cdf_currents() -> Vec<f64> {
    vec![918.0, 924.0, 930.0]
}
fn default_sweep_currents() -> Vec<f64> {
    (0..8).map(|k| 650.0 + 100.0 * k as f64).collect()
}
fn default_trial_period() -> f64 {
    2e-3
}
fn default_rates() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}
fn default_draws() -> usize {
    100_000
}
fn default_ising_model() -> IsingModel {
    IsingModel::Grid { rows: 2, cols: 2, coupling: 1.0, field: 0.0 }
}
fn default_beta() -> f64 {
    0.5
}
fn default_power_scale() -> f64 {
    1.0
}
fn default_ising_steps() -> usize {
    1_000_000
}
fn default_burn_in() -> usize {
    100_000
}
fn default_drift_bins() -> usize {
    30
}
fn default_events_per_bin() -> usize {
    2000
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    /// Config with every section at its default.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            device: DeviceParams::default(),
            drift: DriftModel::default(),
            frontend: FrontendConfig::default(),
            timing: ClockConfig::default(),
            pdc: PdcConfig::default(),
            cdf: CdfConfig::default(),
            sweep: SweepConfig::default(),
            weighted: WeightedConfig::default(),
            ising: IsingConfig::default(),
            drift_run: DriftRunConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: "<string>".into(), reason: e.to_string() })
    }

    /// Reads a TOML config, or a run manifest (`.json`) whose `config` field
    /// holds a previously used config.
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: shown.clone(), source })?;
        let parse = |reason: String| ConfigError::Parse { path: shown.clone(), reason };
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: crate::output::Manifest = serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?;
            Ok(manifest.config)
        } else {
            toml::from_str(&text).map_err(|e| parse(e.to_string()))
        }
    }

    /// Step current of the single-current experiments.
    pub fn pdc_current(&self) -> Result<f64, ConfigError> {
        match self.pdc.current_ua {
            Some(i) => Ok(i),
            None => transconductance_current(&self.frontend.transconductance).map_err(|e| ConfigError::Invalid(e.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let core = |e: smtj_core::Error| ConfigError::Invalid(e.to_string());
        self.device.validate().map_err(core)?;
        self.drift.validate().map_err(core)?;
        self.timing.validate().map_err(core)?;
        self.frontend.transconductance.validate().map_err(core)?;
        self.frontend.signal.validate().map_err(core)?;
        self.frontend.reference.validate().map_err(core)?;
        if !(PERIOD_RANGE.0..=PERIOD_RANGE.1).contains(&self.timing.period) {
            return invalid(format!("timing.period = {} s outside [{}, {}] s", self.timing.period, PERIOD_RANGE.0, PERIOD_RANGE.1));
        }
        for (name, n) in [
            ("pdc.trials", self.pdc.trials),
            ("cdf.trials", self.cdf.trials),
            ("sweep.trials", self.sweep.trials),
            ("weighted.draws", self.weighted.draws),
            ("ising.steps", self.ising.steps),
        ] {
            if n == 0 {
                return invalid(format!("{name} must be >= 1"));
            }
        }
        if self.pdc.n_bins < 2 {
            return invalid("pdc.n_bins must be >= 2".into());
        }
        if self.cdf.currents.is_empty() {
            return invalid("cdf.currents must not be empty".into());
        }
        if self.sweep.currents.len() < 4 {
            return invalid(format!("sweep.currents needs at least 4 entries, got {}", self.sweep.currents.len()));
        }
        if self.sweep.trial_period < 0.0 || !self.sweep.trial_period.is_finite() {
            return invalid("sweep.trial_period must be finite and >= 0".into());
        }
        if !(self.sweep.fit.tau0 > 0.0 && self.sweep.fit.alpha > 0.0) {
            return invalid("sweep.fit needs tau0 > 0 and alpha > 0".into());
        }
        if !(self.ising.beta > 0.0 && self.ising.power_scale > 0.0) {
            return invalid("ising.beta and ising.power_scale must be > 0".into());
        }
        if self.drift_run.bins < 2 || self.drift_run.events_per_bin < smtj_core::stats::MIN_EVENTS_PER_BIN {
            return invalid(format!("drift_run needs >= 2 bins of >= {} events", smtj_core::stats::MIN_EVENTS_PER_BIN));
        }
        let mut currents = vec![self.pdc_current()?, self.drift_run.current_ua];
        currents.extend(&self.cdf.currents);
        currents.extend(&self.sweep.currents);
        currents.extend(self.weighted.currents.iter().flatten());
        for &i in &currents {
            if !self.device.in_operating_range(i) {
                return invalid(format!("current {i} uA outside the operating range [{}, {}] uA", self.device.i_min, self.device.i_max));
            }
        }
        if let Some(&i) = currents.iter().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
            if let Some(v) = self.device.barrier_voltage_excess(i) {
                log::warn!("{i} uA puts {v:.3} V across the junction in the {:?} state (limit 0.7 V)", MagState::AP);
            }
        }
        Ok(())
    }
}
