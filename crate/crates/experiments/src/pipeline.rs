//! The probabilistic delay cell measurement chain: current step, telegraph,
//! comparator, latch, and counter.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smtj_core::device::{drift_log_rate, generate_telegraph_from, MagState};
use smtj_core::frontend::{digitize, hysteresis_thresholds, sr_latch};
use smtj_core::rng::{aux_stream, trial_stream};
use smtj_core::timing::{effective_dwell_filter, measure_window};
use smtj_core::{ClockConfig, CountResult, DriftModel, EdgeEvent, HysteresisConfig, TelegraphTrace};

use crate::config::ExperimentConfig;

/// Aux stream tag of the trial-to-trial drift process.
pub const DRIFT_STREAM: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub current_ua: f64,
    /// Ground-truth first P to AP switch, seconds after the step.
    pub true_time: Option<f64>,
    pub count: CountResult,
    /// `count * period`.
    pub inferred_time: f64,
}

impl TrialRecord {
    /// Switching delay recovered from the count: the path offset removed and
    /// the mid-period quantization bias added back. `None` on overflow.
    pub fn delay_estimate(&self, clock: &ClockConfig) -> Option<f64> {
        (!self.count.overflowed).then(|| self.inferred_time - clock.path_offset + clock.period / 2.0)
    }
}

/// Comparator used at current `i`. With `auto_reference`, a window that
/// cannot separate the P and AP voltage levels is shifted (same width) to sit
/// midway between them.
pub fn signal_comparator(cfg: &ExperimentConfig, i: f64) -> HysteresisConfig {
    let base = cfg.frontend.signal;
    if !cfg.frontend.auto_reference {
        return base;
    }
    let (v_th, v_tl) = hysteresis_thresholds(&base);
    let (v_low, v_high) = (i * 1e-6 * cfg.device.r_p, i * 1e-6 * cfg.device.r_ap);
    if v_low < v_tl && v_high > v_th {
        return base;
    }
    // v_tl scales with v_ref; keep the window width and move its center
    let gain = base.r_f / (base.r_f + base.r_hth);
    let target_tl = (v_low + v_high) / 2.0 - (v_th - v_tl) / 2.0;
    HysteresisConfig { v_ref: target_tl / gain, ..base }
}

/// Latch event for a trace measured at current `i`: comparator response
/// filtering, then the counter's minimum resolvable pulse, then the latch.
pub fn latch_event(trace: &TelegraphTrace, i: f64, cfg: &ExperimentConfig) -> smtj_core::Result<EdgeEvent> {
    let comparator = signal_comparator(cfg, i);
    let edges = digitize(trace, i, cfg.device.r_p, cfg.device.r_ap, &comparator)?;
    let min_width = effective_dwell_filter(comparator.response_time, &cfg.timing);
    Ok(sr_latch(&edges.filter_short_pulses(min_width)))
}

/// One current step: the trace runs long enough to fill the counter.
pub fn run_pdc_trial(cfg: &ExperimentConfig, current: f64, batch: u32, trial_index: usize, drift_offset: f64) -> smtj_core::Result<TrialRecord> {
    let mut rng = trial_stream(cfg.seed, batch, trial_index as u32);
    run_pdc_trial_with(cfg, current, trial_index, drift_offset, &mut rng)
}

fn run_pdc_trial_with<R: Rng>(cfg: &ExperimentConfig, current: f64, trial_index: usize, drift_offset: f64, rng: &mut R) -> smtj_core::Result<TrialRecord> {
    let clock = &cfg.timing;
    let duration = (clock.max_count() as f64 + 1.0) * clock.period + clock.path_offset.abs();
    // within one trial the drift offset is frozen at its trial value
    let drift = DriftModel { correlation_time: f64::INFINITY, ..cfg.drift };
    let frozen = if cfg.drift.enabled { drift } else { DriftModel::disabled() };
    let (trace, _) = generate_telegraph_from(&cfg.device, current, duration, &frozen, MagState::P, drift_offset, rng)?;
    let latched = latch_event(&trace, current, cfg)?;
    let count = measure_window(EdgeEvent::At(0.0), latched, clock)?;
    Ok(TrialRecord { trial_index, current_ua: current, true_time: trace.first_switch_to_ap(), count, inferred_time: count.inferred_time })
}

/// Log-rate drift offsets for `n` successive trials spaced `trial_period`
/// apart on the experiment clock. All zero when drift is disabled.
pub fn trial_drift_offsets(cfg: &ExperimentConfig, n: usize, trial_period: f64) -> Vec<f64> {
    if !cfg.drift.enabled {
        return vec![0.0; n];
    }
    let mut rng = aux_stream(cfg.seed, DRIFT_STREAM);
    let mut offset = cfg.drift.stationary_sample(&mut rng);
    (0..n)
        .map(|_| {
            let current = offset;
            offset = drift_log_rate(&cfg.drift, offset, trial_period, &mut rng);
            current
        })
        .collect()
}

/// Runs `offsets.len()` trials at `current` in parallel; records come back
/// in trial order.
pub fn run_batch(cfg: &ExperimentConfig, current: f64, batch: u32, offsets: &[f64]) -> smtj_core::Result<Vec<TrialRecord>> {
    offsets.par_iter().enumerate().map(|(k, &off)| run_pdc_trial(cfg, current, batch, k, off)).collect()
}
