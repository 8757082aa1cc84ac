//! Clocked counter that measures the window between the reference edge and
//! the latched signal edge.
//!
//! The counter increments on every clock rising edge inside the enable
//! window `(reference, latched + path_offset]`. Clock edges sit at
//! `start_phase + k * period`. With zero phase and a reference at zero this
//! is plain floor quantization. The count saturates at `2^counter_bits - 1`.

use serde::{Deserialize, Serialize};

use crate::temporal::EdgeEvent;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClockConfig<T> {
    #[serde(default = "default_period")]
    pub period: T,
    /// Signal-path delay minus reference-path delay.
    #[serde(default = "default_path_offset")]
    pub path_offset: T,
    #[serde(default = "default_counter_bits")]
    pub counter_bits: u32,
    /// Phase of the free-running clock relative to the current step, in
    /// `[0, period)`.
    #[serde(default)]
    pub start_phase: T,
}

fn default_period<T: Scalar>() -> T {
    T::lit(500e-9)
}
fn default_path_offset<T: Scalar>() -> T {
    T::lit(625e-9)
}
fn default_counter_bits() -> u32 {
    16
}

impl<T: Scalar> Default for ClockConfig<T> {
    fn default() -> Self {
        Self { period: default_period(), path_offset: default_path_offset(), counter_bits: default_counter_bits(), start_phase: T::zero() }
    }
}

impl<T: Scalar> ClockConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.period > T::zero()) || !self.period.is_finite() {
            return Err(Error::param("period", "must be finite and > 0"));
        }
        if !(1..=64).contains(&self.counter_bits) {
            return Err(Error::param("counter_bits", format!("must be in [1, 64], got {}", self.counter_bits)));
        }
        if !(self.start_phase >= T::zero() && self.start_phase < self.period) {
            return Err(Error::param("start_phase", "must be in [0, period)"));
        }
        if !self.path_offset.is_finite() {
            return Err(Error::param("path_offset", "must be finite"));
        }
        Ok(())
    }

    pub fn max_count(&self) -> u64 {
        u64::MAX >> (64 - self.counter_bits)
    }

    /// Longest interval the counter can represent.
    pub fn max_window(&self) -> T {
        T::from_u64(self.max_count()).unwrap_or_else(T::infinity) * self.period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CountResult<T> {
    pub count: u64,
    pub overflowed: bool,
    /// `count * period`.
    pub inferred_time: T,
}

/// `floor(x / period)` as a scalar, corrected so exact multiples of the
/// period land on their own index despite rounding in the division.
fn floor_ratio<T: Scalar>(x: T, period: T) -> T {
    let mut n = (x / period).floor();
    if n * period > x {
        n = n - T::one();
    } else if (n + T::one()) * period <= x {
        n = n + T::one();
    }
    n
}

/// Number of whole clock periods in `t`.
pub fn quantize<T: Scalar>(t: T, period: T) -> u64 {
    if !(t > T::zero()) {
        return 0;
    }
    floor_ratio(t, period).to_u64().unwrap_or(u64::MAX)
}

/// Counts clock edges between the reference edge and the (offset) latched
/// edge. A latch that never fires saturates the counter.
pub fn measure_window<T: Scalar>(reference: EdgeEvent<T>, latched: EdgeEvent<T>, cfg: &ClockConfig<T>) -> Result<CountResult<T>> {
    let start = reference.time().ok_or(Error::MissingReference)?;
    let max = cfg.max_count();
    let saturated = CountResult { count: max, overflowed: true, inferred_time: T::from_u64(max).unwrap_or_else(T::infinity) * cfg.period };
    let Some(stop) = latched.time().map(|t| t + cfg.path_offset) else {
        return Ok(saturated);
    };
    if stop < start {
        return Err(Error::NegativeInterval { interval: (stop - start).as_f64() });
    }
    let ticks = floor_ratio(stop - cfg.start_phase, cfg.period) - floor_ratio(start - cfg.start_phase, cfg.period);
    match ticks.to_u64() {
        Some(count) if count < max => Ok(CountResult { count, overflowed: false, inferred_time: T::from_u64(count).unwrap() * cfg.period }),
        _ => Ok(saturated),
    }
}

/// Shortest AP excursion the clocked counter can register.
pub fn min_detectable_dwell<T: Scalar>(cfg: &ClockConfig<T>) -> T {
    cfg.period
}

/// Combined dead time of the comparator and the counter.
pub fn effective_dwell_filter<T: Scalar>(response_time: T, cfg: &ClockConfig<T>) -> T {
    response_time.max(min_detectable_dwell(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(period: f64, path_offset: f64) -> ClockConfig<f64> {
        ClockConfig { period, path_offset, ..ClockConfig::default() }
    }

    #[test]
    fn floor_quantization() {
        assert_eq!(quantize(1.2e-6, 500e-9), 2);
        assert_eq!(quantize(0.0, 500e-9), 0);
        let p = 500e-9;
        assert_eq!(quantize(p - 1e-18, p), 0);
        assert_eq!(quantize(p, p), 1);
        for k in 0..10_000u64 {
            assert_eq!(quantize(k as f64 * 3e-7, 3e-7), k);
        }
    }

    #[test]
    fn path_offset_adds_one_count() {
        let r = measure_window(EdgeEvent::At(0.0), EdgeEvent::At(10e-6), &cfg(500e-9, 625e-9)).unwrap();
        assert_eq!(r.count, 21);
        assert!(!r.overflowed);
        assert_eq!(r.inferred_time, 21.0 * 500e-9);
    }

    #[test]
    fn zero_interval() {
        let r = measure_window(EdgeEvent::At(0.0), EdgeEvent::At(0.0), &cfg(500e-9, 0.0)).unwrap();
        assert_eq!(r.count, 0);
    }

    #[test]
    fn long_interval_saturates() {
        let c = cfg(500e-9, 625e-9);
        let r = measure_window(EdgeEvent::At(0.0), EdgeEvent::At(40e-3), &c).unwrap();
        assert_eq!(r.count, 65535);
        assert!(r.overflowed);
        assert!((c.max_window() - 32.7675e-3).abs() < 1e-12);
        let never = measure_window(EdgeEvent::At(0.0), EdgeEvent::Never, &c).unwrap();
        assert_eq!(never, r);
    }

    #[test]
    fn negative_interval_is_an_error() {
        let r = measure_window(EdgeEvent::At(1e-6), EdgeEvent::At(0.0), &cfg(500e-9, 0.0));
        assert!(matches!(r, Err(Error::NegativeInterval { .. })));
        assert_eq!(measure_window(EdgeEvent::Never, EdgeEvent::At(0.0), &cfg(1.0, 0.0)), Err(Error::MissingReference));
    }

    #[test]
    fn counter_width_limits() {
        let c = ClockConfig { counter_bits: 64, ..ClockConfig::<f64>::default() };
        c.validate().unwrap();
        assert_eq!(c.max_count(), u64::MAX);
        let c = ClockConfig { counter_bits: 1, ..ClockConfig::<f64>::default() };
        assert_eq!(c.max_count(), 1);
        assert!(ClockConfig { counter_bits: 0, ..ClockConfig::<f64>::default() }.validate().is_err());
        assert!(ClockConfig { counter_bits: 65, ..ClockConfig::<f64>::default() }.validate().is_err());
    }

    #[test]
    fn start_phase_shifts_tick_positions() {
        let c = ClockConfig { start_phase: 250e-9, path_offset: 0.0, ..ClockConfig::default() };
        // edges at 250 ns, 750 ns: a 600 ns window from zero sees one
        let r = measure_window(EdgeEvent::At(0.0), EdgeEvent::At(600e-9), &c).unwrap();
        assert_eq!(r.count, 1);
    }

    #[test]
    fn dead_times() {
        assert_eq!(min_detectable_dwell(&cfg(500e-9, 0.0)), 500e-9);
        assert_eq!(min_detectable_dwell(&cfg(5e-6, 0.0)), 5e-6);
        assert_eq!(effective_dwell_filter(100e-9, &cfg(500e-9, 0.0)), 500e-9);
    }

    #[test]
    fn paper_constants_give_systematic_offset() {
        // uniform t over [0, 10 ms] on a fine deterministic grid
        let c = cfg(500e-9, 625e-9);
        let n = 100_000;
        let mean = (0..n)
            .map(|k| {
                let t = 10e-3 * (k as f64 + 0.5) / n as f64;
                let r = measure_window(EdgeEvent::At(0.0), EdgeEvent::At(t), &c).unwrap();
                r.count as f64 - quantize(t, c.period) as f64
            })
            .sum::<f64>()
            / n as f64;
        assert!((1.0..2.0).contains(&mean), "mean offset {mean}");
    }

    proptest! {
        #[test]
        fn quantize_is_monotone(a in 0.0f64..1e-2, b in 0.0f64..1e-2, period in 5e-8f64..5e-5) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(quantize(lo, period) <= quantize(hi, period));
        }

        #[test]
        fn offset_bounds_the_error(t in 0.0f64..1e-2, delta in 0.0f64..5e-6, period in 5e-8f64..5e-5) {
            let base = quantize(t, period);
            let shifted = quantize(t + delta, period);
            let bound = (delta / period).ceil() as u64;
            prop_assert!(base <= shifted && shifted <= base + bound);
        }

        #[test]
        fn inferred_time_within_one_period(t in 0.0f64..3e-2, offset in 0.0f64..2e-6) {
            let c = cfg(500e-9, offset);
            let r = measure_window(EdgeEvent::At(0.0), EdgeEvent::At(t), &c).unwrap();
            prop_assume!(!r.overflowed);
            prop_assert!(r.inferred_time <= t + offset);
            prop_assert!(t + offset - r.inferred_time < c.period);
        }
    }
}
