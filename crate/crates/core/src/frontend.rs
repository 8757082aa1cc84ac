//! Analog signal path of the delay cell: the voltage-controlled current
//! source, the junction voltage, the hysteresis comparator, and the SR latch
//! that holds the first rising edge.

use serde::{Deserialize, Serialize};

use crate::device::{MagState, TelegraphTrace};
use crate::temporal::EdgeEvent;
use crate::{Error, Result, Scalar};

const MICRO: f64 = 1e-6;

/// Op-amp current source: the device current is pinned to
/// `(v_power - v_in) / r_tc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TransconductanceConfig<T> {
    #[serde(default = "default_v_power")]
    pub v_power: T,
    #[serde(default = "default_r_tc")]
    pub r_tc: T,
    #[serde(default = "default_v_in")]
    pub v_in: T,
}

fn default_v_power<T: Scalar>() -> T {
    T::lit(10.0)
}
fn default_r_tc<T: Scalar>() -> T {
    T::lit(4900.0)
}
fn default_v_in<T: Scalar>() -> T {
    T::lit(5.5018)
}

impl<T: Scalar> Default for TransconductanceConfig<T> {
    fn default() -> Self {
        Self { v_power: default_v_power(), r_tc: default_r_tc(), v_in: default_v_in() }
    }
}

impl<T: Scalar> TransconductanceConfig<T> {
    /// Input voltage that sets `current_ua` with the given supply and resistor.
    pub fn for_current(v_power: T, r_tc: T, current_ua: T) -> Self {
        Self { v_power, r_tc, v_in: v_power - current_ua * T::lit(MICRO) * r_tc }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_tc > T::zero()) {
            return Err(Error::param("r_tc", "must be > 0"));
        }
        if !(self.v_power >= self.v_in) {
            return Err(Error::param(
                "v_in",
                format!("v_in = {} V exceeds v_power = {} V (reverse current)", self.v_in, self.v_power),
            ));
        }
        Ok(())
    }
}

/// Device current in microamps.
pub fn transconductance_current<T: Scalar>(cfg: &TransconductanceConfig<T>) -> Result<T> {
    cfg.validate()?;
    Ok((cfg.v_power - cfg.v_in) / cfg.r_tc / T::lit(MICRO))
}

/// Parallel and antiparallel resistances (ohms) of a circular junction from
/// its TMR ratio, resistance-area product (ohm um^2) and diameter (nm).
pub fn device_resistances<T: Scalar>(tmr: T, ra_product: T, diameter_nm: T) -> Result<(T, T)> {
    if !(tmr >= T::zero()) || !(ra_product > T::zero()) || !(diameter_nm > T::zero()) {
        return Err(Error::param("device_resistances", "need tmr >= 0, ra_product > 0, diameter > 0"));
    }
    let radius_um = diameter_nm * T::lit(1e-3) / T::lit(2.0);
    let area = T::lit(std::f64::consts::PI) * radius_um * radius_um;
    let r_p = ra_product / area;
    Ok((r_p, r_p * (T::one() + tmr)))
}

/// Hysteresis comparator built from an op-amp with positive feedback through
/// `r_f` and a threshold resistor `r_hth` to `v_ref`. `response_time` is the
/// comparator dead time: excursions shorter than it are not resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HysteresisConfig<T> {
    pub r_f: T,
    pub r_hth: T,
    pub v_ref: T,
    #[serde(default = "default_v_dd")]
    pub v_dd: T,
    #[serde(default)]
    pub response_time: T,
}

fn default_v_dd<T: Scalar>() -> T {
    T::lit(5.0)
}

impl<T: Scalar> HysteresisConfig<T> {
    /// Signal-path comparator: 50 kOhm feedback, 1 kOhm threshold resistor,
    /// 0.54 V reference, 100 ns response time.
    pub fn signal_path() -> Self {
        Self {
            r_f: T::lit(50e3),
            r_hth: T::lit(1e3),
            v_ref: T::lit(0.54),
            v_dd: default_v_dd(),
            response_time: T::lit(100e-9),
        }
    }

    /// Reference-path comparator: 24.9 kOhm feedback, 100 Ohm threshold
    /// resistor, 5.5 V reference.
    pub fn reference_path() -> Self {
        Self { r_f: T::lit(24.9e3), r_hth: T::lit(100.0), v_ref: T::lit(5.5), v_dd: default_v_dd(), response_time: T::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_f > T::zero()) || !(self.r_hth > T::zero()) {
            return Err(Error::param("r_f", "hysteresis resistances must be > 0"));
        }
        if !(self.v_dd > T::zero()) {
            return Err(Error::param("v_dd", "must be > 0"));
        }
        if !(self.response_time >= T::zero()) {
            return Err(Error::param("response_time", "must be >= 0"));
        }
        Ok(())
    }
}

/// Upper and lower switching thresholds `(v_th, v_tl)` of the comparator.
pub fn hysteresis_thresholds<T: Scalar>(cfg: &HysteresisConfig<T>) -> (T, T) {
    let sum = cfg.r_hth + cfg.r_f;
    let v_tl = cfg.r_f / sum * cfg.v_ref;
    let v_th = cfg.r_hth / sum * cfg.v_dd + v_tl;
    (v_th, v_tl)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DigitalEdge<T> {
    pub time: T,
    /// Level after the edge: `true` for a rising edge.
    pub high: bool,
}

/// Comparator output as a list of level transitions over `[0, end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DigitalEdgeTrace<T> {
    pub initial_high: bool,
    pub edges: Vec<DigitalEdge<T>>,
    pub end: T,
}

impl<T: Scalar> DigitalEdgeTrace<T> {
    pub fn validate(&self) -> Result<()> {
        let mut level = self.initial_high;
        let mut last = T::neg_infinity();
        for e in &self.edges {
            if e.high == level {
                return Err(Error::param("edges", "levels must alternate"));
            }
            if !(e.time > last) {
                return Err(Error::param("edges", "times must strictly increase"));
            }
            level = e.high;
            last = e.time;
        }
        Ok(())
    }

    pub fn rising_edges(&self) -> impl Iterator<Item = T> + '_ {
        self.edges.iter().filter(|e| e.high).map(|e| e.time)
    }

    /// Removes every high pulse narrower than `min_width`, including a pulse
    /// still high at `end`. A pulse already high at time zero is kept.
    pub fn filter_short_pulses(&self, min_width: T) -> Self {
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut k = 0;
        while k < self.edges.len() {
            let e = self.edges[k];
            if e.high {
                let fall = self.edges.get(k + 1).map_or(self.end, |f| f.time);
                if fall - e.time >= min_width {
                    edges.push(e);
                    if let Some(f) = self.edges.get(k + 1) {
                        edges.push(*f);
                    }
                }
                k += 2;
            } else {
                edges.push(e);
                k += 1;
            }
        }
        Self { initial_high: self.initial_high, edges, end: self.end }
    }
}

/// Converts a telegraph trace into comparator output.
///
/// The junction voltage `I * R(state)` drives the comparator directly. Every
/// P to AP transition rises and every AP to P transition falls, except that
/// an AP dwell shorter than the comparator response time (including a
/// truncated final dwell) produces no edges at all.
pub fn digitize<T: Scalar>(
    trace: &TelegraphTrace<T>,
    i: T,
    r_p: T,
    r_ap: T,
    cfg: &HysteresisConfig<T>,
) -> Result<DigitalEdgeTrace<T>> {
    let (v_th, v_tl) = hysteresis_thresholds(cfg);
    let v_low = i * T::lit(MICRO) * r_p;
    let v_high = i * T::lit(MICRO) * r_ap;
    if !(v_low < v_tl && v_high > v_th) {
        return Err(Error::NoSignal { v_low: v_low.as_f64(), v_high: v_high.as_f64(), v_tl: v_tl.as_f64(), v_th: v_th.as_f64() });
    }
    let initial_high = trace.start_state == MagState::AP;
    let mut edges = Vec::new();
    let last = trace.dwells.len().saturating_sub(1);
    for (k, (state, start, dwell)) in trace.segments().enumerate() {
        if state != MagState::AP || (k == 0 && initial_high) {
            continue;
        }
        if dwell < cfg.response_time {
            continue;
        }
        edges.push(DigitalEdge { time: start, high: true });
        if k < last {
            edges.push(DigitalEdge { time: start + dwell, high: false });
        }
    }
    // an unfiltered initial AP dwell ends with a falling edge
    if initial_high && last > 0 {
        edges.insert(0, DigitalEdge { time: trace.dwells[0], high: false });
    }
    Ok(DigitalEdgeTrace { initial_high, edges, end: trace.total })
}

/// SR latch: the first rising edge, or `Never`. A trace that starts high sets
/// the latch at time zero.
pub fn sr_latch<T: Scalar>(edges: &DigitalEdgeTrace<T>) -> EdgeEvent<T> {
    if edges.initial_high {
        return EdgeEvent::At(T::zero());
    }
    edges.rising_edges().next().map_or(EdgeEvent::Never, EdgeEvent::At)
}
