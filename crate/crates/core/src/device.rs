//! Stochastic SMTJ model.
//!
//! Mean dwell time in a state follows the thermally activated law
//! `tau(I) = tau0 * exp(delta * (1 + I / i_c)^alpha)`, with the switching
//! rate its reciprocal. Dwell times are exponentially distributed. The P
//! state uses the configured law; the AP state uses its own law, by default
//! the P law with the critical current sign flipped, so it is stabilized by
//! the same current that destabilizes P.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{standard_normal, uniform_open_closed};
use crate::{Error, Result, Scalar};

/// Junction voltage above which the tunnel barrier is at risk of breakdown.
pub const BARRIER_VOLTAGE_LIMIT: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MagState {
    /// Parallel magnetizations, low resistance.
    P,
    /// Antiparallel magnetizations, high resistance.
    AP,
}

impl MagState {
    pub fn flipped(self) -> Self {
        match self {
            MagState::P => MagState::AP,
            MagState::AP => MagState::P,
        }
    }
}

/// Current dependence of the mean dwell time in one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingLaw<T> {
    /// Characteristic time, seconds.
    pub tau0: T,
    /// Barrier height over thermal energy.
    pub delta: T,
    /// Critical current, microamps. Signed.
    pub i_c: T,
    pub alpha: T,
}

impl<T: Scalar> SwitchingLaw<T> {
    /// `1 + I / i_c`.
    #[inline]
    pub fn reduced_barrier(&self, i: T) -> T {
        T::one() + i / self.i_c
    }

    /// Exponent `delta * (1 + I/i_c)^alpha` of the dwell-time law.
    pub fn exponent(&self, i: T) -> T {
        let base = self.reduced_barrier(i);
        if self.alpha == T::one() {
            self.delta * base
        } else {
            self.delta * base.powf(self.alpha)
        }
    }

    /// Mean dwell time in seconds at current `i` (microamps).
    pub fn mean_dwell(&self, i: T) -> Result<T> {
        let tau = self.tau0 * self.exponent(i).exp();
        if !tau.is_finite() || tau <= T::zero() {
            return Err(Error::RateOverflow { current_ua: i.as_f64() });
        }
        Ok(tau)
    }

    /// Switching rate in 1/s at current `i` (microamps).
    pub fn rate(&self, i: T) -> Result<T> {
        let tau = self.mean_dwell(i)?;
        let rate = tau.recip();
        if !rate.is_finite() || rate <= T::zero() {
            return Err(Error::RateOverflow { current_ua: i.as_f64() });
        }
        Ok(rate)
    }

    /// Same law with the current direction reversed.
    pub fn mirrored(&self) -> Self {
        Self { i_c: -self.i_c, ..*self }
    }

    fn validate(&self, range: (T, T), which: &'static str) -> Result<()> {
        if !(self.tau0 > T::zero()) || !self.tau0.is_finite() {
            return Err(Error::param("tau0", format!("{which} law needs tau0 > 0, got {}", self.tau0)));
        }
        if !(self.delta >= T::zero()) || !self.delta.is_finite() {
            return Err(Error::param("delta", format!("{which} law needs delta >= 0, got {}", self.delta)));
        }
        if self.i_c == T::zero() || !self.i_c.is_finite() {
            return Err(Error::param("i_c", format!("{which} law needs a nonzero critical current")));
        }
        if !(self.alpha > T::zero()) || !self.alpha.is_finite() {
            return Err(Error::param("alpha", format!("{which} law needs alpha > 0, got {}", self.alpha)));
        }
        if self.alpha != T::one() {
            for i in [range.0, range.1] {
                if self.reduced_barrier(i) <= T::zero() {
                    return Err(Error::param(
                        "i_c",
                        format!("{which} law: 1 + I/i_c must stay positive for non-unit alpha (I = {i} uA)"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn default_tau0<T: Scalar>() -> T {
    T::lit(1e-9)
}
fn default_delta<T: Scalar>() -> T {
    T::lit(20.0)
}
fn default_i_c<T: Scalar>() -> T {
    T::lit(-3000.0)
}
fn default_alpha<T: Scalar>() -> T {
    T::one()
}
// 150 nm diameter, 10 Ohm um^2, 120 % TMR
fn default_r_p<T: Scalar>() -> T {
    T::lit(565.884_242_104_516_7)
}
fn default_r_ap<T: Scalar>() -> T {
    T::lit(1_244.945_332_629_937)
}
fn default_i_max<T: Scalar>() -> T {
    T::lit(2000.0)
}

/// Parameters of one SMTJ.
///
/// `tau0`, `delta`, `i_c` and `alpha` define the P-state law. `ap` overrides
/// the AP-state law; when absent it is the P law mirrored in current.
/// `i_min..=i_max` is the operating current range in which the P dwell time
/// must fall strictly with current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DeviceParams<T> {
    #[serde(default = "default_tau0")]
    pub tau0: T,
    #[serde(default = "default_delta")]
    pub delta: T,
    #[serde(default = "default_i_c")]
    pub i_c: T,
    #[serde(default = "default_alpha")]
    pub alpha: T,
    #[serde(default = "default_r_p")]
    pub r_p: T,
    #[serde(default = "default_r_ap")]
    pub r_ap: T,
    #[serde(default)]
    pub i_min: T,
    #[serde(default = "default_i_max")]
    pub i_max: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ap: Option<SwitchingLaw<T>>,
}

impl<T: Scalar> Default for DeviceParams<T> {
    /// Behaviorally calibrated defaults: millisecond dwell times near 918 uA,
    /// about two decades of tunability over 700 uA, and the resistances of a
    /// 150 nm junction with 120 % TMR and 10 Ohm um^2 RA product.
    fn default() -> Self {
        Self {
            tau0: default_tau0(),
            delta: default_delta(),
            i_c: default_i_c(),
            alpha: default_alpha(),
            r_p: default_r_p(),
            r_ap: default_r_ap(),
            i_min: T::zero(),
            i_max: default_i_max(),
            ap: None,
        }
    }
}

impl<T: Scalar> DeviceParams<T> {
    pub fn p_law(&self) -> SwitchingLaw<T> {
        SwitchingLaw { tau0: self.tau0, delta: self.delta, i_c: self.i_c, alpha: self.alpha }
    }

    pub fn ap_law(&self) -> SwitchingLaw<T> {
        self.ap.unwrap_or_else(|| self.p_law().mirrored())
    }

    pub fn law(&self, state: MagState) -> SwitchingLaw<T> {
        match state {
            MagState::P => self.p_law(),
            MagState::AP => self.ap_law(),
        }
    }

    /// Checks every invariant, including the sign convention: over
    /// `i_min..=i_max` the P dwell time must strictly decrease with current.
    /// A zero barrier (`delta == 0`) is accepted as the current-independent
    /// limit.
    pub fn validate(&self) -> Result<()> {
        if !(self.i_min < self.i_max) {
            return Err(Error::param("i_min", "operating range needs i_min < i_max"));
        }
        let range = (self.i_min, self.i_max);
        let p = self.p_law();
        p.validate(range, "P")?;
        self.ap_law().validate(range, "AP")?;
        if p.delta > T::zero() && (p.alpha / p.i_c) >= T::zero() {
            return Err(Error::param(
                "i_c",
                format!(
                    "P dwell time must decrease with current over [{}, {}] uA; i_c = {} makes it increase",
                    self.i_min, self.i_max, self.i_c
                ),
            ));
        }
        if !(self.r_p > T::zero()) || !(self.r_ap > self.r_p) {
            return Err(Error::param("r_ap", format!("need r_ap > r_p > 0, got r_p = {}, r_ap = {}", self.r_p, self.r_ap)));
        }
        Ok(())
    }

    pub fn in_operating_range(&self, i: T) -> bool {
        i >= self.i_min && i <= self.i_max
    }

    pub fn resistance(&self, state: MagState) -> T {
        match state {
            MagState::P => self.r_p,
            MagState::AP => self.r_ap,
        }
    }

    /// Returns the AP-state junction voltage if it exceeds the barrier limit.
    pub fn barrier_voltage_excess(&self, i: T) -> Option<T> {
        let v = (i * T::lit(1e-6) * self.r_ap).abs();
        (v > T::lit(BARRIER_VOLTAGE_LIMIT)).then_some(v)
    }
}

/// P-state switching rate (1/s) at current `i` (microamps).
pub fn rate_from_current<T: Scalar>(i: T, params: &DeviceParams<T>) -> Result<T> {
    params.p_law().rate(i)
}

/// Inverse-transform exponential variate for a given uniform `u` in (0, 1].
#[inline]
pub fn dwell_from_uniform<T: Scalar>(u: T, lambda: T) -> T {
    let t = -u.ln() / lambda;
    // -ln(1) is -0.0
    t.max(T::zero())
}

/// Exponential dwell draw with rate `lambda`.
#[inline]
pub fn sample_dwell<T: Scalar, R: Rng + ?Sized>(lambda: T, rng: &mut R) -> T {
    dwell_from_uniform(uniform_open_closed(rng), lambda)
}

/// Slow drift of the device's log switching rate: an Ornstein-Uhlenbeck
/// process with correlation time `correlation_time` and stationary standard
/// deviation `log_amplitude`. Both states' rates are scaled by the same
/// factor `exp(offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DriftModel<T> {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_correlation_time")]
    pub correlation_time: T,
    #[serde(default = "default_log_amplitude")]
    pub log_amplitude: T,
}

/// Stationary log-rate spread that, at the drift experiment's operating
/// point (3.3 ms dwells, 10 s correlation time), inflates the scatter of
/// 2000-dwell bin means to about 2.8 times their statistical uncertainty.
pub const CALIBRATED_LOG_AMPLITUDE: f64 = 0.072;

fn default_correlation_time<T: Scalar>() -> T {
    T::lit(10.0)
}
fn default_log_amplitude<T: Scalar>() -> T {
    T::lit(CALIBRATED_LOG_AMPLITUDE)
}

impl<T: Scalar> Default for DriftModel<T> {
    fn default() -> Self {
        Self { enabled: false, correlation_time: default_correlation_time(), log_amplitude: default_log_amplitude() }
    }
}

impl<T: Scalar> DriftModel<T> {
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn calibrated() -> Self {
        Self { enabled: true, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.enabled && !(self.correlation_time > T::zero()) {
            return Err(Error::param("correlation_time", "must be > 0 when drift is enabled"));
        }
        if !(self.log_amplitude >= T::zero()) {
            return Err(Error::param("log_amplitude", "must be >= 0"));
        }
        Ok(())
    }

    /// Draw from the stationary distribution; zero when disabled.
    pub fn stationary_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        if !self.enabled || self.log_amplitude == T::zero() {
            return T::zero();
        }
        self.log_amplitude * standard_normal::<T, _>(rng)
    }
}

/// Advances the log-rate offset by `elapsed` seconds using the exact
/// Ornstein-Uhlenbeck transition. Returns zero when drift is disabled.
pub fn drift_log_rate<T: Scalar, R: Rng + ?Sized>(drift: &DriftModel<T>, previous: T, elapsed: T, rng: &mut R) -> T {
    if !drift.enabled || drift.log_amplitude == T::zero() {
        return T::zero();
    }
    let decay = (-elapsed / drift.correlation_time).exp();
    let spread = drift.log_amplitude * (T::one() - decay * decay).max(T::zero()).sqrt();
    decay * previous + spread * standard_normal::<T, _>(rng)
}

/// Alternating sequence of state dwells starting in `start_state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TelegraphTrace<T> {
    pub start_state: MagState,
    pub dwells: Vec<T>,
    pub total: T,
}

impl<T: Scalar> TelegraphTrace<T> {
    /// Builds a trace whose total is the sum of `dwells`.
    pub fn from_dwells(start_state: MagState, dwells: Vec<T>) -> Result<Self> {
        let total = dwells.iter().fold(T::zero(), |acc, &d| acc + d);
        let trace = Self { start_state, dwells, total };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((k, d)) = self.dwells.iter().enumerate().find(|(_, &d)| !(d > T::zero()) || !d.is_finite()) {
            return Err(Error::param("dwells", format!("dwell {k} is not positive ({d})")));
        }
        let sum = self.dwells.iter().fold(T::zero(), |acc, &d| acc + d);
        let tol = T::lit(1e-9).max(T::epsilon() * T::from_usize_lossy(4 * (self.dwells.len() + 1)));
        if (sum - self.total).abs() > tol * self.total.abs().max(T::min_positive_value()) {
            return Err(Error::param("total", format!("dwells sum to {sum}, total is {}", self.total)));
        }
        Ok(())
    }

    pub fn state_of(&self, k: usize) -> MagState {
        if k.is_multiple_of(2) {
            self.start_state
        } else {
            self.start_state.flipped()
        }
    }

    /// `(state, start_time, dwell)` for every dwell, in order.
    pub fn segments(&self) -> impl Iterator<Item = (MagState, T, T)> + '_ {
        self.dwells.iter().enumerate().scan(T::zero(), move |start, (k, &d)| {
            let s = *start;
            *start = s + d;
            Some((self.state_of(k), s, d))
        })
    }

    pub fn transition_count(&self) -> usize {
        self.dwells.len().saturating_sub(1)
    }

    /// Dwells spent in `state`. When `complete_only` is set, the final dwell
    /// (truncated at the end of the trace) is excluded.
    pub fn dwells_in(&self, state: MagState, complete_only: bool) -> Vec<T> {
        let n = if complete_only { self.dwells.len().saturating_sub(1) } else { self.dwells.len() };
        self.dwells[..n].iter().enumerate().filter(|(k, _)| self.state_of(*k) == state).map(|(_, &d)| d).collect()
    }

    pub fn time_in(&self, state: MagState) -> T {
        self.segments().filter(|(s, _, _)| *s == state).fold(T::zero(), |acc, (_, _, d)| acc + d)
    }

    /// Time of the first P to AP transition, if any.
    pub fn first_switch_to_ap(&self) -> Option<T> {
        self.segments().skip(1).find(|(s, _, _)| *s == MagState::AP).map(|(_, start, _)| start)
    }
}

/// Generates a telegraph trace of length `duration` at constant current `i`,
/// starting in the P state with the drift offset drawn from its stationary
/// distribution.
pub fn generate_telegraph<T: Scalar, R: Rng + ?Sized>(
    params: &DeviceParams<T>,
    i: T,
    duration: T,
    drift: &DriftModel<T>,
    rng: &mut R,
) -> Result<TelegraphTrace<T>> {
    let offset = drift.stationary_sample(rng);
    generate_telegraph_from(params, i, duration, drift, MagState::P, offset, rng).map(|(trace, _)| trace)
}

/// Generates a telegraph trace from an explicit starting state and drift
/// offset, returning the trace and the drift offset at its end. The offset is
/// advanced at every transition by the dwell that just ended.
pub fn generate_telegraph_from<T: Scalar, R: Rng + ?Sized>(
    params: &DeviceParams<T>,
    i: T,
    duration: T,
    drift: &DriftModel<T>,
    start_state: MagState,
    initial_offset: T,
    rng: &mut R,
) -> Result<(TelegraphTrace<T>, T)> {
    if !(duration > T::zero()) || !duration.is_finite() {
        return Err(Error::param("duration", format!("must be finite and > 0, got {duration}")));
    }
    drift.validate()?;
    let rate_p = params.law(MagState::P).rate(i)?;
    let rate_ap = params.law(MagState::AP).rate(i)?;

    let mut dwells = Vec::new();
    let mut state = start_state;
    let mut offset = if drift.enabled { initial_offset } else { T::zero() };
    let mut elapsed = T::zero();
    loop {
        let base = match state {
            MagState::P => rate_p,
            MagState::AP => rate_ap,
        };
        let rate = if drift.enabled { base * offset.exp() } else { base };
        let mut dwell = sample_dwell(rate, rng);
        while dwell == T::zero() {
            dwell = sample_dwell(rate, rng);
        }
        let remaining = duration - elapsed;
        if dwell >= remaining {
            if remaining > T::zero() {
                dwells.push(remaining);
            }
            break;
        }
        dwells.push(dwell);
        elapsed = elapsed + dwell;
        if drift.enabled {
            offset = drift_log_rate(drift, offset, dwell, rng);
        }
        state = state.flipped();
    }
    Ok((TelegraphTrace { start_state, dwells, total: duration }, offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_stream;
    use proptest::prelude::*;

    fn flat(rate_p: f64, rate_ap: f64) -> DeviceParams<f64> {
        DeviceParams {
            tau0: 1.0 / rate_p,
            delta: 0.0,
            ap: Some(SwitchingLaw { tau0: 1.0 / rate_ap, delta: 0.0, i_c: 1.0, alpha: 1.0 }),
            ..DeviceParams::default()
        }
    }

    #[test]
    fn defaults_are_valid() {
        DeviceParams::<f64>::default().validate().unwrap();
        DeviceParams::<f32>::default().validate().unwrap();
    }

    #[test]
    fn zero_barrier_rate_is_inverse_tau0() {
        let p = DeviceParams { tau0: 2.5e-6, delta: 0.0, ..DeviceParams::<f64>::default() };
        for i in [-500.0, 0.0, 918.0, 1e4] {
            assert_eq!(rate_from_current(i, &p).unwrap(), 1.0 / 2.5e-6);
        }
    }

    #[test]
    fn rate_at_918_ua_matches_direct_evaluation() {
        let p = DeviceParams::<f64>::default();
        let tau = p.p_law().mean_dwell(918.0).unwrap();
        // 1e-9 * exp(20 * (1 - 918/3000))
        assert!((tau - 1.066_614_316_909_347_5e-3).abs() < 1e-15);
        let rate = rate_from_current(918.0, &p).unwrap();
        assert!((rate - 937.546_012_787_104_6).abs() < 1e-9);
    }

    #[test]
    fn exponent_cancels_at_critical_magnitude() {
        let p = DeviceParams::<f64>::default();
        assert_eq!(p.p_law().mean_dwell(3000.0).unwrap(), p.tau0);
    }

    #[test]
    fn overflow_is_a_domain_error() {
        let p = DeviceParams::<f64>::default();
        let err = rate_from_current(-1e6, &p).unwrap_err();
        assert_eq!(err, Error::RateOverflow { current_ua: -1e6 });
    }

    #[test]
    fn wrong_sign_convention_is_rejected() {
        let p = DeviceParams { i_c: 3000.0, ..DeviceParams::<f64>::default() };
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "i_c", .. })));
        let p = DeviceParams { r_ap: 100.0, ..DeviceParams::<f64>::default() };
        assert!(p.validate().is_err());
        let p = DeviceParams { alpha: 1.5, i_max: 3500.0, ..DeviceParams::<f64>::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn ap_law_mirrors_current() {
        let p = DeviceParams::<f64>::default();
        let ap = p.ap_law();
        assert_eq!(ap.mean_dwell(200.0).unwrap(), p.p_law().mean_dwell(-200.0).unwrap());
        assert_eq!(ap.mean_dwell(0.0).unwrap(), p.p_law().mean_dwell(0.0).unwrap());
    }

    #[test]
    fn barrier_voltage_warning() {
        let p = DeviceParams::<f64>::default();
        assert!(p.barrier_voltage_excess(918.0).is_some());
        assert!(p.barrier_voltage_excess(100.0).is_none());
    }

    #[test]
    fn inverse_transform_boundaries() {
        assert_eq!(dwell_from_uniform(1.0_f64, 937.0), 0.0);
        assert_eq!(dwell_from_uniform(0.5_f64, 2.0), std::f64::consts::LN_2 / 2.0);
    }

    #[test]
    fn dwell_mean_converges() {
        let lambda = 937.0;
        let n = 100_000;
        let mut rng = trial_stream(11, 0, 0);
        let mean = (0..n).map(|_| sample_dwell(lambda, &mut rng)).sum::<f64>() / n as f64;
        let sigma = (1.0 / lambda) / (n as f64).sqrt();
        assert!((mean - 1.0 / lambda).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn f32_dwells_are_usable() {
        let mut rng = trial_stream(3, 0, 0);
        let n = 20_000;
        let mean = (0..n).map(|_| sample_dwell(1000.0_f32, &mut rng)).sum::<f32>() / n as f32;
        assert!((mean - 1e-3).abs() < 3.0 * 1e-3 / (n as f32).sqrt());
    }

    #[test]
    fn transition_count_is_poisson() {
        let p = flat(1000.0, 1000.0);
        let mut rng = trial_stream(5, 0, 0);
        let trace = generate_telegraph(&p, 0.0, 0.2, &DriftModel::disabled(), &mut rng).unwrap();
        trace.validate().unwrap();
        let n = trace.transition_count() as f64;
        assert!((n - 200.0).abs() < 3.0 * 200f64.sqrt(), "{n} transitions");
    }

    #[test]
    fn asymmetric_occupancy_follows_mean_dwells() {
        // lambda_P = 2 lambda_AP: mean AP dwell is twice the P dwell.
        let p = flat(2000.0, 1000.0);
        let mut rng = trial_stream(6, 0, 0);
        let trace = generate_telegraph(&p, 0.0, 50.0, &DriftModel::disabled(), &mut rng).unwrap();
        let frac = trace.time_in(MagState::AP) / trace.total;
        // Delta method over (P, AP) renewal cycles: per-cycle variance of
        // AP - f * (P + AP) is 2/9 ms^2, mean cycle length 1.5 ms.
        let cycles = trace.dwells.len() as f64 / 2.0;
        let se = (2.0f64 / 9.0 / (2.25 * cycles)).sqrt();
        assert!((frac - 2.0 / 3.0).abs() < 3.0 * se, "fraction {frac}, se {se}");
    }

    #[test]
    fn short_duration_yields_single_truncated_dwell() {
        let p = flat(1.0, 1.0);
        let mut rng = trial_stream(8, 0, 0);
        let trace = generate_telegraph(&p, 0.0, 1e-9, &DriftModel::disabled(), &mut rng).unwrap();
        assert_eq!(trace.dwells, vec![1e-9]);
        assert_eq!(trace.start_state, MagState::P);
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let p = DeviceParams { delta: 15.0, ..DeviceParams::<f64>::default() };
        let drift = DriftModel::calibrated();
        let a = generate_telegraph(&p, 0.0, 5.0, &drift, &mut trial_stream(9, 1, 2)).unwrap();
        let b = generate_telegraph(&p, 0.0, 5.0, &drift, &mut trial_stream(9, 1, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dwell_sequence_has_no_lag_one_correlation() {
        let p = flat(1000.0, 1000.0);
        let mut rng = trial_stream(10, 0, 0);
        let trace = generate_telegraph(&p, 0.0, 40.0, &DriftModel::disabled(), &mut rng).unwrap();
        for state in [MagState::P, MagState::AP] {
            let d = trace.dwells_in(state, true);
            let n = d.len() as f64;
            let m = d.iter().sum::<f64>() / n;
            let var = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
            let cov = d.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / (n - 1.0);
            let rho = cov / var;
            assert!(rho.abs() < 3.0 / n.sqrt(), "{state:?} rho {rho}");
        }
    }

    #[test]
    fn drift_disabled_or_zero_amplitude_is_identically_zero() {
        let mut rng = trial_stream(12, 0, 0);
        let zero = DriftModel { enabled: true, correlation_time: 1.0, log_amplitude: 0.0 };
        let mut x = 0.0;
        for _ in 0..100 {
            x = drift_log_rate(&zero, x, 0.3, &mut rng);
            assert_eq!(x, 0.0);
            assert_eq!(drift_log_rate(&DriftModel::disabled(), 1.0, 0.3, &mut rng), 0.0);
        }
    }

    #[test]
    fn drift_is_stationary_with_configured_spread() {
        let drift = DriftModel { enabled: true, correlation_time: 1.0, log_amplitude: 0.2 };
        let mut rng = trial_stream(13, 0, 0);
        let n = 10_000;
        let mut x = 0.0;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            x = drift_log_rate(&drift, x, 50.0, &mut rng);
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / n as f64;
        let sd = (sum2 / n as f64 - mean * mean).sqrt();
        // sample sd of n normals has relative standard error 1/sqrt(2n)
        assert!((sd - 0.2).abs() < 3.0 * 0.2 / (2.0 * n as f64).sqrt(), "sd {sd}");
        assert!(mean.abs() < 3.0 * 0.2 / (n as f64).sqrt());
    }

    #[test]
    fn drift_params_validate() {
        let bad = DriftModel { enabled: true, correlation_time: 0.0, log_amplitude: 0.1 };
        assert!(bad.validate().is_err());
        assert!(DriftModel { log_amplitude: -1.0, ..DriftModel::<f64>::default() }.validate().is_err());
    }

    #[test]
    fn serde_defaults_fill_missing_fields() {
        let p: DeviceParams<f64> = serde_json::from_str(r#"{"delta": 15.0}"#).unwrap();
        assert_eq!(p, DeviceParams { delta: 15.0, ..DeviceParams::default() });
    }

    proptest! {
        #[test]
        fn rate_is_monotone_in_current(a in 0.0f64..2000.0, b in 0.0f64..2000.0, delta in 0.5f64..40.0) {
            let p = DeviceParams { delta, ..DeviceParams::<f64>::default() };
            prop_assume!(p.validate().is_ok());
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(rate_from_current(lo, &p).unwrap() < rate_from_current(hi, &p).unwrap());
        }

        #[test]
        fn traces_respect_invariants(seed in 0u64..500, rate in 10.0f64..5000.0, duration in 1e-3f64..0.5) {
            let p = flat(rate, rate * 0.7);
            let trace = generate_telegraph(&p, 0.0, duration, &DriftModel::calibrated(), &mut trial_stream(seed, 0, 0)).unwrap();
            prop_assert!(trace.validate().is_ok());
            prop_assert!(!trace.dwells.is_empty());
        }
    }
}
