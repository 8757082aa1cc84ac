//! Samplers built from delay cells and inhibit gates.
//!
//! * temporal Bernoulli bits: a PDC raced against a DDC set at the quantile
//!   of the wanted probability
//! * Metropolis-Hastings acceptance: the same race with the DDC encoding the
//!   energy change, output inverted
//! * exponential clocks: one PDC per face, first arrival wins

pub mod ising;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::{rate_from_current, DeviceParams};
use crate::temporal::{ddc, inhibit, one_hot_race, pdc};
use crate::{Error, Result, Scalar};

/// Draws a bit that is true with probability `p` using a PDC of mean delay
/// `tau` gated by a DDC of delay `-tau * ln(1 - p)`.
pub fn temporal_bernoulli<T: Scalar, R: Rng + ?Sized>(p: T, tau: T, rng: &mut R) -> Result<bool> {
    if !(p >= T::zero() && p < T::one()) {
        return Err(Error::Probability { p: p.as_f64(), range: "[0, 1)" });
    }
    if !(tau > T::zero()) {
        return Err(Error::param("tau", "must be > 0"));
    }
    let threshold = -tau * (-p).ln_1p();
    let stochastic = pdc(T::zero(), tau.recip(), rng);
    let deterministic = ddc(T::zero(), threshold);
    Ok(!inhibit(stochastic, deterministic).is_never())
}

/// Exact Metropolis acceptance probability `min(1, exp(-beta * delta_e))`.
pub fn mh_acceptance_probability<T: Scalar>(delta_e: T, beta: T) -> T {
    if delta_e <= T::zero() {
        T::one()
    } else {
        (-beta * delta_e).exp()
    }
}

/// Metropolis-Hastings acceptance in the temporal domain.
///
/// A PDC with rate `w * beta` races a DDC at `delta_e / w`; the inhibit
/// output is true when the random delay is shorter, which happens with
/// probability `1 - exp(-beta * delta_e)`. The inverted output is the
/// acceptance decision. A negative energy change puts the DDC edge at or
/// before the start, so the random edge is always blocked and the move is
/// always accepted.
pub fn mh_accept<T: Scalar, R: Rng + ?Sized>(delta_e: T, beta: T, w: T, rng: &mut R) -> bool {
    debug_assert!(beta > T::zero() && w > T::zero());
    let delay = (delta_e / w).max(T::zero());
    let stochastic = pdc(T::zero(), w * beta, rng);
    let deterministic = ddc(T::zero(), delay);
    inhibit(stochastic, deterministic).is_never()
}

/// An n-sided die whose face probabilities are set by PDC rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WeightedDie<T> {
    rates: Vec<T>,
}

impl<T: Scalar> WeightedDie<T> {
    pub fn new(rates: Vec<T>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::param("rates", "need at least one face"));
        }
        if let Some(r) = rates.iter().find(|r| !(**r > T::zero()) || !r.is_finite()) {
            return Err(Error::param("rates", format!("every rate must be finite and > 0, got {r}")));
        }
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Probability that each clock rings first: `rate_j / sum(rates)`.
    pub fn probabilities(&self) -> Vec<T> {
        let total = self.rates.iter().fold(T::zero(), |acc, &r| acc + r);
        self.rates.iter().map(|&r| r / total).collect()
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.rates.iter().map(|&r| r * factor).collect())
    }
}

/// Rolls the die: one PDC per face, the one-hot race picks the winner.
pub fn weighted_sample<T: Scalar, R: Rng + ?Sized>(die: &WeightedDie<T>, rng: &mut R) -> usize {
    let edges: Vec<_> = die.rates.iter().map(|&r| pdc(T::zero(), r, rng)).collect();
    one_hot_race(&edges).ok().and_then(|o| o.winner).expect("finite rates always produce a winner")
}

/// Builds a die by current-addressing devices that share `params`.
pub fn currents_to_rates<T: Scalar>(currents: &[T], params: &DeviceParams<T>) -> Result<WeightedDie<T>> {
    let rates = currents
        .iter()
        .map(|&i| {
            if !params.in_operating_range(i) {
                return Err(Error::CurrentOutOfRange { current_ua: i.as_f64(), min_ua: params.i_min.as_f64(), max_ua: params.i_max.as_f64() });
            }
            rate_from_current(i, params)
        })
        .collect::<Result<Vec<_>>>()?;
    WeightedDie::new(rates)
}

/// Signed characteristic current `i_c / delta` for unit exponent: face
/// probabilities scale as `exp(-I / I_beta)`.
pub fn characteristic_current<T: Scalar>(params: &DeviceParams<T>) -> T {
    params.i_c / params.delta
}
