//! Race-logic primitives. Information is carried by the arrival time of a
//! rising edge; an edge that never arrives is [`EdgeEvent::Never`].
//!
//! Gates are ideal: zero propagation delay, instantaneous edges. At exact
//! ties the blocking input wins, and a race between equal finite arrivals
//! goes to the lowest index.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::sample_dwell;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum EdgeEvent<T> {
    At(T),
    Never,
}

impl<T: Scalar> EdgeEvent<T> {
    /// Edge at `t`; infinite times map to `Never`.
    pub fn at(t: T) -> Self {
        if t.is_finite() {
            EdgeEvent::At(t)
        } else {
            EdgeEvent::Never
        }
    }

    pub fn time(self) -> Option<T> {
        match self {
            EdgeEvent::At(t) => Some(t),
            EdgeEvent::Never => None,
        }
    }

    pub fn is_never(self) -> bool {
        matches!(self, EdgeEvent::Never)
    }

    /// Arrival order; `Never` is later than every finite time.
    pub fn arrival_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (EdgeEvent::At(a), EdgeEvent::At(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
            (EdgeEvent::At(_), EdgeEvent::Never) => Ordering::Less,
            (EdgeEvent::Never, EdgeEvent::At(_)) => Ordering::Greater,
            (EdgeEvent::Never, EdgeEvent::Never) => Ordering::Equal,
        }
    }

    pub fn arrives_before(&self, other: &Self) -> bool {
        self.arrival_cmp(other) == Ordering::Less
    }

    pub fn shifted(self, dt: T) -> Self {
        match self {
            EdgeEvent::At(t) => EdgeEvent::at(t + dt),
            EdgeEvent::Never => EdgeEvent::Never,
        }
    }
}

impl<T: Scalar> PartialOrd for EdgeEvent<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.arrival_cmp(other))
    }
}

/// Deterministic delay cell.
pub fn ddc<T: Scalar>(t0: T, delay: T) -> EdgeEvent<T> {
    EdgeEvent::at(t0 + delay)
}

/// Probabilistic delay cell: an edge after an exponential delay with rate
/// `lambda`.
pub fn pdc<T: Scalar, R: Rng + ?Sized>(t0: T, lambda: T, rng: &mut R) -> EdgeEvent<T> {
    EdgeEvent::at(t0 + sample_dwell(lambda, rng))
}

/// Inhibit gate: `i_edge` passes only if it arrives strictly before
/// `b_edge`.
pub fn inhibit<T: Scalar>(i_edge: EdgeEvent<T>, b_edge: EdgeEvent<T>) -> EdgeEvent<T> {
    if i_edge.arrives_before(&b_edge) {
        i_edge
    } else {
        EdgeEvent::Never
    }
}

/// OR over edges: the first arrival.
pub fn or_race<T: Scalar>(edges: &[EdgeEvent<T>]) -> Result<EdgeEvent<T>> {
    if edges.is_empty() {
        return Err(Error::EmptyRace);
    }
    Ok(first_arrival(edges))
}

fn first_arrival<T: Scalar>(edges: &[EdgeEvent<T>]) -> EdgeEvent<T> {
    edges.iter().copied().fold(EdgeEvent::Never, |best, e| if e.arrives_before(&best) { e } else { best })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RaceOutcome<T> {
    /// `None` when no input ever arrives.
    pub winner: Option<usize>,
    pub winner_time: EdgeEvent<T>,
    pub one_hot: Vec<bool>,
}

/// n-way race: the first arrival wins, ties to the lowest index.
pub fn one_hot_race<T: Scalar>(edges: &[EdgeEvent<T>]) -> Result<RaceOutcome<T>> {
    if edges.is_empty() {
        return Err(Error::EmptyRace);
    }
    let mut winner = None;
    let mut best = EdgeEvent::Never;
    for (k, e) in edges.iter().enumerate() {
        if e.arrives_before(&best) {
            best = *e;
            winner = Some(k);
        }
    }
    let mut one_hot = vec![false; edges.len()];
    if let Some(w) = winner {
        one_hot[w] = true;
    }
    Ok(RaceOutcome { winner, winner_time: best, one_hot })
}

/// Cross-coupled inhibit pair: each edge blocks the other.
pub fn cross_coupled_pair<T: Scalar>(a: EdgeEvent<T>, b: EdgeEvent<T>) -> (EdgeEvent<T>, EdgeEvent<T>) {
    (inhibit(a, b), inhibit(b, a))
}

/// Gate-level n-input race network: every input passes through an inhibit
/// gate whose blocking input is the OR of all the other inputs. Returns the
/// gate outputs.
pub fn inhibit_network<T: Scalar>(edges: &[EdgeEvent<T>]) -> Vec<EdgeEvent<T>> {
    (0..edges.len())
        .map(|j| {
            let others: Vec<_> = edges.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, e)| *e).collect();
            inhibit(edges[j], first_arrival(&others))
        })
        .collect()
}
