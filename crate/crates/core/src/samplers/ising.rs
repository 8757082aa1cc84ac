//! Serial single-spin-flip Metropolis-Hastings on an Ising model, with the
//! acceptance step done by the temporal sampler.
//!
//! Spins are `+1` (stored `true`) or `-1`. The energy is
//! `E(s) = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i`, so flipping spin `i`
//! changes it by `2 s_i (sum_j J_ij s_j + h_i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mh_accept;
use crate::{Error, Result, Scalar};

/// Largest system [`exact_boltzmann`] will enumerate.
pub const MAX_ENUMERATED_SPINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IsingProblem<T> {
    /// Symmetric coupling matrix with zero diagonal.
    pub couplings: Vec<Vec<T>>,
    pub fields: Vec<T>,
    pub beta: T,
    /// Power scale of the temporal embedding; cancels in the acceptance
    /// probability.
    #[serde(default = "one")]
    pub power_scale: T,
}

fn one<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> IsingProblem<T> {
    pub fn new(couplings: Vec<Vec<T>>, fields: Vec<T>, beta: T) -> Result<Self> {
        let p = Self { couplings, fields, beta, power_scale: T::one() };
        p.validate()?;
        Ok(p)
    }

    pub fn n_spins(&self) -> usize {
        self.fields.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.fields.len();
        if n == 0 {
            return Err(Error::param("fields", "need at least one spin"));
        }
        if self.couplings.len() != n || self.couplings.iter().any(|row| row.len() != n) {
            return Err(Error::param("couplings", format!("must be {n} x {n}")));
        }
        for i in 0..n {
            if self.couplings[i][i] != T::zero() {
                return Err(Error::param("couplings", format!("diagonal entry {i} must be zero")));
            }
            for j in 0..i {
                if self.couplings[i][j] != self.couplings[j][i] {
                    return Err(Error::param("couplings", format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        if !(self.beta > T::zero()) {
            return Err(Error::param("beta", "must be > 0"));
        }
        if !(self.power_scale > T::zero()) {
            return Err(Error::param("power_scale", "must be > 0"));
        }
        Ok(())
    }

    /// Field felt by spin `i`: `sum_j J_ij s_j + h_i`.
    pub fn local_field(&self, state: &SpinState, i: usize) -> T {
        self.couplings[i].iter().zip(&state.0).fold(self.fields[i], |acc, (&j, &s)| acc + j * spin::<T>(s))
    }

    pub fn delta_energy(&self, state: &SpinState, i: usize) -> T {
        T::lit(2.0) * spin::<T>(state.0[i]) * self.local_field(state, i)
    }

    pub fn energy(&self, state: &SpinState) -> T {
        let n = self.n_spins();
        let mut e = T::zero();
        for i in 0..n {
            let si = spin::<T>(state.0[i]);
            e = e - self.fields[i] * si;
            for j in (i + 1)..n {
                e = e - self.couplings[i][j] * si * spin::<T>(state.0[j]);
            }
        }
        e
    }
}

#[inline]
fn spin<T: Scalar>(up: bool) -> T {
    if up {
        T::one()
    } else {
        -T::one()
    }
}

/// Spin configuration; `true` is `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinState(pub Vec<bool>);

impl SpinState {
    pub fn all_up(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// State whose bit `i` of `index` gives spin `i`.
    pub fn from_index(n: usize, index: usize) -> Self {
        Self((0..n).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().enumerate().fold(0, |acc, (i, &up)| acc | (up as usize) << i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Running chain: proposes a uniformly chosen spin flip each step and
/// accepts it with [`mh_accept`].
pub struct IsingChain<'a, T, R> {
    problem: &'a IsingProblem<T>,
    state: SpinState,
    rng: R,
    accepted: u64,
    steps: u64,
}

impl<'a, T: Scalar, R: Rng> IsingChain<'a, T, R> {
    pub fn new(problem: &'a IsingProblem<T>, initial: SpinState, rng: R) -> Result<Self> {
        problem.validate()?;
        if initial.len() != problem.n_spins() {
            return Err(Error::param("initial", format!("expected {} spins, got {}", problem.n_spins(), initial.len())));
        }
        Ok(Self { problem, state: initial, rng, accepted: 0, steps: 0 })
    }

    pub fn step(&mut self) -> &SpinState {
        let i = self.rng.random_range(0..self.problem.n_spins());
        let de = self.problem.delta_energy(&self.state, i);
        if mh_accept(de, self.problem.beta, self.problem.power_scale, &mut self.rng) {
            self.state.0[i] = !self.state.0[i];
            self.accepted += 1;
        }
        self.steps += 1;
        &self.state
    }

    pub fn state(&self) -> &SpinState {
        &self.state
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }
}

/// Runs `n_steps` steps and returns the state after each one.
pub fn ising_mh_chain<T: Scalar, R: Rng>(problem: &IsingProblem<T>, initial: SpinState, n_steps: usize, rng: R) -> Result<Vec<SpinState>> {
    if n_steps == 0 {
        return Err(Error::param("n_steps", "must be >= 1"));
    }
    let mut chain = IsingChain::new(problem, initial, rng)?;
    Ok((0..n_steps).map(|_| chain.step().clone()).collect())
}

/// Boltzmann probabilities of every state, indexed by [`SpinState::index`].
pub fn exact_boltzmann<T: Scalar>(problem: &IsingProblem<T>) -> Result<Vec<T>> {
    let n = problem.n_spins();
    if n > MAX_ENUMERATED_SPINS {
        return Err(Error::param("n_spins", format!("enumeration limited to {MAX_ENUMERATED_SPINS} spins")));
    }
    let energies: Vec<T> = (0..1usize << n).map(|k| problem.energy(&SpinState::from_index(n, k))).collect();
    let e_min = energies.iter().copied().fold(T::infinity(), T::min);
    let weights: Vec<T> = energies.iter().map(|&e| (-problem.beta * (e - e_min)).exp()).collect();
    let z = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    Ok(weights.into_iter().map(|w| w / z).collect())
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation<T: Scalar>(p: &[T], q: &[T]) -> T {
    p.iter().zip(q).fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs()) / T::lit(2.0)
}

/// Nearest-neighbour grid with open boundaries, uniform coupling and field.
pub fn ferromagnetic_grid<T: Scalar>(rows: usize, cols: usize, coupling: T, field: T, beta: T) -> Result<IsingProblem<T>> {
    let n = rows * cols;
    let mut j = vec![vec![T::zero(); n]; n];
    for r in 0..rows {
        for c in 0..cols {
            let k = r * cols + c;
            if c + 1 < cols {
                j[k][k + 1] = coupling;
                j[k + 1][k] = coupling;
            }
            if r + 1 < rows {
                j[k][k + cols] = coupling;
                j[k + cols][k] = coupling;
            }
        }
    }
    IsingProblem::new(j, vec![field; n], beta)
}

/// All-to-all couplings drawn uniformly from `[-scale, scale]`, no field.
#[allow(clippy::needless_range_loop)]
pub fn random_couplings<T: Scalar>(n: usize, scale: T, seed: u64, beta: T) -> Result<IsingProblem<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = vec![vec![T::zero(); n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let u: f64 = rng.random_range(-1.0..=1.0);
            j[a][b] = scale * T::lit(u);
            j[b][a] = j[a][b];
        }
    }
    IsingProblem::new(j, vec![T::zero(); n], beta)
}
