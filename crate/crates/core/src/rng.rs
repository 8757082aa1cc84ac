//! Seeded random streams.
//!
//! Every experiment has one root seed. Independent streams are ChaCha8
//! generators keyed by the root seed (expanded with `seed_from_u64`) and
//! selected with the ChaCha stream word. The stream word packs a batch index
//! in the high 32 bits and a trial index in the low 32 bits; auxiliary
//! streams (drift processes, chain proposals) set the top bit. This layout is
//! stable: changing it changes every recorded output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Scalar;

pub type StreamRng = ChaCha8Rng;

const AUX_BIT: u64 = 1 << 63;

/// Stream for trial `trial` of batch `batch`.
pub fn trial_stream(seed: u64, batch: u32, trial: u32) -> StreamRng {
    stream(seed, ((batch as u64) << 32) | trial as u64)
}

/// Auxiliary stream identified by `tag`. Never collides with a trial stream.
pub fn aux_stream(seed: u64, tag: u32) -> StreamRng {
    stream(seed, AUX_BIT | tag as u64)
}

pub fn stream(seed: u64, word: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(word);
    rng
}

/// Uniform draw on (0, 1].
#[inline]
pub fn uniform_open_closed<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let u: f64 = rng.random();
    T::lit(1.0 - u)
}

/// Standard normal draw.
#[inline]
pub fn standard_normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    T::lit(z)
}
