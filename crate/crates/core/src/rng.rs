//! Deterministic random number plumbing.
//!
//! Everything stochastic in this crate is driven by a `u64` master seed.
//! Sub-tasks (Monte Carlo frames, optimizer restarts, sweep cells) derive
//! their own independent stream with [`substream`], so results do not depend
//! on execution order and individual frames can be replayed in isolation.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// One step of the splitmix64 output function; a good 64-bit mixer.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for sub-task `index` of stream `domain` under
/// `master_seed`. The full 256-bit ChaCha key is filled from the mixer so
/// that distinct `(seed, domain, index)` triples give unrelated streams.
pub fn substream(master_seed: u64, domain: u64, index: u64) -> ChaCha12Rng {
    let mut state = master_seed ^ domain.rotate_left(17) ^ index.rotate_left(41);
    // Feed all three inputs through the mixer separately so sparse values
    // (seed 0, low indices) still produce well-spread keys.
    let mut s2 = master_seed;
    let mut s3 = domain.wrapping_add(0xa076_1d64_78bd_642f);
    let mut s4 = index.wrapping_add(0xe703_7ed1_a0b4_28db);
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    key[8..16].copy_from_slice(&splitmix64(&mut s2).to_le_bytes());
    key[16..24].copy_from_slice(&splitmix64(&mut s3).to_le_bytes());
    key[24..32].copy_from_slice(&splitmix64(&mut s4).to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Uniform sample in `[0, 1)` with 53 random bits.
pub fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal sample via the Box-Muller transform.
pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    // u1 in (0, 1] so the log is finite.
    let u1 = 1.0 - uniform_f64(rng);
    let u2 = uniform_f64(rng);
    let r = libm::sqrt(-2.0 * libm::log(u1));
    r * libm::cos(2.0 * core::f64::consts::PI * u2)
}
