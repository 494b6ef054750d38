//! Counter-based Gaussian streams.
//!
//! Every draw is a pure function of `(master_seed, stream_id, counter)`:
//! Philox4x32-10 keyed by the master seed encrypts the 128-bit counter
//! `[block_lo, block_hi, stream_lo, stream_hi]`. A Monte Carlo path owns one
//! stream, so results do not depend on which thread simulates which path or in
//! what order.

use rand_core::{impls, Error as RandError, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Identifies one reproducible stream of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    /// Typically the path index.
    pub stream_id: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// The stream `offset` places after this one under the same master seed.
    pub const fn nth(self, offset: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: self.stream_id.wrapping_add(offset),
        }
    }

    /// A master seed decorrelated from this one, for a second family of
    /// streams (e.g. another candidate's noise) indexed the same way.
    pub fn derive_family(self, family: u64) -> Self {
        let mut z = self
            .master_seed
            .wrapping_add(family.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Self {
            master_seed: z ^ (z >> 31),
            stream_id: self.stream_id,
        }
    }
}

/// Uniform bits for one `SeedSpec`. Implements [`RngCore`] so `rand_distr`
/// samplers can consume it.
#[derive(Debug, Clone)]
pub struct PhiloxStream {
    key: [u32; 2],
    stream: [u32; 2],
    block: u64,
    buf: [u32; 4],
    idx: usize,
}

impl PhiloxStream {
    pub fn new(seed: SeedSpec) -> Self {
        Self {
            key: [seed.master_seed as u32, (seed.master_seed >> 32) as u32],
            stream: [seed.stream_id as u32, (seed.stream_id >> 32) as u32],
            block: 0,
            buf: [0; 4],
            idx: 4,
        }
    }

    #[inline]
    fn refill(&mut self) {
        let ctr = [
            self.block as u32,
            (self.block >> 32) as u32,
            self.stream[0],
            self.stream[1],
        ];
        self.buf = philox4x32_10(ctr, self.key);
        self.block = self.block.wrapping_add(1);
        self.idx = 0;
    }
}

impl RngCore for PhiloxStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        if self.idx >= 4 {
            self.refill();
        }
        let v = self.buf[self.idx];
        self.idx += 1;
        v
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let lo = u64::from(self.next_u32());
        let hi = u64::from(self.next_u32());
        (hi << 32) | lo
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), RandError> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Standard normal variates drawn from one counter-based stream.
///
/// The state is a plain value: cloning it forks an identical stream, and it can
/// be moved across threads.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    bits: PhiloxStream,
}

impl GaussianStream {
    pub fn new(seed: SeedSpec) -> Self {
        Self {
            bits: PhiloxStream::new(seed),
        }
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.bits)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.bits.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl Iterator for GaussianStream {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}

/// The first `n` standard normal variates of the stream named by `seed`.
pub fn gaussian_stream<T: Scalar>(seed: SeedSpec, n: usize) -> Vec<T> {
    GaussianStream::new(seed).take(n).map(T::lit).collect()
}
