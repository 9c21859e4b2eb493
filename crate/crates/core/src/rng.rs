use rand::{RngCore, SeedableRng};

/// Identifier of the seed-derivation scheme, recorded in every report so a
/// reader can tell which stream layout produced the numbers.
pub const SEED_DERIVATION: &str = "splitmix64-v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    // SplitMix64 finalizer (Steele-Lea-Flood constants).
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of trial `trial` from the campaign master seed.
///
/// Each trial owns an independent stream keyed by `(master, trial)`, so
/// results do not depend on scheduling or worker count.  The index is mixed
/// before being folded into the master to decorrelate adjacent trials.
#[inline]
pub fn derive_trial_seed(master: u64, trial: u64) -> u64 {
    mix(master ^ mix(trial.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Compact deterministic generator used for every random draw in the crate.
///
/// SplitMix64: one 64-bit state word, one mix per output, portable across
/// platforms and releases.  Statistical quality is ample for Bernoulli edge
/// streams and Monte-Carlo estimates at the scales exercised here, and the
/// tiny state makes per-trial stream derivation cheap.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform f64 in `[0, 1)` (53-bit mantissa).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` via Lemire rejection (unbiased).
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        loop {
            let x = self.next_u64();
            let m = (x as u128).wrapping_mul(bound as u128);
            let lo = m as u64;
            if lo >= bound || lo >= lo.wrapping_neg() % bound {
                return (m >> 64) as u64;
            }
        }
    }

    /// 64 independent Bernoulli(theta) bits, where `theta = threshold / 2^64`.
    ///
    /// Each lane compares its private uniform bit-stream against the binary
    /// expansion of `threshold`, most significant bit first; a lane is decided
    /// as soon as the two streams differ.  Raw words are consumed until every
    /// lane is decided or the threshold's remaining bits are all zero (at
    /// which point no undecided lane can still end up below it), so e.g.
    /// `threshold = 2^63` (a fair coin) costs a single word.
    #[inline]
    pub fn bernoulli_word(&mut self, threshold: u64) -> u64 {
        let mut result = 0u64;
        let mut undecided = !0u64;
        let mut bit = 63u32;
        loop {
            if threshold & ones_from(bit) == 0 || undecided == 0 {
                return result;
            }
            let r = self.next_u64();
            if threshold >> bit & 1 == 1 {
                result |= undecided & !r;
                undecided &= r;
            } else {
                undecided &= !r;
            }
            if bit == 0 {
                // Remaining lanes matched every threshold bit exactly, i.e.
                // their uniform equals the threshold, which is not below it.
                return result;
            }
            bit -= 1;
        }
    }
}

/// Mask with bits `0..=bit` set.
#[inline]
fn ones_from(bit: u32) -> u64 {
    !0u64 >> (63 - bit)
}

/// Fixed-point threshold for `P[draw < threshold] = p` on 64-bit uniforms.
/// Granularity is 2^-64; `p >= 1` saturates and must be special-cased by the
/// caller if exact certainty is required.
#[inline]
pub fn bernoulli_threshold(p: f64) -> u64 {
    debug_assert!((0.0..=1.0).contains(&p));
    let scaled = p * 18_446_744_073_709_551_616.0; // p * 2^64
    if scaled >= 18_446_744_073_709_551_615.0 {
        u64::MAX
    } else {
        scaled as u64
    }
}

impl RngCore for SplitMix64 {
    fn next_u32(&mut self) -> u32 {
        (SplitMix64::next_u64(self) >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        SplitMix64::next_u64(self)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        rand::rand_core::impls::fill_bytes_via_next(self, dest)
    }
}

impl SeedableRng for SplitMix64 {
    type Seed = [u8; 8];

    fn from_seed(seed: Self::Seed) -> Self {
        SplitMix64::new(u64::from_le_bytes(seed))
    }

    fn seed_from_u64(state: u64) -> Self {
        SplitMix64::new(state)
    }
}
