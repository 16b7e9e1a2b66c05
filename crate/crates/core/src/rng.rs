//! Counter-based random numbers.
//!
//! Every value is a pure function of `(seed, stream, counter)`, so any draw
//! can be recomputed in isolation and in any language:
//!
//! ```text
//! mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!          z ^ (z >> 31)                          (SplitMix64 finalizer)
//! key      = mix(seed ^ mix(stream + 0x9E3779B97F4A7C15))
//! word(n)  = mix(key + (n + 1) * 0x9E3779B97F4A7C15)      (wrapping u64)
//! uniform  = (word >> 11) * 2^-53                          in [0, 1)
//! ```

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    /// Stream `stream` (e.g. an ensemble member index) of generator `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: mix(seed ^ mix(stream.wrapping_add(GOLDEN))),
            counter: 0,
        }
    }

    /// The `n`-th word of this stream, independent of the current position.
    pub fn word_at(&self, n: u64) -> u64 {
        mix(self.key.wrapping_add(n.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    pub fn next_u64(&mut self) -> u64 {
        let w = self.word_at(self.counter);
        self.counter += 1;
        w
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[min, max]`; exactly `min` when the interval is degenerate.
    pub fn uniform(&mut self, min: f64, max: f64) -> f64 {
        let u = self.next_f64();
        (min + u * (max - min)).min(max)
    }

    pub fn position(&self) -> u64 {
        self.counter
    }
}
