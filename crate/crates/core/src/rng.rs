//! Counter-based deterministic random stream.
//!
//! Each consumer keys its own stream by a (seed, index) pair, so draws are
//! independent of evaluation order and thread count.

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// A small keyed generator: the stream for a given (seed, index) is fixed
/// regardless of what other streams are drawn.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    pub fn new(seed: u64, index: u64) -> Self {
        let state = mix64(mix64(seed ^ GOLDEN) ^ index.wrapping_mul(GOLDEN).wrapping_add(1));
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normal draws (Box-Muller).
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = std::f64::consts::TAU * u2;
        (r * phi.cos(), r * phi.sin())
    }

    /// Inverse-CDF draw over cumulative weights (last entry is the total).
    pub fn next_index(&mut self, cumulative: &[f64]) -> usize {
        let total = *cumulative.last().expect("non-empty cumulative");
        let u = self.next_f64() * total;
        match cumulative.partition_point(|&c| c <= u) {
            i if i >= cumulative.len() => cumulative.len() - 1,
            i => i,
        }
    }
}
