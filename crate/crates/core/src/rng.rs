//! Seedable, splittable 64-bit random number generator.
//!
//! The generator is SplitMix64. Independent streams are derived from a
//! master seed by hashing `(master_seed, purpose-tag, index)` through the
//! SplitMix64 finalizer, so every run of the benchmark draws from a stream
//! that depends only on those three values and not on execution order.
//! Normal deviates come from the Box-Muller transform.

/// SplitMix64 state.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    /// Second Box-Muller deviate, held for the next `next_normal` call.
    spare_normal: Option<f64>,
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Rng {
            state: seed,
            spare_normal: None,
        }
    }

    /// Derive an independent stream from `(master_seed, tag, index)`.
    ///
    /// The tag bytes are folded in FNV-1a style, each byte followed by a
    /// SplitMix64 finalizer pass, so distinct tags give unrelated streams.
    pub fn derive(master_seed: u64, tag: &str, index: u64) -> Self {
        let mut s = master_seed;
        let _ = splitmix64(&mut s);
        for &byte in tag.as_bytes() {
            s ^= byte as u64;
            let _ = splitmix64(&mut s);
        }
        s ^= index;
        let seed = splitmix64(&mut s);
        Rng::from_seed(seed)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform on [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the interval [lo, hi).
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal deviate via Box-Muller on the uniform stream.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 > 0 so the log is finite
        let u1 = self.next_f64().max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_streams() {
        let mut a = Rng::derive(42, "data", 7);
        let mut b = Rng::derive(42, "data", 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_tags_and_indices_differ() {
        let mut a = Rng::derive(42, "data", 0);
        let mut b = Rng::derive(42, "init", 0);
        let mut c = Rng::derive(42, "data", 1);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn uniform_in_range() {
        let mut rng = Rng::from_seed(1);
        for _ in 0..1000 {
            let x = rng.uniform(0.1, 1.1);
            assert!((0.1..1.1).contains(&x));
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = Rng::from_seed(9);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let z = rng.next_normal();
            sum += z;
            sum2 += z * z;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
