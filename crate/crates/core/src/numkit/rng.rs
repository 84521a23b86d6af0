//! Seeded random streams. A stream is a ChaCha8 generator keyed by a seed
//! and a 64-bit stream id, so `(seed, stream_id)` fully determines the draw
//! sequence and sibling streams never share state.

use alloc::format;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, Poisson, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for task `index`; depends only on `(seed, stream_id, index)`.
    pub fn substream(&self, index: u64) -> RngStream {
        let id = splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(1)));
        RngStream::new(self.seed, id)
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn draw_normal(&mut self, mean: f64, sd: f64) -> Result<f64> {
        if !(sd >= 0.0) || !mean.is_finite() || !sd.is_finite() {
            return Err(Error::Domain(format!("normal(mean={mean}, sd={sd})")));
        }
        Ok(mean + sd * self.standard_normal())
    }

    pub fn draw_gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
            return Err(Error::Domain(format!("gamma(shape={shape}, rate={rate})")));
        }
        let dist = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Domain(format!("gamma: {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }

    pub fn draw_beta(&mut self, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("beta(a={a}, b={b})")));
        }
        let dist = Beta::new(a, b).map_err(|e| Error::Domain(format!("beta: {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }

    pub fn draw_bernoulli(&mut self, p: f64) -> Result<u64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("bernoulli(p={p})")));
        }
        if p == 0.0 {
            return Ok(0);
        }
        Ok(u64::from(self.uniform() < p))
    }

    pub fn draw_binomial(&mut self, n: u64, p: f64) -> Result<u64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("binomial(n={n}, p={p})")));
        }
        let dist = Binomial::new(n, p).map_err(|e| Error::Domain(format!("binomial: {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }

    pub fn draw_poisson(&mut self, lambda: f64) -> Result<u64> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("poisson(lambda={lambda})")));
        }
        if lambda == 0.0 {
            return Ok(0);
        }
        let dist = Poisson::new(lambda).map_err(|e| Error::Domain(format!("poisson: {e}")))?;
        let v: f64 = dist.sample(&mut self.rng);
        Ok(v as u64)
    }

    pub fn draw_exponential(&mut self, rate: f64) -> Result<f64> {
        self.draw_gamma(1.0, rate)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn replay_is_identical() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        let xa: Vec<f64> = (0..100).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..100).map(|_| b.uniform()).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn bernoulli_zero_is_always_zero() {
        let mut r = RngStream::new(1, 1);
        assert!((0..1000).all(|_| r.draw_bernoulli(0.0).unwrap() == 0));
        assert!((0..1000).all(|_| r.draw_bernoulli(1.0).unwrap() == 1));
    }

    #[test]
    fn invalid_parameters_are_domain_errors() {
        let mut r = RngStream::new(1, 1);
        assert!(r.draw_gamma(0.0, 1.0).is_err());
        assert!(r.draw_gamma(1.0, -1.0).is_err());
        assert!(r.draw_beta(1.0, 0.0).is_err());
        assert!(r.draw_bernoulli(1.5).is_err());
        assert!(r.draw_binomial(3, -0.1).is_err());
        assert!(r.draw_normal(0.0, -1.0).is_err());
    }
}
