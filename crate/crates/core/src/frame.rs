//! Frame geometry, QAM mapping and reproducible random streams.

use std::ops::{Deref, DerefMut};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};

/// Grid of `M` delay bins (subcarriers spaced `Δf` apart) by `N` Doppler bins (symbols).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig<T> {
    m: usize,
    n: usize,
    delta_f: T,
    bandwidth: T,
    duration: T,
}

impl<T: Scalar> FrameConfig<T> {
    pub fn new(m: usize, n: usize, delta_f: T) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidFrame(format!("M = {m}, N = {n} must be positive")));
        }
        if !delta_f.is_finite() || delta_f <= T::zero() {
            return Err(Error::InvalidFrame(format!(
                "subcarrier spacing {delta_f} must be positive"
            )));
        }
        Ok(Self {
            m,
            n,
            delta_f,
            bandwidth: T::lit(m as f64) * delta_f,
            duration: T::lit(n as f64) / delta_f,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Frame dimension `MN`, equal to the time-bandwidth product.
    pub fn mn(&self) -> usize {
        self.m * self.n
    }

    pub fn delta_f(&self) -> T {
        self.delta_f
    }

    /// Bandwidth `B = MΔf` in Hz; `1/B` is the delay resolution.
    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    /// Frame duration `T = N/Δf` in seconds; `1/T` is the Doppler resolution.
    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn cast<U: Scalar>(&self) -> FrameConfig<U> {
        FrameConfig::new(self.m, self.n, U::lit(self.delta_f.as_f64()))
            .expect("cast of a valid frame stays valid")
    }
}

/// Information symbols `s[i]`, one per carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector<T>(pub Vec<C<T>>);

impl<T> Deref for SymbolVector<T> {
    type Target = [C<T>];

    fn deref(&self) -> &[C<T>] {
        &self.0
    }
}

impl<T> DerefMut for SymbolVector<T> {
    fn deref_mut(&mut self) -> &mut [C<T>] {
        &mut self.0
    }
}

/// Square Gray-coded QAM with unit average energy.
///
/// Each symbol consumes `log2(order)` bits, the first half selecting the in-phase
/// level and the second half the quadrature level. For 4-QAM this is
/// `(b1, b0) ↦ ((1 − 2b1) + j(1 − 2b0))/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Qam {
    order: usize,
    bits_per_axis: u32,
}

impl Qam {
    pub fn new(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros();
        if order < 4 || !order.is_power_of_two() || !bits.is_multiple_of(2) || bits > 16 {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(Self {
            order,
            bits_per_axis: bits / 2,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis as usize
    }

    fn levels(&self) -> usize {
        1 << self.bits_per_axis
    }

    fn scale(&self) -> f64 {
        let l = self.levels() as f64;
        (2.0 * (l * l - 1.0) / 3.0).sqrt()
    }

    fn level(&self, gray: usize) -> f64 {
        let mut p = gray;
        let mut shift = gray >> 1;
        while shift != 0 {
            p ^= shift;
            shift >>= 1;
        }
        (self.levels() - 1) as f64 - 2.0 * p as f64
    }

    /// Constellation point for index `idx` (bits read MSB first).
    pub fn point<T: Scalar>(&self, idx: usize) -> C<T> {
        let mask = self.levels() - 1;
        let i_word = (idx >> self.bits_per_axis) & mask;
        let q_word = idx & mask;
        let s = self.scale();
        C::new(T::lit(self.level(i_word) / s), T::lit(self.level(q_word) / s))
    }

    pub fn map<T: Scalar>(&self, bits: &[u8]) -> Result<Vec<C<T>>> {
        let k = self.bits_per_symbol();
        if !bits.len().is_multiple_of(k) {
            return Err(Error::BitLength {
                expected: bits.len().div_ceil(k) * k,
                got: bits.len(),
            });
        }
        Ok(bits
            .chunks(k)
            .map(|chunk| {
                let idx = chunk.iter().fold(0usize, |acc, b| (acc << 1) | usize::from(*b & 1));
                self.point(idx)
            })
            .collect())
    }

    /// Minimum-distance hard decision; exact ties resolve to the lowest index.
    pub fn demap<T: Scalar>(&self, symbols: &[C<T>]) -> Vec<u8> {
        let points: Vec<C<T>> = (0..self.order).map(|i| self.point(i)).collect();
        let k = self.bits_per_symbol();
        let mut out = Vec::with_capacity(symbols.len() * k);
        for s in symbols {
            let mut best = 0;
            let mut best_d = (*s - points[0]).norm_sqr();
            for (i, p) in points.iter().enumerate().skip(1) {
                let d = (*s - *p).norm_sqr();
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            out.extend((0..k).rev().map(|b| ((best >> b) & 1) as u8));
        }
        out
    }
}

/// Maps exactly `MN·log2(order)` bits onto a frame's worth of symbols.
pub fn qam_map<T: Scalar>(cfg: &FrameConfig<T>, bits: &[u8], order: usize) -> Result<SymbolVector<T>> {
    let qam = Qam::new(order)?;
    let expected = cfg.mn() * qam.bits_per_symbol();
    if bits.len() != expected {
        return Err(Error::BitLength {
            expected,
            got: bits.len(),
        });
    }
    Ok(SymbolVector(qam.map(bits)?))
}

pub fn qam_demap<T: Scalar>(symbols: &[C<T>], order: usize) -> Result<Vec<u8>> {
    Ok(Qam::new(order)?.demap(symbols))
}

/// Deterministic random stream identified by `(master_seed, stream_id)`.
///
/// Streams with the same master seed but different ids are independent ChaCha
/// streams, so Monte-Carlo trials can draw in any order or in parallel.
#[derive(Debug, Clone)]
pub struct SeededRng {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform sample on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Circularly-symmetric complex Gaussian with `E|z|² = variance`.
    pub fn complex_normal<T: Scalar>(&mut self, variance: f64) -> C<T> {
        let s = (variance / 2.0).sqrt();
        let re = self.standard_normal() * s;
        let im = self.standard_normal() * s;
        C::new(T::lit(re), T::lit(im))
    }

    pub fn bits(&mut self, count: usize) -> Vec<u8> {
        (0..count).map(|_| u8::from(self.inner.random::<bool>())).collect()
    }

    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
