//! Equidistributed Weyl sequences `y_j = frac(j·√p_k)` over the primes.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// The `k`-th prime, 1-based (`nth_prime(1) == 2`).
pub fn nth_prime(k: u32) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "stream",
            value: 0.0,
        });
    }
    let mut found = 0u32;
    let mut candidate = 1u64;
    while found < k {
        candidate += 1;
        if is_prime(candidate) {
            found += 1;
        }
    }
    Ok(candidate)
}

fn is_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The sequence `frac(j·√p_k)`, `j = 1, 2, …`, for one stream `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylSequence {
    stream: u32,
    prime: u64,
    root: f64,
    max_index: u64,
}

impl WeylSequence {
    pub fn new(stream: u32) -> Result<Self> {
        Ok(Self::with_prime(stream, nth_prime(stream)?))
    }

    fn with_prime(stream: u32, prime: u64) -> Self {
        let root = libm::sqrt(prime as f64);
        let max_index = ((1u64 << 52) as f64 / root) as u64;
        Self {
            stream,
            prime,
            root,
            max_index,
        }
    }

    /// Stream `k + 1`, searching upward from `p_k` instead of from 2.
    pub fn successor(&self) -> Result<Self> {
        let stream = self.stream.checked_add(1).ok_or(Error::InvalidParameter {
            name: "stream",
            value: f64::from(self.stream),
        })?;
        let mut candidate = self.prime + 1;
        while !is_prime(candidate) {
            candidate += 1;
        }
        Ok(Self::with_prime(stream, candidate))
    }

    pub fn stream(&self) -> u32 {
        self.stream
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Largest index with fractional precision left in `j·√p`.
    pub fn max_index(&self) -> u64 {
        self.max_index
    }

    /// `frac(j·√p)` for `j ≥ 1`.
    pub fn value(&self, j: u64) -> Result<f64> {
        if j == 0 || j > self.max_index {
            return Err(Error::PrecisionExhausted {
                stream: self.stream,
                index: j,
            });
        }
        let x = j as f64 * self.root;
        Ok(x - libm::floor(x))
    }
}

/// First `n` terms of Weyl stream `k`.
pub fn weyl_uniform(k: u32, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let seq = WeylSequence::new(k)?;
    (1..=n as u64).map(|j| seq.value(j)).collect()
}
