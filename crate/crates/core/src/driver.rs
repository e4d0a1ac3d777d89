//! Reproducible sources of standard normal draws.
//!
//! Both arms go through [`inv_normal_cdf`]: the PRNG arm maps 53-bit
//! uniforms from a ChaCha8 stream, the Weyl arm maps `frac(j·√p_k)`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::Result;
use crate::normal::inv_normal_cdf;
use crate::weyl::WeylSequence;

/// Anything that yields standard normal draws one at a time.
pub trait GaussianSource {
    fn next_gaussian(&mut self) -> Result<f64>;

    fn fill_gaussian(&mut self, out: &mut [f64]) -> Result<()> {
        for slot in out {
            *slot = self.next_gaussian()?;
        }
        Ok(())
    }
}

/// Emits the same value forever; `ConstantSource(0.0)` turns every sampler
/// into its conditional-mean path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSource(pub f64);

impl GaussianSource for ConstantSource {
    fn next_gaussian(&mut self) -> Result<f64> {
        Ok(self.0)
    }
}

/// Which generator backs a [`GaussianDriver`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriverKind {
    /// ChaCha8 keyed by `seed`, on independent sub-stream `stream`.
    Prng { seed: u64, stream: u64 },
    /// Weyl sequence over the `stream`-th prime (1-based).
    Weyl { stream: u32 },
}

#[derive(Debug, Clone)]
enum Engine {
    Prng(Box<ChaCha8Rng>),
    Weyl(WeylSequence),
}

/// Deterministic Gaussian stream: equal `(kind, cursor)` always yields the
/// same next draw.
#[derive(Debug, Clone)]
pub struct GaussianDriver {
    kind: DriverKind,
    cursor: u64,
    engine: Engine,
}

impl GaussianDriver {
    pub fn prng(seed: u64) -> Self {
        Self::prng_stream(seed, 0)
    }

    pub fn prng_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            kind: DriverKind::Prng { seed, stream },
            cursor: 0,
            engine: Engine::Prng(Box::new(rng)),
        }
    }

    pub fn weyl(stream: u32) -> Result<Self> {
        let seq = WeylSequence::new(stream)?;
        Ok(Self {
            kind: DriverKind::Weyl { stream },
            cursor: 0,
            engine: Engine::Weyl(seq),
        })
    }

    /// Weyl driver over an already constructed sequence.
    pub fn from_weyl(seq: WeylSequence) -> Self {
        Self {
            kind: DriverKind::Weyl {
                stream: seq.stream(),
            },
            cursor: 0,
            engine: Engine::Weyl(seq),
        }
    }

    pub fn new(kind: DriverKind) -> Result<Self> {
        match kind {
            DriverKind::Prng { seed, stream } => Ok(Self::prng_stream(seed, stream)),
            DriverKind::Weyl { stream } => Self::weyl(stream),
        }
    }

    /// Driver positioned after `cursor` draws.
    pub fn with_cursor(kind: DriverKind, cursor: u64) -> Result<Self> {
        let mut d = Self::new(kind)?;
        d.seek(cursor);
        Ok(d)
    }

    pub fn seek(&mut self, cursor: u64) {
        self.cursor = cursor;
        if let Engine::Prng(rng) = &mut self.engine {
            // one u64 per draw = two 32-bit words
            rng.set_word_pos(u128::from(cursor) * 2);
        }
    }

    pub fn kind(&self) -> DriverKind {
        self.kind
    }

    /// Number of draws consumed so far.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Next point of the underlying uniform sequence, strictly inside (0, 1).
    pub fn next_uniform(&mut self) -> Result<f64> {
        let u = match &mut self.engine {
            Engine::Prng(rng) => {
                ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
            }
            Engine::Weyl(seq) => seq.value(self.cursor + 1)?,
        };
        self.cursor += 1;
        Ok(u)
    }

    pub fn gaussian_stream(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; n];
        self.fill_gaussian(&mut out)?;
        Ok(out)
    }
}

impl GaussianSource for GaussianDriver {
    fn next_gaussian(&mut self) -> Result<f64> {
        inv_normal_cdf(self.next_uniform()?)
    }
}
