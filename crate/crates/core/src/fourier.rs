//! Truncated random Fourier series for Brownian motion on `[0, 1]`:
//!
//! ```text
//! W_t ≈ ξ₀·t + √2 · Σ_{n=1..N} ξₙ · sin(πnt) / (πn)
//! ```
//!
//! and its Brownian rescaling `√c · W(t/c)` on `[0, c]`.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::driver::GaussianSource;
use crate::error::{Error, Result};

/// Number of sine terms kept in the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FourierTruncation(usize);

impl FourierTruncation {
    pub const DEFAULT_TERMS: usize = 800;

    pub fn new(n_terms: usize) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::InvalidParameter {
                name: "truncation",
                value: 0.0,
            });
        }
        Ok(Self(n_terms))
    }

    pub fn n_terms(self) -> usize {
        self.0
    }

    /// Draws consumed per evaluation: ξ₀ plus one per sine term.
    pub fn draws(self) -> usize {
        self.0 + 1
    }
}

impl Default for FourierTruncation {
    fn default() -> Self {
        Self(Self::DEFAULT_TERMS)
    }
}

/// sin(πx), exact zero at integers.
fn sin_pi(x: f64) -> f64 {
    let mut r = x % 2.0;
    if r > 1.0 {
        r -= 2.0;
    } else if r < -1.0 {
        r += 2.0;
    }
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    libm::sin(PI * r)
}

/// Series coefficients at a fixed time, reusable across draw vectors.
#[derive(Debug, Clone)]
pub struct WienerBasis {
    t: f64,
    coeffs: Vec<f64>,
}

impl WienerBasis {
    pub fn new(t: f64, trunc: FourierTruncation) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                what: "Fourier time (must lie in [0, 1])",
                value: t,
            });
        }
        let coeffs = (1..=trunc.n_terms())
            .map(|n| {
                let n = n as f64;
                SQRT_2 * sin_pi(n * t) / (PI * n)
            })
            .collect();
        Ok(Self { t, coeffs })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn truncation(&self) -> FourierTruncation {
        FourierTruncation(self.coeffs.len())
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.coeffs.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: self.coeffs.len() + 1,
                actual: xi.len(),
            });
        }
        let mut acc = xi[0] * self.t;
        for (x, c) in xi[1..].iter().zip(&self.coeffs) {
            acc += x * c;
        }
        Ok(acc)
    }
}

/// `W_t` on `[0, 1]` from the draws `xi = [ξ₀, ξ₁, …, ξ_N]`.
pub fn wiener_fourier(t: f64, xi: &[f64], trunc: FourierTruncation) -> Result<f64> {
    if xi.len() != trunc.draws() {
        return Err(Error::LengthMismatch {
            expected: trunc.draws(),
            actual: xi.len(),
        });
    }
    WienerBasis::new(t, trunc)?.eval(xi)
}

/// `√c · W(t/c)`, a Brownian motion on `[0, c]`; consumes `N + 1` draws.
pub fn wiener_scaled<S: GaussianSource + ?Sized>(
    t: f64,
    c: f64,
    src: &mut S,
    trunc: FourierTruncation,
) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: c,
        });
    }
    if !(0.0..=c).contains(&t) {
        return Err(Error::Domain {
            what: "time beyond horizon",
            value: t,
        });
    }
    let basis = WienerBasis::new(t / c, trunc)?;
    let mut xi = alloc::vec![0.0; trunc.draws()];
    src.fill_gaussian(&mut xi)?;
    Ok(libm::sqrt(c) * basis.eval(&xi)?)
}
