//! Observation and path samplers for the Ornstein–Uhlenbeck process.

use alloc::vec::Vec;

use crate::driver::{DriverKind, GaussianDriver, GaussianSource};
use crate::error::{Error, Result};
use crate::fourier::{FourierTruncation, WienerBasis};
use crate::model::{GaussianLaw, OuParams, TimePoint};
use crate::weyl::WeylSequence;

/// How a single observation `x_t` is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    /// `m_t + σ_t·ξ`, one draw per observation.
    Exact,
    /// Time-changed Brownian motion through the truncated Fourier series,
    /// `N + 1` draws per observation.
    Fourier(FourierTruncation),
}

impl SamplerKind {
    pub fn draws_per_observation(self) -> usize {
        match self {
            SamplerKind::Exact => 1,
            SamplerKind::Fourier(tr) => tr.draws(),
        }
    }
}

/// Draws independent observations of `x_t` at one fixed time.
///
/// The Fourier arm uses
/// `x_t = m_t + σ/√(2θ) · e^{−θt} · W(e^{2θt} − 1)`, with `W` read off the
/// `[0, 1]` series when `e^{2θt} − 1 ≤ 1` and off its rescaling to
/// `[0, e^{2θt} − 1]` beyond that.
#[derive(Debug, Clone)]
pub struct ObservationSampler {
    law: GaussianLaw,
    kind: SamplerKind,
    fourier: Option<FourierArm>,
}

#[derive(Debug, Clone)]
struct FourierArm {
    basis: WienerBasis,
    // σ/√(2θ) · e^{−θt} · √horizon
    scale: f64,
    scratch: Vec<f64>,
}

impl ObservationSampler {
    pub fn new(p: &OuParams, t: TimePoint, kind: SamplerKind) -> Result<Self> {
        if t.get() <= 0.0 {
            return Err(Error::Domain {
                what: "observation time (must be > 0)",
                value: t.get(),
            });
        }
        let law = p.transition_law(t);
        let fourier = match kind {
            SamplerKind::Exact => None,
            SamplerKind::Fourier(tr) => {
                let clock = libm::expm1(2.0 * p.theta() * t.get());
                let horizon = clock.max(1.0);
                if !horizon.is_finite() {
                    return Err(Error::Domain {
                        what: "time change e^{2θt} − 1",
                        value: clock,
                    });
                }
                let basis = WienerBasis::new(clock / horizon, tr)?;
                let scale = p.sigma() / libm::sqrt(2.0 * p.theta())
                    * libm::exp(-p.theta() * t.get())
                    * libm::sqrt(horizon);
                Some(FourierArm {
                    basis,
                    scale,
                    scratch: alloc::vec![0.0; tr.draws()],
                })
            }
        };
        Ok(Self { law, kind, fourier })
    }

    pub fn law(&self) -> GaussianLaw {
        self.law
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn observe<S: GaussianSource + ?Sized>(&mut self, src: &mut S) -> Result<f64> {
        match &mut self.fourier {
            None => Ok(self.law.sample_with(src.next_gaussian()?)),
            Some(arm) => {
                src.fill_gaussian(&mut arm.scratch)?;
                let w = arm.basis.eval(&arm.scratch)?;
                Ok(self.law.mean() + arm.scale * w)
            }
        }
    }
}

/// One Fourier-sampled observation of `x_t`.
pub fn ou_observe<S: GaussianSource + ?Sized>(
    p: &OuParams,
    t: TimePoint,
    src: &mut S,
    trunc: FourierTruncation,
) -> Result<f64> {
    ObservationSampler::new(p, t, SamplerKind::Fourier(trunc))?.observe(src)
}

/// `n` cross-sectional observations at time `t`.
///
/// With the Fourier sampler and a Weyl driver, observation `k` (1-based)
/// reads its own stream `base + k − 1` from the start; every other
/// combination consumes one driver sequentially.
pub fn observations(
    p: &OuParams,
    t: TimePoint,
    driver: DriverKind,
    n: usize,
    sampler: SamplerKind,
) -> Result<Vec<f64>> {
    let mut s = ObservationSampler::new(p, t, sampler)?;
    match (driver, sampler) {
        (DriverKind::Weyl { stream }, SamplerKind::Fourier(_)) => {
            let mut out = Vec::with_capacity(n);
            let mut seq = WeylSequence::new(stream)?;
            for k in 0..n {
                if k > 0 {
                    seq = seq.successor()?;
                }
                out.push(s.observe(&mut GaussianDriver::from_weyl(seq))?);
            }
            Ok(out)
        }
        _ => {
            let mut d = GaussianDriver::new(driver)?;
            (0..n).map(|_| s.observe(&mut d)).collect()
        }
    }
}

/// Strictly increasing, finite, nonnegative sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryGrid(Vec<f64>);

impl TrajectoryGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Empty);
        }
        let mut prev = -1.0;
        for &t in &times {
            if !t.is_finite() || t < 0.0 || t <= prev {
                return Err(Error::InvalidParameter {
                    name: "grid time",
                    value: t,
                });
            }
            prev = t;
        }
        Ok(Self(times))
    }

    /// `steps + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 || horizon.is_nan() || horizon <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: horizon,
            });
        }
        Self::new(
            (0..=steps)
                .map(|i| horizon * i as f64 / steps as f64)
                .collect(),
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }
}

/// One path on `grid` by chaining exact transitions from `(0, x₀)`; one
/// draw per positive grid increment.
pub fn ou_trajectory<S: GaussianSource + ?Sized>(
    p: &OuParams,
    grid: &TrajectoryGrid,
    src: &mut S,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(grid.0.len());
    let (mut t_prev, mut x) = (0.0, p.x0());
    for &t in &grid.0 {
        if t > t_prev {
            x = p.exact_step(x, t - t_prev, src.next_gaussian()?)?;
            t_prev = t;
        }
        out.push((t, x));
    }
    Ok(out)
}
