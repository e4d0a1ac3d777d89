//! Closed-form transition law of the Ornstein–Uhlenbeck process
//!
//! ```text
//! dx = θ(μ − x) dt + σ dW,   x(0) = x₀
//! E[x_t]          = x₀e^{−θt} + μ(1 − e^{−θt})
//! Var[x_t]        = σ²/(2θ) · (1 − e^{−2θt})
//! Cov[x_s, x_t]   = σ²/(2θ) · (e^{−θ|t−s|} − e^{−θ(t+s)})
//! ```

use crate::error::{finite, Error, Result};

/// Model quadruple `(θ, μ, σ, x₀)` with `θ > 0`, `σ > 0`, all finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    theta: f64,
    mu: f64,
    sigma: f64,
    x0: f64,
}

impl OuParams {
    pub fn new(theta: f64, mu: f64, sigma: f64, x0: f64) -> Result<Self> {
        finite("theta", theta)?;
        finite("mu", mu)?;
        finite("sigma", sigma)?;
        finite("x0", x0)?;
        if theta <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
            });
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
            });
        }
        Ok(Self {
            theta,
            mu,
            sigma,
            x0,
        })
    }

    /// Mean-reversion rate θ.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Equilibrium level μ.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Volatility σ.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Initial value x₀.
    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Stationary variance σ²/(2θ).
    pub fn stationary_variance(&self) -> f64 {
        self.sigma * self.sigma / (2.0 * self.theta)
    }

    /// `m_t = x₀e^{−θt} + μ(1 − e^{−θt})`.
    pub fn transition_mean(&self, t: TimePoint) -> f64 {
        let decay = libm::exp(-self.theta * t.0);
        self.x0 * decay + self.mu * -libm::expm1(-self.theta * t.0)
    }

    /// `σ_t² = σ²/(2θ)·(1 − e^{−2θt})`.
    pub fn transition_variance(&self, t: TimePoint) -> f64 {
        self.stationary_variance() * -libm::expm1(-2.0 * self.theta * t.0)
    }

    /// Covariance of `x_s` and `x_t`; symmetric in its arguments.
    pub fn covariance(&self, s: TimePoint, t: TimePoint) -> f64 {
        let (lo, hi) = if s.0 <= t.0 { (s.0, t.0) } else { (t.0, s.0) };
        // e^{−θ(hi−lo)} − e^{−θ(hi+lo)} = e^{−θ(hi−lo)} · (1 − e^{−2θ·lo})
        self.stationary_variance()
            * libm::exp(-self.theta * (hi - lo))
            * -libm::expm1(-2.0 * self.theta * lo)
    }

    pub fn transition_law(&self, t: TimePoint) -> GaussianLaw {
        GaussianLaw {
            mean: self.transition_mean(t),
            variance: self.transition_variance(t),
        }
    }

    /// Exact one-step update of the process from `x` over `dt` driven by a
    /// standard normal `xi`.
    pub fn exact_step(&self, x: f64, dt: f64, xi: f64) -> Result<f64> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain {
                what: "step length",
                value: dt,
            });
        }
        finite("xi", xi)?;
        let decay = libm::exp(-self.theta * dt);
        let mean = x * decay + self.mu * -libm::expm1(-self.theta * dt);
        let var = self.stationary_variance() * -libm::expm1(-2.0 * self.theta * dt);
        Ok(mean + libm::sqrt(var) * xi)
    }
}

/// Nonnegative finite time.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TimePoint(f64);

impl TimePoint {
    pub const ZERO: TimePoint = TimePoint(0.0);

    pub fn new(t: f64) -> Result<Self> {
        if t.is_finite() && t >= 0.0 {
            Ok(Self(t))
        } else {
            Err(Error::InvalidParameter {
                name: "t",
                value: t,
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// One-dimensional normal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLaw {
    mean: f64,
    variance: f64,
}

impl GaussianLaw {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        finite("mean", mean)?;
        finite("variance", variance)?;
        if variance < 0.0 {
            return Err(Error::InvalidParameter {
                name: "variance",
                value: variance,
            });
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.variance)
    }

    /// Maps a standard normal draw onto this law. A zero variance returns the mean.
    pub fn sample_with(&self, xi: f64) -> f64 {
        if self.variance == 0.0 {
            self.mean
        } else {
            self.mean + self.std_dev() * xi
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if self.variance == 0.0 {
            return if x < self.mean { 0.0 } else { 1.0 };
        }
        crate::normal::std_normal_cdf((x - self.mean) / self.std_dev())
    }
}
