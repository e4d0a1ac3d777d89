//! Cross-sectional estimators of one OU parameter from observations
//! `z₁…z_n` taken on independent trajectories at a common time `t`, with
//! the other parameters known:
//!
//! | parameter | estimator |
//! |-----------|-----------|
//! | `x₀`      | `e^{θt}·z̄ − μ·e^{θt}(1 − e^{−θt})` |
//! | `μ`       | `(z̄ − x₀e^{−θt}) / (1 − e^{−θt})` |
//! | `θ`       | `−(1/t)·ln((z̄ − μ)/(x₀ − μ))` |
//! | `σ²`      | `2θ·Σ(z_k − m_t)² / (n(1 − e^{−2θt}))` |
//!
//! Sums run left to right with compensation, so the running trace and the
//! point estimate on the same data agree bit for bit.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::model::OuParams;
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    X0,
    Mu,
    Theta,
    SigmaSq,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::X0,
        EstimatorKind::Mu,
        EstimatorKind::Theta,
        EstimatorKind::SigmaSq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::X0 => "x0",
            EstimatorKind::Mu => "mu",
            EstimatorKind::Theta => "theta",
            EstimatorKind::SigmaSq => "sigma2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// The parameter value this estimator targets under `p`.
    pub fn truth(self, p: &OuParams) -> f64 {
        match self {
            EstimatorKind::X0 => p.x0(),
            EstimatorKind::Mu => p.mu(),
            EstimatorKind::Theta => p.theta(),
            EstimatorKind::SigmaSq => p.sigma() * p.sigma(),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered, finite observations at a common time `t > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSample {
    t: f64,
    values: Vec<f64>,
}

impl ObservationSample {
    pub fn new(t: f64, values: Vec<f64>) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
            });
        }
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "observation",
                value: bad,
            });
        }
        Ok(Self { t, values })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `n` observations.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.values.len() {
            return Err(Error::Domain {
                what: "prefix length",
                value: n as f64,
            });
        }
        Ok(Self {
            t: self.t,
            values: self.values[..n].to_vec(),
        })
    }
}

/// Parameters assumed known; each estimator reads only what it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KnownContext {
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub x0: Option<f64>,
}

impl KnownContext {
    pub fn from_params(p: &OuParams) -> Self {
        Self {
            theta: Some(p.theta()),
            mu: Some(p.mu()),
            sigma: Some(p.sigma()),
            x0: Some(p.x0()),
        }
    }
}

fn need(value: Option<f64>, name: &'static str) -> Result<f64> {
    match value {
        None => Err(Error::MissingParameter(name)),
        Some(v) if !v.is_finite() => Err(Error::InvalidParameter { name, value: v }),
        Some(v) => Ok(v),
    }
}

fn need_theta(ctx: &KnownContext) -> Result<f64> {
    let theta = need(ctx.theta, "theta")?;
    if theta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "theta",
            value: theta,
        });
    }
    Ok(theta)
}

/// Constants of one estimator at a fixed `(t, known parameters)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimator {
    kind: EstimatorKind,
    form: Form,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    X0 { growth: f64, offset: f64 },
    Mu { anchor: f64, weight: f64 },
    Theta { mu: f64, spread: f64, t: f64 },
    SigmaSq { center: f64, factor: f64 },
}

impl Estimator {
    pub fn new(kind: EstimatorKind, t: f64, ctx: &KnownContext) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
            });
        }
        let form = match kind {
            EstimatorKind::X0 => {
                let theta = need_theta(ctx)?;
                let mu = need(ctx.mu, "mu")?;
                Form::X0 {
                    growth: libm::exp(theta * t),
                    offset: mu * libm::expm1(theta * t),
                }
            }
            EstimatorKind::Mu => {
                let theta = need_theta(ctx)?;
                let x0 = need(ctx.x0, "x0")?;
                let weight = -libm::expm1(-theta * t);
                if weight.is_nan() || weight <= 0.0 {
                    return Err(Error::Domain {
                        what: "1 − e^{−θt}",
                        value: weight,
                    });
                }
                Form::Mu {
                    anchor: x0 * libm::exp(-theta * t),
                    weight,
                }
            }
            EstimatorKind::Theta => {
                let x0 = need(ctx.x0, "x0")?;
                let mu = need(ctx.mu, "mu")?;
                if x0 == mu {
                    return Err(Error::EqualLevels);
                }
                Form::Theta {
                    mu,
                    spread: x0 - mu,
                    t,
                }
            }
            EstimatorKind::SigmaSq => {
                let theta = need_theta(ctx)?;
                let x0 = need(ctx.x0, "x0")?;
                let mu = need(ctx.mu, "mu")?;
                let denom = -libm::expm1(-2.0 * theta * t);
                if denom.is_nan() || denom <= 0.0 {
                    return Err(Error::Domain {
                        what: "1 − e^{−2θt}",
                        value: denom,
                    });
                }
                let center = x0 * libm::exp(-theta * t) + mu * -libm::expm1(-theta * t);
                Form::SigmaSq {
                    center,
                    factor: 2.0 * theta / denom,
                }
            }
        };
        Ok(Self { kind, form })
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    #[inline]
    fn term(&self, z: f64) -> f64 {
        match self.form {
            Form::SigmaSq { center, .. } => {
                let d = z - center;
                d * d
            }
            _ => z,
        }
    }

    fn finish(&self, n: usize, sum: f64) -> Result<f64> {
        let avg = sum / n as f64;
        match self.form {
            Form::X0 { growth, offset } => Ok(growth * avg - offset),
            Form::Mu { anchor, weight } => Ok((avg - anchor) / weight),
            Form::Theta { mu, spread, t } => {
                let ratio = (avg - mu) / spread;
                if ratio > 0.0 {
                    Ok(-libm::log(ratio) / t)
                } else {
                    Err(Error::NonPositiveRatio { ratio })
                }
            }
            Form::SigmaSq { factor, .. } => Ok(factor * avg),
        }
    }

    pub fn estimate(&self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let acc: CompensatedSum = values.iter().map(|&z| self.term(z)).collect();
        self.finish(values.len(), acc.value())
    }

    /// Estimates on every prefix `z₁…z_n`, `n = 1…len`.
    pub fn trace(&self, values: &[f64]) -> Result<EstimateTrace> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let mut acc = CompensatedSum::new();
        let points = values
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                acc.add(self.term(z));
                self.finish(i + 1, acc.value())
            })
            .collect();
        Ok(EstimateTrace::from_points(self.kind, points))
    }
}

pub fn estimate(
    kind: EstimatorKind,
    sample: &ObservationSample,
    ctx: &KnownContext,
) -> Result<f64> {
    Estimator::new(kind, sample.t(), ctx)?.estimate(sample.values())
}

/// Initial value `x₀` given `θ`, `μ`.
pub fn estimate_x0(sample: &ObservationSample, ctx: &KnownContext) -> Result<f64> {
    estimate(EstimatorKind::X0, sample, ctx)
}

/// Equilibrium level `μ` given `θ`, `x₀`.
pub fn estimate_mu(sample: &ObservationSample, ctx: &KnownContext) -> Result<f64> {
    estimate(EstimatorKind::Mu, sample, ctx)
}

/// Rate `θ` given `x₀ ≠ μ`.
pub fn estimate_theta(sample: &ObservationSample, ctx: &KnownContext) -> Result<f64> {
    estimate(EstimatorKind::Theta, sample, ctx)
}

/// Squared volatility `σ²` given `θ`, `μ`, `x₀`.
pub fn estimate_sigma_sq(sample: &ObservationSample, ctx: &KnownContext) -> Result<f64> {
    estimate(EstimatorKind::SigmaSq, sample, ctx)
}

pub fn running_trace(
    sample: &ObservationSample,
    kind: EstimatorKind,
    ctx: &KnownContext,
) -> Result<EstimateTrace> {
    Estimator::new(kind, sample.t(), ctx)?.trace(sample.values())
}

/// Running estimates `T₁…T_n` with suffix minima and maxima.
///
/// `tail_min(n)`/`tail_max(n)` are `min`/`max` of `T_m` over `m ≥ n`; they
/// are finite-sample stand-ins for `liminf`/`limsup` and say nothing about
/// values beyond the data. Prefixes where the estimator is undefined are
/// gaps and are skipped by the tails.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTrace {
    kind: EstimatorKind,
    points: Vec<Result<f64>>,
    suffix_min: Vec<Option<f64>>,
    suffix_max: Vec<Option<f64>>,
}

impl EstimateTrace {
    fn from_points(kind: EstimatorKind, points: Vec<Result<f64>>) -> Self {
        let n = points.len();
        let mut suffix_min = alloc::vec![None; n];
        let mut suffix_max = alloc::vec![None; n];
        let (mut lo, mut hi): (Option<f64>, Option<f64>) = (None, None);
        for i in (0..n).rev() {
            if let Ok(v) = points[i] {
                lo = Some(lo.map_or(v, |m| m.min(v)));
                hi = Some(hi.map_or(v, |m| m.max(v)));
            }
            suffix_min[i] = lo;
            suffix_max[i] = hi;
        }
        Self {
            kind,
            points,
            suffix_min,
            suffix_max,
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Result<f64>] {
        &self.points
    }

    /// `T_n`, 1-based.
    pub fn at(&self, n: usize) -> Option<Result<f64>> {
        n.checked_sub(1).and_then(|i| self.points.get(i)).copied()
    }

    pub fn last(&self) -> Result<f64> {
        *self.points.last().expect("trace is never empty")
    }

    pub fn tail_min(&self, n: usize) -> Option<f64> {
        n.checked_sub(1)
            .and_then(|i| self.suffix_min.get(i))
            .copied()
            .flatten()
    }

    pub fn tail_max(&self, n: usize) -> Option<f64> {
        n.checked_sub(1)
            .and_then(|i| self.suffix_max.get(i))
            .copied()
            .flatten()
    }

    pub fn suffix_min(&self) -> &[Option<f64>] {
        &self.suffix_min
    }

    pub fn suffix_max(&self) -> &[Option<f64>] {
        &self.suffix_max
    }

    pub fn gap_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_err()).count()
    }
}
