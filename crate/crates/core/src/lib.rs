//! Ornstein–Uhlenbeck transition laws, samplers and cross-sectional
//! parameter estimators.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is a pure
//! function of its inputs except [`GaussianDriver`], whose state is the
//! number of draws consumed; cloning or re-seeking a driver reproduces its
//! stream exactly.
//!
//! ```
//! use oulab_core::{estimate_x0, observations, DriverKind, KnownContext, ObservationSample,
//!                  OuParams, SamplerKind, TimePoint};
//!
//! let p = OuParams::new(0.5, -3.0, 1.0, 3.0)?;
//! let t = TimePoint::new(0.5)?;
//! let z = observations(&p, t, DriverKind::Prng { seed: 1, stream: 0 }, 1000, SamplerKind::Exact)?;
//! let sample = ObservationSample::new(t.get(), z)?;
//! let x0 = estimate_x0(&sample, &KnownContext::from_params(&p))?;
//! assert!((x0 - 3.0).abs() < 0.2);
//! # Ok::<(), oulab_core::Error>(())
//! ```
#![no_std]

extern crate alloc;

pub mod driver;
pub mod equidist;
mod error;
pub mod estimate;
pub mod fourier;
pub mod model;
pub mod normal;
pub mod simulate;
pub mod sum;
pub mod weyl;

pub use driver::{ConstantSource, DriverKind, GaussianDriver, GaussianSource};
pub use equidist::{equidistribution_counts, gaussian_quantile_edges, uniform_edges, BinCount};
pub use error::{Error, Result};
pub use estimate::{
    estimate, estimate_mu, estimate_sigma_sq, estimate_theta, estimate_x0, running_trace,
    EstimateTrace, Estimator, EstimatorKind, KnownContext, ObservationSample,
};
pub use fourier::{wiener_fourier, wiener_scaled, FourierTruncation, WienerBasis};
pub use model::{GaussianLaw, OuParams, TimePoint};
pub use normal::{inv_normal_cdf, std_normal_cdf, std_normal_pdf};
pub use simulate::{
    observations, ou_observe, ou_trajectory, ObservationSampler, SamplerKind, TrajectoryGrid,
};
pub use sum::CompensatedSum;
pub use weyl::{nth_prime, weyl_uniform, WeylSequence};
