//! Monte Carlo checks of the closed forms and of estimator consistency.
//!
//! Replications are independent: replication `r` always reads driver
//! stream `r` (see [`DriverChoice::replication`]) and results are reduced in
//! replication order, so reports are identical at any thread count.

use oulab_core::{
    equidistribution_counts, gaussian_quantile_edges, observations, std_normal_cdf, uniform_edges,
    CompensatedSum, DriverKind, Error, Estimator, EstimatorKind, FourierTruncation, GaussianDriver,
    GaussianSource, OuParams, SamplerKind, TimePoint,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::report::config_hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DriverChoice {
    Prng { seed: u64 },
    Weyl { stream: u32 },
}

impl DriverChoice {
    pub fn base(self) -> DriverKind {
        self.replication(0)
    }

    /// Driver for replication `r` (0-based): ChaCha sub-stream `r`, or Weyl
    /// stream `base + r`.
    pub fn replication(self, r: usize) -> DriverKind {
        match self {
            DriverChoice::Prng { seed } => DriverKind::Prng {
                seed,
                stream: r as u64,
            },
            DriverChoice::Weyl { stream } => DriverKind::Weyl {
                stream: stream + r as u32,
            },
        }
    }

    pub fn label(self) -> String {
        match self {
            DriverChoice::Prng { seed } => format!("prng:{seed}"),
            DriverChoice::Weyl { stream } => format!("weyl:{stream}"),
        }
    }
}

/// Serializable form of [`OuParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub theta: f64,
    pub mu: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl From<&OuParams> for ParamsRecord {
    fn from(p: &OuParams) -> Self {
        Self {
            theta: p.theta(),
            mu: p.mu(),
            sigma: p.sigma(),
            x0: p.x0(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SamplerRecord {
    Exact,
    Fourier { truncation: usize },
}

impl From<SamplerKind> for SamplerRecord {
    fn from(k: SamplerKind) -> Self {
        match k {
            SamplerKind::Exact => SamplerRecord::Exact,
            SamplerKind::Fourier(tr) => SamplerRecord::Fourier {
                truncation: tr.n_terms(),
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: OuParams,
    pub t: f64,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub driver: DriverChoice,
    pub sampler: SamplerKind,
    pub estimators: Vec<EstimatorKind>,
}

/// What gets hashed and echoed into consistency reports.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyConfigRecord {
    pub experiment: &'static str,
    pub params: ParamsRecord,
    pub t: f64,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub driver: DriverChoice,
    pub sampler: SamplerRecord,
    pub estimators: Vec<&'static str>,
}

impl ExperimentConfig {
    /// θ = 0.5, μ = −3, σ = 1, x₀ = 3 observed at t = 0.5.
    pub fn reference() -> Self {
        Self {
            params: OuParams::new(0.5, -3.0, 1.0, 3.0).expect("valid"),
            t: 0.5,
            sample_sizes: vec![100, 1_000, 10_000],
            replications: 200,
            driver: DriverChoice::Prng { seed: 42 },
            sampler: SamplerKind::Exact,
            estimators: EstimatorKind::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.into()));
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad("observation time must be positive");
        }
        if self.sample_sizes.is_empty() || self.sample_sizes[0] == 0 {
            return bad("sample sizes must be positive");
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample sizes must be strictly increasing");
        }
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected");
        }
        if self.estimators.contains(&EstimatorKind::Theta) && self.params.x0() == self.params.mu() {
            return bad("rate estimation requires x0 != mu");
        }
        Ok(())
    }

    pub fn record(&self) -> ConsistencyConfigRecord {
        ConsistencyConfigRecord {
            experiment: "consistency",
            params: (&self.params).into(),
            t: self.t,
            sample_sizes: self.sample_sizes.clone(),
            replications: self.replications,
            driver: self.driver,
            sampler: self.sampler.into(),
            estimators: self.estimators.iter().map(|k| k.name()).collect(),
        }
    }

    pub fn hash(&self) -> String {
        config_hash(&self.record())
    }
}

/// Error statistics of one estimator at one sample size.
///
/// `mean_abs_error` and `rmse` are over the replications where the
/// estimator was defined; `None` if it failed in all of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub estimator: &'static str,
    pub n: usize,
    pub truth: f64,
    pub mean_abs_error: Option<f64>,
    pub rmse: Option<f64>,
    pub failures: usize,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub config_hash: String,
    pub rows: Vec<ConsistencyRow>,
}

impl ConsistencyReport {
    pub fn row(&self, kind: EstimatorKind, n: usize) -> Option<&ConsistencyRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == kind.name() && r.n == n)
    }
}

/// Runs `f` on a pool of `threads` workers (`0` = rayon's global pool).
pub fn with_threads<T: Send>(
    threads: usize,
    f: impl FnOnce() -> T + Send,
) -> Result<T, ExperimentError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// Replicated estimation errors for each estimator and sample size.
///
/// Each replication draws one sample of size `max(sample_sizes)` and
/// evaluates on its prefixes.
pub fn run_consistency(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<ConsistencyReport, ExperimentError> {
    cfg.validate()?;
    let t = TimePoint::new(cfg.t)?;
    let n_max = *cfg.sample_sizes.last().expect("validated");
    let ctx = oulab_core::KnownContext::from_params(&cfg.params);
    let estimators: Vec<Estimator> = cfg
        .estimators
        .iter()
        .map(|&k| Estimator::new(k, cfg.t, &ctx))
        .collect::<Result<_, _>>()?;

    // errors[r][e][i]: replication r, estimator e, sample size i
    let errors: Vec<Vec<Vec<Option<f64>>>> = with_threads(threads, || {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| -> Result<_, Error> {
                let z = observations(
                    &cfg.params,
                    t,
                    cfg.driver.replication(r),
                    n_max,
                    cfg.sampler,
                )?;
                estimators
                    .iter()
                    .map(|est| {
                        let tr = est.trace(&z)?;
                        let truth = est.kind().truth(&cfg.params);
                        Ok(cfg
                            .sample_sizes
                            .iter()
                            .map(|&n| tr.at(n).and_then(|v| v.ok()).map(|v| v - truth))
                            .collect())
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>, _>>()
    })??;

    let mut rows = Vec::new();
    for (e, est) in estimators.iter().enumerate() {
        for (i, &n) in cfg.sample_sizes.iter().enumerate() {
            let mut abs = CompensatedSum::new();
            let mut sq = CompensatedSum::new();
            let mut ok = 0usize;
            for rep in &errors {
                if let Some(err) = rep[e][i] {
                    abs.add(err.abs());
                    sq.add(err * err);
                    ok += 1;
                }
            }
            let (mae, rmse) = if ok > 0 {
                (
                    Some(abs.value() / ok as f64),
                    Some((sq.value() / ok as f64).sqrt()),
                )
            } else {
                (None, None)
            };
            rows.push(ConsistencyRow {
                estimator: est.kind().name(),
                n,
                truth: est.kind().truth(&cfg.params),
                mean_abs_error: mae,
                rmse,
                failures: cfg.replications - ok,
                replications: cfg.replications,
            });
        }
    }
    Ok(ConsistencyReport {
        config_hash: cfg.hash(),
        rows,
    })
}

fn mean_and_variance(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().copied().collect::<CompensatedSum>().value() / n;
    let ss = v
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<CompensatedSum>()
        .value();
    (mean, if v.len() > 1 { ss / (n - 1.0) } else { 0.0 })
}

/// `z = diff / se`, with `0/0 = 0`.
fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentConfigRecord {
    pub experiment: &'static str,
    pub params: ParamsRecord,
    pub t: f64,
    pub n: usize,
    pub driver: DriverChoice,
    pub sampler: SamplerRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub config_hash: String,
    pub n: usize,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub mean: f64,
    pub variance: f64,
    pub z_mean: f64,
    pub z_variance: f64,
    pub relative_variance_error: f64,
    /// Any |z| above 4.
    pub flagged: bool,
}

/// Sample mean and variance of `n` observations against the closed forms.
pub fn run_moment_check(
    params: &OuParams,
    t: f64,
    n: usize,
    driver: DriverChoice,
    sampler: SamplerKind,
) -> Result<MomentReport, ExperimentError> {
    if n < 2 {
        return Err(ExperimentError::Config("moment check needs n >= 2".into()));
    }
    let record = MomentConfigRecord {
        experiment: "moments",
        params: params.into(),
        t,
        n,
        driver,
        sampler: sampler.into(),
    };
    let tp = TimePoint::new(t)?;
    let z = observations(params, tp, driver.base(), n, sampler)?;
    let law = params.transition_law(tp);
    let (m, v) = mean_and_variance(&z);
    let z_mean = z_score(m - law.mean(), (law.variance() / n as f64).sqrt());
    let z_variance = z_score(
        v - law.variance(),
        law.variance() * (2.0 / (n as f64 - 1.0)).sqrt(),
    );
    let relative_variance_error = if law.variance() > 0.0 {
        v / law.variance() - 1.0
    } else {
        v
    };
    Ok(MomentReport {
        config_hash: config_hash(&record),
        n,
        sample_mean: m,
        sample_variance: v,
        mean: law.mean(),
        variance: law.variance(),
        z_mean,
        z_variance,
        relative_variance_error,
        flagged: z_mean.abs() > 4.0 || z_variance.abs() > 4.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceConfigRecord {
    pub experiment: &'static str,
    pub params: ParamsRecord,
    pub s: f64,
    pub t: f64,
    pub n_paths: usize,
    pub driver: DriverChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub config_hash: String,
    pub s: f64,
    pub t: f64,
    pub n_paths: usize,
    pub sample_covariance: f64,
    pub covariance: f64,
    /// Delta-method standard error: sd of the centred products over √n.
    pub standard_error: f64,
    pub z: f64,
    /// Deviation beyond 5 standard errors.
    pub flagged: bool,
}

/// Sample covariance of `(x_s, x_t)` over two-point exact paths.
pub fn run_covariance_check(
    params: &OuParams,
    s: f64,
    t: f64,
    n_paths: usize,
    driver: DriverChoice,
) -> Result<CovarianceReport, ExperimentError> {
    if !(s > 0.0 && s <= t && t.is_finite()) {
        return Err(ExperimentError::Config(format!(
            "need 0 < s <= t, got s={s}, t={t}"
        )));
    }
    if n_paths < 2 {
        return Err(ExperimentError::Config(
            "covariance check needs at least 2 paths".into(),
        ));
    }
    let record = CovarianceConfigRecord {
        experiment: "covariance",
        params: params.into(),
        s,
        t,
        n_paths,
        driver,
    };
    let mut d = GaussianDriver::new(driver.base())?;
    let mut xs = Vec::with_capacity(n_paths);
    let mut xt = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let a = params.exact_step(params.x0(), s, d.next_gaussian()?)?;
        let b = if t > s {
            params.exact_step(a, t - s, d.next_gaussian()?)?
        } else {
            a
        };
        xs.push(a);
        xt.push(b);
    }
    let n = n_paths as f64;
    let (ms, _) = mean_and_variance(&xs);
    let (mt, _) = mean_and_variance(&xt);
    let products: Vec<f64> = xs
        .iter()
        .zip(&xt)
        .map(|(a, b)| (a - ms) * (b - mt))
        .collect();
    let sum: f64 = products.iter().copied().collect::<CompensatedSum>().value();
    let sample_covariance = sum / (n - 1.0);
    let (_, var_products) = mean_and_variance(&products);
    let standard_error = (var_products / n).sqrt();
    let covariance = params.covariance(TimePoint::new(s)?, TimePoint::new(t)?);
    let z = z_score(sample_covariance - covariance, standard_error);
    Ok(CovarianceReport {
        config_hash: config_hash(&record),
        s,
        t,
        n_paths,
        sample_covariance,
        covariance,
        standard_error,
        z,
        flagged: z.abs() > 5.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EquidistTarget {
    /// Uniform points on (0, 1) against equal-width bins.
    Uniform,
    /// Standard normal draws against equal-mass Gaussian bins.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRecord {
    /// `None` encodes −∞ / +∞.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub count: usize,
    pub expected: f64,
    pub standardized_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquidistReport {
    pub config_hash: String,
    pub n: usize,
    pub bins: Vec<BinRecord>,
    pub max_abs_deviation: f64,
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Bin counts of an arbitrary sequence; `cdf = None` means uniform on the edges.
pub fn equidistribution_report(
    seq: &[f64],
    edges: &[f64],
    cdf: Option<&dyn Fn(f64) -> f64>,
    config_hash: String,
) -> Result<EquidistReport, ExperimentError> {
    let counts = equidistribution_counts(seq, edges, cdf)?;
    let bins: Vec<BinRecord> = counts
        .iter()
        .map(|b| BinRecord {
            lo: finite_or_none(b.lo),
            hi: finite_or_none(b.hi),
            count: b.count,
            expected: b.expected,
            standardized_deviation: b.standardized_deviation(seq.len()),
        })
        .collect();
    let max_abs_deviation = bins
        .iter()
        .map(|b| b.standardized_deviation.abs())
        .fold(0.0, f64::max);
    Ok(EquidistReport {
        config_hash,
        n: seq.len(),
        bins,
        max_abs_deviation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EquidistConfigRecord {
    pub experiment: &'static str,
    pub driver: DriverChoice,
    pub n: usize,
    pub bins: usize,
    pub target: EquidistTarget,
}

/// Bin counts of a driver's uniform or Gaussian stream.
pub fn run_equidistribution_check(
    driver: DriverChoice,
    n: usize,
    bins: usize,
    target: EquidistTarget,
) -> Result<EquidistReport, ExperimentError> {
    if bins == 0 || n == 0 {
        return Err(ExperimentError::Config("need n >= 1 and bins >= 1".into()));
    }
    let record = EquidistConfigRecord {
        experiment: "equidist",
        driver,
        n,
        bins,
        target,
    };
    let mut d = GaussianDriver::new(driver.base())?;
    match target {
        EquidistTarget::Uniform => {
            let seq = (0..n)
                .map(|_| d.next_uniform())
                .collect::<Result<Vec<_>, _>>()?;
            equidistribution_report(&seq, &uniform_edges(bins), None, config_hash(&record))
        }
        EquidistTarget::Gaussian => {
            let seq = d.gaussian_stream(n)?;
            let cdf = |x: f64| std_normal_cdf(x);
            equidistribution_report(
                &seq,
                &gaussian_quantile_edges(bins)?,
                Some(&cdf),
                config_hash(&record),
            )
        }
    }
}

/// Default Fourier sampler.
pub fn fourier_sampler(truncation: usize) -> Result<SamplerKind, ExperimentError> {
    Ok(SamplerKind::Fourier(FourierTruncation::new(truncation)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::reference();
        c.sample_sizes = vec![100, 100];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::reference();
        c.replications = 0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::reference();
        c.params = OuParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(c.validate().is_err());
        c.estimators = vec![EstimatorKind::X0];
        assert!(c.validate().is_ok());
    }

    #[test]
    fn degenerate_config_has_zero_error() {
        let cfg = ExperimentConfig {
            params: OuParams::new(0.5, -3.0, 1e-300, 3.0).unwrap(),
            sample_sizes: vec![50],
            replications: 1,
            ..ExperimentConfig::reference()
        };
        let rep = run_consistency(&cfg, 1).unwrap();
        for kind in EstimatorKind::ALL {
            let row = rep.row(kind, 50).unwrap();
            assert!(row.rmse.unwrap() < 1e-13, "{row:?}");
            assert_eq!(row.failures, 0);
        }
    }

    #[test]
    fn degenerate_moment_check() {
        let p = OuParams::new(0.5, -3.0, 1e-300, 3.0).unwrap();
        let r = run_moment_check(
            &p,
            0.5,
            1000,
            DriverChoice::Prng { seed: 1 },
            SamplerKind::Exact,
        )
        .unwrap();
        assert_eq!(r.sample_variance, 0.0);
        assert_eq!(r.sample_mean, r.mean);
        assert!(!r.flagged);
    }

    #[test]
    fn equal_times_reduce_to_variance() {
        let p = OuParams::new(0.5, -3.0, 1.0, 3.0).unwrap();
        let r = run_covariance_check(&p, 0.5, 0.5, 20_000, DriverChoice::Prng { seed: 4 }).unwrap();
        assert_eq!(
            r.covariance,
            p.transition_variance(TimePoint::new(0.5).unwrap())
        );
        assert!(!r.flagged, "{r:?}");
        assert!(run_covariance_check(&p, 0.6, 0.5, 100, DriverChoice::Prng { seed: 4 }).is_err());
    }

    #[test]
    fn fast_reversion_kills_covariance() {
        let p = OuParams::new(50.0, -3.0, 1.0, 3.0).unwrap();
        let r =
            run_covariance_check(&p, 0.25, 0.5, 10_000, DriverChoice::Prng { seed: 9 }).unwrap();
        assert!(r.covariance.abs() < 1e-6);
        assert!(r.sample_covariance.abs() < 0.005, "{r:?}");
    }

    #[test]
    fn midpoints_have_zero_deviation() {
        let seq: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        let r = equidistribution_report(&seq, &uniform_edges(10), None, String::new()).unwrap();
        assert!(r.max_abs_deviation < 1e-12);
    }

    #[test]
    fn driver_equidistribution() {
        let w = run_equidistribution_check(
            DriverChoice::Weyl { stream: 1 },
            10_000,
            10,
            EquidistTarget::Uniform,
        )
        .unwrap();
        assert!(w.max_abs_deviation <= 5.0);
        let g = run_equidistribution_check(
            DriverChoice::Prng { seed: 42 },
            10_000,
            10,
            EquidistTarget::Gaussian,
        )
        .unwrap();
        assert!(g.max_abs_deviation <= 5.0);
        assert_eq!(g.bins[0].lo, None);
        assert_eq!(g.bins[9].hi, None);
    }

    #[test]
    fn consistency_is_thread_independent() {
        let cfg = ExperimentConfig {
            sample_sizes: vec![10, 100],
            replications: 16,
            ..ExperimentConfig::reference()
        };
        let a = run_consistency(&cfg, 1).unwrap();
        let b = run_consistency(&cfg, 4).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
