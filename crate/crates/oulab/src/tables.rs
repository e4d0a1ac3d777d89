//! Estimator tables on a fixed observation sample.
//!
//! Each estimator is evaluated on the first `n` observations for
//! `n = 5, 10, …, 100`, with the remaining parameters set to their
//! reference values.

use oulab_core::{Estimator, EstimatorKind, KnownContext, OuParams};
use serde::Serialize;

use crate::error::AppError;
use crate::fixture::FixtureSample;

/// Sample sizes at which the tables are evaluated.
pub const SIZES: [usize; 20] = [
    5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90, 95, 100,
];

/// Observation time of the bundled sample.
pub const T: f64 = 0.5;

/// Parameters the bundled sample was generated with.
pub fn reference_params() -> OuParams {
    OuParams::new(0.5, -3.0, 1.0, 3.0).expect("valid")
}

/// Reference values for the bundled sample, indexed like [`SIZES`].
pub const REFERENCE_X0: [f64; 20] = [
    3.916479949,
    3.171013312,
    3.189798604,
    3.053011377,
    3.059916865,
    2.933186125,
    2.98020897,
    2.978720876,
    3.005595171,
    3.056170079,
    3.050042943,
    2.999422576,
    2.985749187,
    2.963503799,
    2.944638775,
    2.891140712,
    2.951454785,
    2.918940576,
    2.936244133,
    2.90958959,
];
pub const REFERENCE_MU: [f64; 20] = [
    0.226753293,
    -2.397894335,
    -2.331754861,
    -2.813356927,
    -2.789044002,
    -3.235239072,
    -3.06968049,
    -3.074919788,
    -2.980300456,
    -2.80223573,
    -2.823808222,
    -3.002033002,
    -3.05017443,
    -3.12849625,
    -3.194916445,
    -3.38327305,
    -3.170918559,
    -3.285394965,
    -3.224472402,
    -3.318318028,
];
pub const REFERENCE_THETA: [f64; 20] = [
    0.215705016,
    0.44379283,
    0.437713842,
    0.482407151,
    0.480126781,
    0.522396228,
    0.50660792,
    0.507105654,
    0.498135817,
    0.481363743,
    0.483388203,
    0.500192489,
    0.504755927,
    0.512202556,
    0.518539409,
    0.536619648,
    0.516247561,
    0.527203992,
    0.521365679,
    0.530366173,
];
pub const REFERENCE_SIGMA_SQ: [f64; 20] = [
    1.468059434,
    1.071475,
    1.448094876,
    1.168384329,
    1.145106531,
    1.174454042,
    1.098947717,
    1.053231322,
    1.074061413,
    1.106961814,
    1.019738082,
    1.013011822,
    0.950520018,
    0.979072751,
    0.944824889,
    1.011196765,
    1.03807104,
    1.030042542,
    1.088067168,
    1.070420297,
];

pub fn reference(kind: EstimatorKind) -> &'static [f64; 20] {
    match kind {
        EstimatorKind::X0 => &REFERENCE_X0,
        EstimatorKind::Mu => &REFERENCE_MU,
        EstimatorKind::Theta => &REFERENCE_THETA,
        EstimatorKind::SigmaSq => &REFERENCE_SIGMA_SQ,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub estimator: &'static str,
    pub n: usize,
    /// `None` when the estimator is undefined on this prefix.
    pub estimate: Option<f64>,
    pub reference: f64,
    pub diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tables {
    pub source: String,
    pub rows: Vec<TableRow>,
}

impl Tables {
    pub fn max_abs_diff(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.diff.map_or(f64::INFINITY, f64::abs))
            .fold(0.0, f64::max)
    }

    pub fn rows_for(&self, kind: EstimatorKind) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(move |r| r.estimator == kind.name())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# source: {}\n", self.source);
        for kind in EstimatorKind::ALL {
            out.push_str(&format!(
                "\n{kind}\n{:>5} {:>14} {:>14} {:>12}\n",
                "n", "estimate", "reference", "diff"
            ));
            for r in self.rows_for(kind) {
                let est = r
                    .estimate
                    .map_or("undefined".to_string(), |v| format!("{v:.9}"));
                let diff = r.diff.map_or("-".to_string(), |d| format!("{d:.3e}"));
                out.push_str(&format!(
                    "{:>5} {:>14} {:>14.9} {:>12}\n",
                    r.n, est, r.reference, diff
                ));
            }
        }
        out.push_str(&format!("\nmax |diff| = {:.3e}\n", self.max_abs_diff()));
        out
    }
}

/// Evaluates all four estimators on the prefixes of `fixture`.
pub fn reproduce(fixture: &FixtureSample) -> Result<Tables, AppError> {
    let values = fixture.values();
    let n_max = *SIZES.last().expect("non-empty");
    if values.len() < n_max {
        return Err(AppError::Input(format!(
            "{}: need {n_max} observations, found {}",
            fixture.source,
            values.len()
        )));
    }
    let ctx = KnownContext::from_params(&reference_params());
    let mut rows = Vec::with_capacity(4 * SIZES.len());
    for kind in EstimatorKind::ALL {
        let trace = Estimator::new(kind, T, &ctx)
            .and_then(|e| e.trace(&values[..n_max]))
            .map_err(|e| AppError::Estimation(e.to_string()))?;
        for (i, &n) in SIZES.iter().enumerate() {
            let estimate = trace.at(n).and_then(|v| v.ok());
            let reference = reference(kind)[i];
            rows.push(TableRow {
                estimator: kind.name(),
                n,
                estimate,
                reference,
                diff: estimate.map(|v| v - reference),
            });
        }
    }
    Ok(Tables {
        source: fixture.source.clone(),
        rows,
    })
}
