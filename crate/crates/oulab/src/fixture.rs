//! Observation (`k,z`) and trajectory (`path_id,t,x`) CSV files.
//!
//! Lines starting with `#` are comments. Writers put the tool version,
//! config hash and driver on comment lines ahead of the header.

use std::io::Write;

use oulab_core::ObservationSample;
use serde::{Deserialize, Serialize};

use crate::error::AppError;

/// The bundled 100-observation sample at `t = 0.5`, with the one repeated
/// cell at `k = 27` corrected so that the reference estimator tables follow.
pub const BUNDLED: &str = include_str!("../data/observations_t05.csv");

/// The same sample exactly as printed, duplicate at `k = 26, 27` included.
pub const BUNDLED_PRINTED: &str = include_str!("../data/observations_t05_printed.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub k: u64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub path_id: u64,
    pub t: f64,
    pub x: f64,
}

/// Rows `(k, z)` with `k = 1…n` contiguous and every `z` finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSample {
    pub source: String,
    pub rows: Vec<ObservationRow>,
}

impl FixtureSample {
    pub fn parse(text: &str, source: impl Into<String>) -> Result<Self, AppError> {
        let source = source.into();
        let bad = |msg: String| AppError::Input(format!("{source}: {msg}"));
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["k", "z"] {
            return Err(bad(format!(
                "expected header `k,z`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<ObservationRow>().enumerate() {
            let row = rec.map_err(|e| bad(e.to_string()))?;
            if row.k != i as u64 + 1 {
                return Err(bad(format!(
                    "row {} has k = {}, expected {}",
                    i + 1,
                    row.k,
                    i + 1
                )));
            }
            if !row.z.is_finite() {
                return Err(bad(format!("non-finite z at k = {}", row.k)));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(bad("no observations".into()));
        }
        Ok(Self { source, rows })
    }

    pub fn read(path: &std::path::Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text, path.display().to_string())
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "bundled:observations_t05.csv").expect("bundled fixture parses")
    }

    pub fn bundled_printed() -> Self {
        Self::parse(BUNDLED_PRINTED, "bundled:observations_t05_printed.csv")
            .expect("bundled fixture parses")
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.z).collect()
    }

    pub fn to_sample(&self, t: f64) -> Result<ObservationSample, AppError> {
        ObservationSample::new(t, self.values()).map_err(AppError::usage)
    }
}

/// Comment lines that head every CSV the tool writes.
pub fn provenance_lines(config_hash: &str, driver: &str) -> String {
    format!(
        "# oulab {}\n# config_hash={config_hash}\n# driver={driver}\n",
        env!("CARGO_PKG_VERSION")
    )
}

/// Serializes rows after a `#` preamble. Floats use the shortest
/// representation that parses back to the same bits.
pub fn write_csv<T: Serialize>(preamble: &str, rows: &[T]) -> Result<Vec<u8>, AppError> {
    let mut buf = preamble.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r).map_err(|e| AppError::Input(e.to_string()))?;
        }
        w.flush().map_err(|e| AppError::io("<buffer>", e))?;
    }
    Ok(buf)
}

/// Writes `bytes` to `path`, or stdout when `path` is `None`.
pub fn emit(path: Option<&std::path::Path>, bytes: &[u8]) -> Result<(), AppError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| AppError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| AppError::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures() {
        let a = FixtureSample::bundled();
        let b = FixtureSample::bundled_printed();
        assert_eq!(a.rows.len(), 100);
        assert_eq!(b.rows.len(), 100);
        let diffs: Vec<_> = a.rows.iter().zip(&b.rows).filter(|(x, y)| x != y).collect();
        assert_eq!(diffs.len(), 1);
        assert_eq!(
            (diffs[0].0.k, diffs[0].0.z, diffs[0].1.z),
            (27, 1.0774, 1.8187)
        );
        assert_eq!(b.rows[87].z, 0.6265);
        assert_eq!(b.rows[80].z, b.rows[0].z);
    }

    #[test]
    fn rejects_malformed() {
        for (text, why) in [
            ("x,y\n1,2\n", "header"),
            ("k,z\n2,1.0\n", "start"),
            ("k,z\n1,1.0\n3,1.0\n", "gap"),
            ("k,z\n1,abc\n", "number"),
            ("k,z\n1,inf\n", "finite"),
            ("k,z\n", "empty"),
        ] {
            assert!(FixtureSample::parse(text, "t").is_err(), "{why}");
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let rows: Vec<_> = [0.1, 1.0 / 3.0, -2.5e-300, 1.672_804_698_428_429_2, f64::MAX]
            .iter()
            .enumerate()
            .map(|(i, &z)| ObservationRow { k: i as u64 + 1, z })
            .collect();
        let bytes = write_csv(&provenance_lines("abc", "prng:1"), &rows).unwrap();
        let back = FixtureSample::parse(std::str::from_utf8(&bytes).unwrap(), "mem").unwrap();
        assert_eq!(back.rows, rows);
    }
}
