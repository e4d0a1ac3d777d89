//! Counting-measure diagnostics: how many points of a finite sequence land
//! in each cell of a partition, against `n·(F(b) − F(a))`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinCount {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub expected: f64,
}

impl BinCount {
    /// `(count − expected) / √(n·p(1 − p))` with `p = expected / n`.
    pub fn standardized_deviation(&self, n: usize) -> f64 {
        let n = n as f64;
        let p = self.expected / n;
        let sd = libm::sqrt(n * p * (1.0 - p));
        let diff = self.count as f64 - self.expected;
        if sd > 0.0 {
            diff / sd
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Counts `seq` over the cells `[e₀,e₁), …, [e_{k−1}, e_k]`.
///
/// Without `cdf` the reference law is uniform on `[e₀, e_k]`, which then
/// must be finite. Points outside `[e₀, e_k]` are not counted.
pub fn equidistribution_counts(
    seq: &[f64],
    edges: &[f64],
    cdf: Option<&dyn Fn(f64) -> f64>,
) -> Result<Vec<BinCount>> {
    if seq.is_empty() {
        return Err(Error::Empty);
    }
    if edges.len() < 2 {
        return Err(Error::Domain {
            what: "edge count",
            value: edges.len() as f64,
        });
    }
    if let Some(w) = edges
        .windows(2)
        .find(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
    {
        return Err(Error::InvalidParameter {
            name: "bin edge",
            value: w[1],
        });
    }
    let (first, last) = (edges[0], edges[edges.len() - 1]);
    if cdf.is_none() && !(first.is_finite() && last.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "bin edge",
            value: if first.is_finite() { last } else { first },
        });
    }

    let mut counts = alloc::vec![0usize; edges.len() - 1];
    for &x in seq {
        if !(x >= first && x <= last) {
            continue;
        }
        // number of edges ≤ x, minus one, clamped so x == last joins the final cell
        let i = edges
            .partition_point(|&e| e <= x)
            .saturating_sub(1)
            .min(counts.len() - 1);
        counts[i] += 1;
    }

    let n = seq.len() as f64;
    let mass = |a: f64, b: f64| match cdf {
        Some(f) => f(b) - f(a),
        None => (b - a) / (last - first),
    };
    Ok(edges
        .windows(2)
        .zip(counts)
        .map(|(w, count)| BinCount {
            lo: w[0],
            hi: w[1],
            count,
            expected: n * mass(w[0], w[1]),
        })
        .collect())
}

/// `bins + 1` equally spaced edges on `[0, 1]`.
pub fn uniform_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| i as f64 / bins as f64).collect()
}

/// Standard normal quantiles splitting the line into `bins` equal-mass cells,
/// with infinite outer edges.
pub fn gaussian_quantile_edges(bins: usize) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(Error::Domain {
            what: "bin count",
            value: 0.0,
        });
    }
    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(f64::NEG_INFINITY);
    for i in 1..bins {
        edges.push(crate::normal::inv_normal_cdf(i as f64 / bins as f64)?);
    }
    edges.push(f64::INFINITY);
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::GaussianDriver;
    use crate::normal::std_normal_cdf;
    use crate::weyl::weyl_uniform;

    #[test]
    fn two_cells() {
        let c = equidistribution_counts(&[0.1, 0.9], &[0.0, 0.5, 1.0], None).unwrap();
        assert_eq!(c.iter().map(|b| b.count).collect::<Vec<_>>(), [1, 1]);
        assert_eq!(c.iter().map(|b| b.expected).collect::<Vec<_>>(), [1.0, 1.0]);
    }

    #[test]
    fn boundaries_and_outliers() {
        let c = equidistribution_counts(
            &[0.0, 0.5, 1.0, 1.5, -0.1, f64::NAN],
            &[0.0, 0.5, 1.0],
            None,
        )
        .unwrap();
        assert_eq!((c[0].count, c[1].count), (1, 2));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            equidistribution_counts(&[], &[0.0, 1.0], None),
            Err(Error::Empty)
        );
        assert!(equidistribution_counts(&[0.5], &[0.0], None).is_err());
        assert!(equidistribution_counts(&[0.5], &[0.0, 0.0, 1.0], None).is_err());
        assert!(equidistribution_counts(&[0.5], &[f64::NEG_INFINITY, 1.0], None).is_err());
    }

    #[test]
    fn weyl_deciles() {
        let y = weyl_uniform(1, 10_000).unwrap();
        for b in equidistribution_counts(&y, &uniform_edges(10), None).unwrap() {
            assert!((b.count as f64 - 1000.0).abs() <= 150.0);
        }
    }

    #[test]
    fn weyl_gaussian_deciles() {
        let x = GaussianDriver::weyl(1)
            .unwrap()
            .gaussian_stream(10_000)
            .unwrap();
        let edges = gaussian_quantile_edges(10).unwrap();
        let cdf = |v: f64| std_normal_cdf(v);
        for b in equidistribution_counts(&x, &edges, Some(&cdf)).unwrap() {
            assert!((b.expected - 1000.0).abs() < 1e-6);
            assert!((b.count as f64 - 1000.0).abs() <= 150.0);
        }
    }

    #[test]
    fn standardized_deviation_edge_cases() {
        let exact = BinCount {
            lo: 0.0,
            hi: 1.0,
            count: 4,
            expected: 4.0,
        };
        assert_eq!(exact.standardized_deviation(4), 0.0);
        let b = BinCount {
            lo: 0.0,
            hi: 0.5,
            count: 60,
            expected: 50.0,
        };
        assert!((b.standardized_deviation(100) - 2.0).abs() < 1e-12);
    }
}
