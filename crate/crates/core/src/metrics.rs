//! Degree histograms, coverage and distribution-shift summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistogramSource {
    Original,
    Inserted,
    Combined,
}

/// Integer bins `[bin_edges[i], bin_edges[i + 1])`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub bin_edges: Vec<usize>,
    pub counts: Vec<usize>,
    pub source: HistogramSource,
}

impl DegreeHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub const DEFAULT_BIN_WIDTH: usize = 1;

/// Left-closed bins of `bin_width` from 0 up to the maximum degree.
pub fn degree_histogram(
    centralities: &[usize],
    bin_width: usize,
    source: HistogramSource,
) -> Result<DegreeHistogram> {
    if bin_width == 0 {
        return Err(Error::InvalidConfig("bin_width must be at least 1".into()));
    }
    let max = *centralities.iter().max().ok_or(Error::EmptyInput("centralities"))?;
    let bins = max / bin_width + 1;
    let mut counts = vec![0; bins];
    for &c in centralities {
        counts[c / bin_width] += 1;
    }
    Ok(DegreeHistogram {
        bin_edges: (0..=bins).map(|i| i * bin_width).collect(),
        counts,
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub observed: usize,
    pub unobserved: usize,
    pub fraction_observed: f64,
}

pub fn coverage_stats(state: &NetworkState) -> CoverageStats {
    let observed = state.observed().len();
    let unobserved = state.unobserved().len();
    let total = observed + unobserved;
    CoverageStats {
        observed,
        unobserved,
        fraction_observed: if total == 0 { 0.0 } else { observed as f64 / total as f64 },
    }
}

/// Location and shape of the degree distribution before and after insertion.
///
/// `after` statistics are over the original degrees followed by the inserted
/// ones. Skewness is the adjusted Fisher-Pearson coefficient, reported as 0
/// when it is undefined (fewer than three values or zero variance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSummary {
    pub mean_before: f64,
    pub mean_after: f64,
    pub median_before: f64,
    pub median_after: f64,
    pub skewness_before: f64,
    pub skewness_after: f64,
    pub inserted_mean: Option<f64>,
}

pub fn shift_summary(before: &[usize], inserted: &[usize]) -> Result<ShiftSummary> {
    if before.is_empty() {
        return Err(Error::EmptyBefore);
    }
    let before: Vec<f64> = before.iter().map(|&d| d as f64).collect();
    let inserted: Vec<f64> = inserted.iter().map(|&d| d as f64).collect();
    let after: Vec<f64> = before.iter().chain(&inserted).copied().collect();
    Ok(ShiftSummary {
        mean_before: mean(&before),
        mean_after: mean(&after),
        median_before: median(&before),
        median_after: median(&after),
        skewness_before: skewness(&before),
        skewness_after: skewness(&after),
        inserted_mean: (!inserted.is_empty()).then(|| mean(&inserted)),
    })
}

// Integer-valued inputs: sorting first makes every sum order-independent.
fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn mean(xs: &[f64]) -> f64 {
    sorted(xs).iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let v = sorted(xs);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

fn skewness(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 3 {
        return 0.0;
    }
    let v = sorted(xs);
    let m = mean(&v);
    let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    if m2 == 0.0 {
        return 0.0;
    }
    let g1 = m3 / m2.powf(1.5);
    g1 * (n * (n - 1.0)).sqrt() / (n - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_config, EventNode, GeoPoint, ObserverNode};
    use crate::network::init_stroobnet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn histogram_examples() {
        let h = degree_histogram(&[0, 0, 0], 1, HistogramSource::Original).unwrap();
        assert_eq!(h.bin_edges, vec![0, 1]);
        assert_eq!(h.counts, vec![3]);

        let h = degree_histogram(&[0, 1, 2, 3], 2, HistogramSource::Original).unwrap();
        assert_eq!(h.bin_edges, vec![0, 2, 4]);
        assert_eq!(h.counts, vec![2, 2]);

        assert!(matches!(degree_histogram(&[], 1, HistogramSource::Original), Err(Error::EmptyInput(_))));
        assert!(degree_histogram(&[1], 0, HistogramSource::Original).is_err());
    }

    #[test]
    fn histogram_matches_tally() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let degrees: Vec<usize> = (0..500).map(|_| rng.gen_range(0..40)).collect();
        for width in [1, 3, 7] {
            let h = degree_histogram(&degrees, width, HistogramSource::Combined).unwrap();
            assert_eq!(h.total(), 500);
            for (i, &count) in h.counts.iter().enumerate() {
                let (lo, hi) = (h.bin_edges[i], h.bin_edges[i + 1]);
                assert_eq!(count, degrees.iter().filter(|&&d| d >= lo && d < hi).count());
            }
            assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn coverage_cases() {
        let here = GeoPoint::new(29.95, -90.07).unwrap();
        let far = GeoPoint::new(30.5, -90.07).unwrap();
        let cfg = default_config();
        let all = init_stroobnet(vec![ObserverNode::new("o", here)], vec![EventNode::new("e", here)], &cfg).unwrap();
        assert_eq!(coverage_stats(&all).fraction_observed, 1.0);
        let none = init_stroobnet(vec![ObserverNode::new("o", here)], vec![EventNode::new("e", far)], &cfg).unwrap();
        let c = coverage_stats(&none);
        assert_eq!((c.observed, c.unobserved, c.fraction_observed), (0, 1, 0.0));
    }

    #[test]
    fn empty_insertion_is_identity() {
        let s = shift_summary(&[1, 2, 2, 9], &[]).unwrap();
        assert_eq!(s.mean_before, s.mean_after);
        assert_eq!(s.median_before, s.median_after);
        assert_eq!(s.skewness_before, s.skewness_after);
        assert_eq!(s.inserted_mean, None);
        assert!(matches!(shift_summary(&[], &[1]), Err(Error::EmptyBefore)));
    }

    #[test]
    fn insertion_shifts_right() {
        let s = shift_summary(&[0, 0, 0, 0], &[10, 10]).unwrap();
        assert!(s.mean_after > s.mean_before);
        assert_eq!(s.inserted_mean, Some(10.0));
        assert!(s.mean_after.is_finite() && s.skewness_after.is_finite());
    }

    // Two-pass reference statistics with a different evaluation order.
    fn reference(xs: &[usize]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
        let mut v: Vec<usize> = xs.to_vec();
        v.sort();
        let median = if v.len() % 2 == 1 {
            v[v.len() / 2] as f64
        } else {
            (v[v.len() / 2 - 1] + v[v.len() / 2]) as f64 / 2.0
        };
        let (mut s2, mut s3) = (0.0, 0.0);
        for &x in xs {
            let d = x as f64 - mean;
            s2 += d * d;
            s3 += d * d * d;
        }
        let (m2, m3) = (s2 / n, s3 / n);
        let skew = (n * (n - 1.0)).sqrt() / (n - 2.0) * m3 / (m2 * m2.sqrt());
        (mean, median, skew)
    }

    #[test]
    fn matches_reference_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let before: Vec<usize> = (0..rng.gen_range(3..80)).map(|_| rng.gen_range(0..30usize).pow(2) / 30).collect();
            let inserted: Vec<usize> = (0..rng.gen_range(0..20)).map(|_| rng.gen_range(0..40)).collect();
            if before.iter().all(|&b| b == before[0]) {
                continue;
            }
            let s = shift_summary(&before, &inserted).unwrap();
            let (mb, medb, skb) = reference(&before);
            let after: Vec<usize> = before.iter().chain(&inserted).copied().collect();
            let (ma, meda, ska) = reference(&after);
            for (got, want) in [
                (s.mean_before, mb),
                (s.median_before, medb),
                (s.skewness_before, skb),
                (s.mean_after, ma),
                (s.median_after, meda),
                (s.skewness_after, ska),
            ] {
                assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn undefined_skewness_is_zero() {
        let s = shift_summary(&[4, 4, 4], &[]).unwrap();
        assert_eq!(s.skewness_before, 0.0);
        let s = shift_summary(&[1, 2], &[]).unwrap();
        assert_eq!(s.skewness_before, 0.0);
    }

    proptest::proptest! {
        #[test]
        fn permutation_invariant(mut before in proptest::collection::vec(0usize..50, 1..40),
                                 mut inserted in proptest::collection::vec(0usize..50, 0..10)) {
            let a = shift_summary(&before, &inserted).unwrap();
            before.reverse();
            inserted.reverse();
            let b = shift_summary(&before, &inserted).unwrap();
            proptest::prop_assert_eq!(a, b);
        }

        #[test]
        fn histogram_conserves_mass(degrees in proptest::collection::vec(0usize..100, 1..200), width in 1usize..20) {
            let h = degree_histogram(&degrees, width, HistogramSource::Original).unwrap();
            proptest::prop_assert_eq!(h.total(), degrees.len());
        }

        #[test]
        fn high_inserted_degrees_raise_mean(before in proptest::collection::vec(0usize..30, 1..40),
                                            extra in proptest::collection::vec(1usize..20, 1..10)) {
            let top = *before.iter().max().unwrap();
            let inserted: Vec<usize> = extra.iter().map(|e| top + e).collect();
            let s = shift_summary(&before, &inserted).unwrap();
            proptest::prop_assert!(s.mean_after > s.mean_before);
        }
    }
}
