//! Rank-quality metrics over per-task outcomes. A task outcome is the
//! 1-based rank of the first correct candidate in its ranked list, or
//! `None` when no candidate was correct.

use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("metrics need at least one task outcome")]
    EmptyDataset,
}

/// Percentage of tasks whose first correct candidate ranks within the top
/// `k`, in [0, 100].
pub fn hr_at_k<F: Float>(ranks: &[Option<usize>], k: usize) -> Result<F, MetricsError> {
    if ranks.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    let hits = ranks
        .iter()
        .filter(|r| matches!(r, Some(rank) if *rank <= k))
        .count();
    let n = F::from(ranks.len()).expect("count fits");
    Ok(F::from(100).expect("constant fits") * F::from(hits).expect("count fits") / n)
}

/// Mean reciprocal rank in [0, 1]; tasks without a correct candidate
/// contribute zero.
pub fn mrr<F: Float>(ranks: &[Option<usize>]) -> Result<F, MetricsError> {
    if ranks.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    let mut sum = F::zero();
    for r in ranks {
        if let Some(rank) = r {
            sum = sum + F::one() / F::from(*rank).expect("rank fits");
        }
    }
    Ok(sum / F::from(ranks.len()).expect("count fits"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn hit_rate_counts_ranks_within_k() {
        let ranks = [Some(1), Some(3), None, Some(2)];
        assert!((hr_at_k::<f64>(&ranks, 1).unwrap() - 25.0).abs() < EPS);
        assert!((hr_at_k::<f64>(&ranks, 2).unwrap() - 50.0).abs() < EPS);
        assert!((hr_at_k::<f64>(&ranks, 3).unwrap() - 75.0).abs() < EPS);
        assert!((hr_at_k::<f64>(&ranks, 100).unwrap() - 75.0).abs() < EPS);
    }

    #[test]
    fn mrr_sums_reciprocals_with_zero_for_misses() {
        let ranks = [Some(1), Some(3), None, Some(2)];
        assert!((mrr::<f64>(&ranks).unwrap() - 0.4583333333333333).abs() < EPS);
        assert!((mrr::<f64>(&[Some(1), Some(1)]).unwrap() - 1.0).abs() < EPS);
        assert!((mrr::<f64>(&[None]).unwrap() - 0.0).abs() < EPS);
    }

    #[test]
    fn hit_rate_is_monotone_in_k_and_bounds_mrr() {
        let ranks = [Some(2), Some(5), None, Some(1), Some(9)];
        let mut last = 0.0f64;
        for k in 1..=10 {
            let hr = hr_at_k::<f64>(&ranks, k).unwrap();
            assert!(hr >= last);
            last = hr;
        }
        // every hit at rank 1 contributes equally to both metrics
        let hr1: f64 = hr_at_k(&ranks, 1).unwrap();
        let m: f64 = mrr(&ranks).unwrap();
        assert!(m >= hr1 / 100.0);
    }

    #[test]
    fn empty_outcomes_are_an_error() {
        assert!(matches!(
            hr_at_k::<f64>(&[], 1),
            Err(MetricsError::EmptyDataset)
        ));
        assert!(matches!(mrr::<f64>(&[]), Err(MetricsError::EmptyDataset)));
    }
}
