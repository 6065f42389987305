use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::correlation::sample_variance;
use super::StatsError;
use crate::scoring::ScoreMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemAlpha {
    pub item: String,
    /// `None` when deleting the item leaves fewer than two items or a constant total.
    pub alpha_if_deleted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub alpha: f64,
    /// One entry per column, in column order.
    pub alpha_if_deleted: Vec<ItemAlpha>,
    pub k_items: usize,
    pub n_respondents: usize,
}

impl AlphaResult {
    pub fn if_deleted(&self, item: &str) -> Option<f64> {
        self.alpha_if_deleted
            .iter()
            .find(|a| a.item == item)
            .and_then(|a| a.alpha_if_deleted)
    }
}

fn alpha_of(values: &DMatrix<f64>, columns: &[usize]) -> Result<f64, StatsError> {
    let k = columns.len();
    if k < 2 {
        return Err(StatsError::InsufficientData(format!("{k} items, need at least 2")));
    }
    let item_var: f64 = columns
        .iter()
        .map(|&j| sample_variance(values.column(j).as_slice()))
        .sum();
    let totals: Vec<f64> = (0..values.nrows())
        .map(|i| columns.iter().map(|&j| values[(i, j)]).sum())
        .collect();
    let total_var = sample_variance(&totals);
    if total_var <= 0.0 {
        return Err(StatsError::UndefinedAlpha);
    }
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

/// Rows are respondents, columns are items.
pub fn cronbach_alpha(m: &ScoreMatrix) -> Result<AlphaResult, StatsError> {
    let (n, k) = (m.nrows(), m.ncols());
    if n < 2 || k < 2 {
        return Err(StatsError::InsufficientData(format!(
            "{n} respondents x {k} items, need at least 2 x 2"
        )));
    }
    let all: Vec<usize> = (0..k).collect();
    let alpha = alpha_of(&m.values, &all)?;
    let alpha_if_deleted = (0..k)
        .map(|drop| {
            let rest: Vec<usize> = all.iter().copied().filter(|&j| j != drop).collect();
            ItemAlpha {
                item: m.col_labels[drop].clone(),
                alpha_if_deleted: alpha_of(&m.values, &rest).ok(),
            }
        })
        .collect();
    Ok(AlphaResult {
        alpha,
        alpha_if_deleted,
        k_items: k,
        n_respondents: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::MatrixOrientation;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn matrix(rows: &[Vec<f64>]) -> ScoreMatrix {
        ScoreMatrix::from_rows(
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            (0..rows[0].len()).map(|j| format!("Q{}", j + 1)).collect(),
            rows,
            MatrixOrientation::RespondentsByItems,
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_small_case() {
        // Item variances 4 and 2.3333, total variance of [3,7,10] is 12.3333.
        let r = cronbach_alpha(&matrix(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 5.0]])).unwrap();
        let expected = 2.0 * (1.0 - (4.0 + 7.0 / 3.0) / (37.0 / 3.0));
        assert!((r.alpha - expected).abs() < 1e-12);
        assert!((r.alpha - 36.0 / 37.0).abs() < 1e-12);
        assert_eq!(r.alpha_if_deleted.len(), 2);
        assert!(r.alpha_if_deleted.iter().all(|a| a.alpha_if_deleted.is_none()));
    }

    #[test]
    fn parallel_items_give_one() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![f64::from(i % 5 + 1); 3]).collect();
        let r = cronbach_alpha(&matrix(&rows)).unwrap();
        assert!((r.alpha - 1.0).abs() < 1e-12);
        assert!((r.if_deleted("Q2").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_totals_are_undefined() {
        let rows = vec![vec![1.0, 5.0], vec![5.0, 1.0], vec![3.0, 3.0]];
        assert_eq!(cronbach_alpha(&matrix(&rows)), Err(StatsError::UndefinedAlpha));
        assert!(cronbach_alpha(&matrix(&[vec![1.0, 2.0]])).is_err());
    }

    #[test]
    fn independent_columns_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..10_000)
            .map(|_| (0..6).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let r = cronbach_alpha(&matrix(&rows)).unwrap();
        assert!(r.alpha.abs() < 0.1, "{}", r.alpha);
    }

    #[test]
    fn if_deleted_matches_recomputation() {
        let rows = vec![
            vec![4.0, 5.0, 2.0, 4.0],
            vec![3.0, 4.0, 3.0, 3.0],
            vec![5.0, 5.0, 1.0, 4.0],
            vec![2.0, 3.0, 4.0, 2.0],
            vec![4.0, 4.0, 2.0, 5.0],
        ];
        let r = cronbach_alpha(&matrix(&rows)).unwrap();
        for drop in 0..4 {
            let sub: Vec<Vec<f64>> = rows
                .iter()
                .map(|row| row.iter().enumerate().filter(|(j, _)| *j != drop).map(|(_, v)| *v).collect())
                .collect();
            let direct = cronbach_alpha(&matrix(&sub)).unwrap().alpha;
            assert!((r.alpha_if_deleted[drop].alpha_if_deleted.unwrap() - direct).abs() < 1e-12);
        }
    }
}
