use nalgebra::DMatrix;

use super::StatsError;
use crate::scoring::ScoreMatrix;

pub fn column_means(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows() as f64;
    m.column_iter().map(|c| c.iter().sum::<f64>() / n).collect()
}

/// Sample variance with an `n - 1` denominator.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Pearson correlations between the columns of `m`.
pub fn pearson_corr_matrix(m: &ScoreMatrix) -> Result<DMatrix<f64>, StatsError> {
    let (n, p) = (m.nrows(), m.ncols());
    if n < 2 {
        return Err(StatsError::InsufficientData(format!("{n} rows, need at least 2")));
    }
    let means = column_means(&m.values);
    let centered = DMatrix::from_fn(n, p, |i, j| m.values[(i, j)] - means[j]);
    let norms: Vec<f64> = centered.column_iter().map(|c| c.norm()).collect();
    if let Some(j) = norms.iter().position(|&s| s == 0.0) {
        return Err(StatsError::DegenerateColumn(m.col_labels[j].clone()));
    }
    let mut r = DMatrix::identity(p, p);
    for a in 0..p {
        for b in (a + 1)..p {
            let dot = centered.column(a).dot(&centered.column(b));
            let v = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            r[(a, b)] = v;
            r[(b, a)] = v;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::MatrixOrientation;

    fn matrix(cols: &[&[f64]]) -> ScoreMatrix {
        let n = cols[0].len();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        ScoreMatrix::from_rows(
            (0..n).map(|i| format!("r{i}")).collect(),
            (0..cols.len()).map(|j| format!("c{j}")).collect(),
            &rows,
            MatrixOrientation::RespondentsByItems,
        )
        .unwrap()
    }

    #[test]
    fn simple_correlations() {
        let r = pearson_corr_matrix(&matrix(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]])).unwrap();
        assert_eq!(r[(0, 0)], 1.0);
        assert!((r[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((r[(0, 2)] + 1.0).abs() < 1e-15);
        assert_eq!(r, r.transpose());
    }

    #[test]
    fn degenerate_column_is_named() {
        let err = pearson_corr_matrix(&matrix(&[&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]])).unwrap_err();
        assert_eq!(err, StatsError::DegenerateColumn("c1".into()));
        assert!(matches!(
            pearson_corr_matrix(&matrix(&[&[1.0], &[2.0]])),
            Err(StatsError::InsufficientData(_))
        ));
    }

    #[test]
    fn variance_uses_n_minus_one() {
        assert_eq!(sample_variance(&[1.0, 3.0, 5.0]), 4.0);
    }
}
