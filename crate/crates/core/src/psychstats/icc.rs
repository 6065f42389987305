use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::StatsError;
use crate::scoring::ScoreMatrix;

/// Two-way consistency ICC, single and average measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    pub icc_single: f64,
    pub icc_average: f64,
    /// `None` when the residual mean square is exactly zero.
    pub f_value: Option<f64>,
    pub df1: usize,
    pub df2: usize,
    pub ci95_single: (f64, f64),
    pub ci95_average: (f64, f64),
    pub p_value: f64,
    pub n_subjects: usize,
    pub k_raters: usize,
    pub ms_rows: f64,
    pub ms_cols: f64,
    pub ms_error: f64,
    /// Raters agree up to per-rater offsets; reported as ICC 1.
    pub exact_agreement: bool,
}

/// Single and average ICC implied by an F ratio with `k` raters.
pub fn icc_from_f(f: f64, k: usize) -> (f64, f64) {
    let k = k as f64;
    ((f - 1.0) / (f - 1.0 + k), (f - 1.0) / f)
}

/// Rows are subjects (items), columns are raters.
pub fn icc_consistency(m: &ScoreMatrix) -> Result<IccResult, StatsError> {
    let (n, k) = (m.nrows(), m.ncols());
    if n < 2 || k < 2 {
        return Err(StatsError::InsufficientData(format!(
            "{n} subjects x {k} raters, need at least 2 x 2"
        )));
    }
    let x = &m.values;
    let grand = x.mean();
    let row_means: Vec<f64> = x.row_iter().map(|r| r.mean()).collect();
    let col_means: Vec<f64> = x.column_iter().map(|c| c.mean()).collect();
    let ss_rows = k as f64 * row_means.iter().map(|r| (r - grand).powi(2)).sum::<f64>();
    let ss_cols = n as f64 * col_means.iter().map(|c| (c - grand).powi(2)).sum::<f64>();
    let mut ss_error = 0.0;
    for i in 0..n {
        for j in 0..k {
            ss_error += (x[(i, j)] - row_means[i] - col_means[j] + grand).powi(2);
        }
    }
    let df1 = n - 1;
    let df2 = (n - 1) * (k - 1);
    let ms_rows = ss_rows / df1 as f64;
    let ms_cols = ss_cols / (k - 1) as f64;
    let ms_error = ss_error / df2 as f64;

    // Residuals that are pure rounding noise relative to the row effect count as exact.
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if ms_error <= 1e-24 * scale * scale {
        if ms_rows <= 1e-24 * scale * scale {
            return Err(StatsError::IccDegenerate);
        }
        return Ok(IccResult {
            icc_single: 1.0,
            icc_average: 1.0,
            f_value: None,
            df1,
            df2,
            ci95_single: (1.0, 1.0),
            ci95_average: (1.0, 1.0),
            p_value: 0.0,
            n_subjects: n,
            k_raters: k,
            ms_rows,
            ms_cols,
            ms_error: 0.0,
            exact_agreement: true,
        });
    }

    let f = ms_rows / ms_error;
    let (icc_single, icc_average) = icc_from_f(f, k);
    let forward = FisherSnedecor::new(df1 as f64, df2 as f64).expect("positive degrees of freedom");
    let backward = FisherSnedecor::new(df2 as f64, df1 as f64).expect("positive degrees of freedom");
    let f_low = f / forward.inverse_cdf(0.975);
    let f_high = f * backward.inverse_cdf(0.975);
    let kf = k as f64;
    Ok(IccResult {
        icc_single,
        icc_average,
        f_value: Some(f),
        df1,
        df2,
        ci95_single: ((f_low - 1.0) / (f_low + kf - 1.0), (f_high - 1.0) / (f_high + kf - 1.0)),
        ci95_average: (1.0 - 1.0 / f_low, 1.0 - 1.0 / f_high),
        p_value: forward.sf(f),
        n_subjects: n,
        k_raters: k,
        ms_rows,
        ms_cols,
        ms_error,
        exact_agreement: false,
    })
}
