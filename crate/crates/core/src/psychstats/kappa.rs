use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

const CATEGORIES: usize = 5;
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WeightScheme {
    #[default]
    Quadratic,
    Linear,
}

impl WeightScheme {
    /// Disagreement weight between categories `i` and `j` (0-based).
    fn disagreement(self, i: usize, j: usize) -> f64 {
        let d = i.abs_diff(j) as f64;
        match self {
            WeightScheme::Quadratic => d * d,
            WeightScheme::Linear => d,
        }
    }

    fn max_disagreement(self) -> f64 {
        self.disagreement(0, CATEGORIES - 1)
    }
}

impl std::str::FromStr for WeightScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "quadratic" => Ok(WeightScheme::Quadratic),
            "linear" => Ok(WeightScheme::Linear),
            other => Err(format!("unknown weight scheme {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: f64,
    /// Asymptotic standard error, used for the confidence interval.
    pub standard_error: f64,
    /// Standard error under the null of chance agreement, used for the p-value.
    pub standard_error_null: f64,
    pub ci95: (f64, f64),
    pub p_value: f64,
    pub weight_scheme: WeightScheme,
    pub n_pairs: usize,
}

/// Cohen's weighted kappa over the fixed 1..=5 category grid.
pub fn weighted_kappa(x: &[u8], y: &[u8], scheme: WeightScheme) -> Result<KappaResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(&bad) = x.iter().chain(y).find(|&&c| !(1..=5).contains(&c)) {
        return Err(StatsError::CategoryOutOfRange(bad));
    }
    let n = x.len() as f64;
    let mut observed = [[0.0; CATEGORIES]; CATEGORIES];
    for (&a, &b) in x.iter().zip(y) {
        observed[usize::from(a - 1)][usize::from(b - 1)] += 1.0 / n;
    }
    let rows: Vec<f64> = (0..CATEGORIES).map(|i| observed[i].iter().sum()).collect();
    let cols: Vec<f64> = (0..CATEGORIES).map(|j| (0..CATEGORIES).map(|i| observed[i][j]).sum()).collect();

    // Agreement weights in [0, 1]; kappa is identical under either parameterisation.
    let wmax = scheme.max_disagreement();
    let agree = |i: usize, j: usize| 1.0 - scheme.disagreement(i, j) / wmax;

    let mut disagree_obs = 0.0;
    let mut disagree_exp = 0.0;
    let mut pe = 0.0;
    for i in 0..CATEGORIES {
        for j in 0..CATEGORIES {
            let w = scheme.disagreement(i, j);
            disagree_obs += w * observed[i][j];
            disagree_exp += w * rows[i] * cols[j];
            pe += agree(i, j) * rows[i] * cols[j];
        }
    }
    if disagree_exp == 0.0 {
        return Err(StatsError::UndefinedKappa);
    }
    let kappa = 1.0 - disagree_obs / disagree_exp;

    let row_bar: Vec<f64> = (0..CATEGORIES)
        .map(|i| (0..CATEGORIES).map(|j| cols[j] * agree(i, j)).sum())
        .collect();
    let col_bar: Vec<f64> = (0..CATEGORIES)
        .map(|j| (0..CATEGORIES).map(|i| rows[i] * agree(i, j)).sum())
        .collect();
    let mut sum = 0.0;
    let mut sum_null = 0.0;
    for i in 0..CATEGORIES {
        for j in 0..CATEGORIES {
            let spread = row_bar[i] + col_bar[j];
            sum += observed[i][j] * (agree(i, j) - spread * (1.0 - kappa)).powi(2);
            sum_null += rows[i] * cols[j] * (agree(i, j) - spread).powi(2);
        }
    }
    let denom = n * (1.0 - pe).powi(2);
    let variance = (sum - (kappa - pe * (1.0 - kappa)).powi(2)) / denom;
    let variance_null = (sum_null - pe * pe) / denom;
    let standard_error = variance.max(0.0).sqrt();
    let standard_error_null = variance_null.max(0.0).sqrt();

    let p_value = if standard_error_null > 0.0 {
        let z = kappa / standard_error_null;
        let normal = Normal::standard();
        2.0 * normal.sf(z.abs())
    } else if kappa == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(KappaResult {
        kappa,
        standard_error,
        standard_error_null,
        ci95: (kappa - Z_95 * standard_error, kappa + Z_95 * standard_error),
        p_value,
        weight_scheme: scheme,
        n_pairs: x.len(),
    })
}
