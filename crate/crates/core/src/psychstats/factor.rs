use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::correlation::pearson_corr_matrix;
use super::eigen::symmetric_eigen;
use super::varimax::{varimax, VarimaxResult};
use super::StatsError;
use crate::scoring::ScoreMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BartlettResult {
    pub chi2: f64,
    pub df: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub items: Vec<String>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Items x all components, each column scaled by the square root of its eigenvalue.
    #[serde(with = "crate::matrix_serde::rows")]
    pub loadings: DMatrix<f64>,
    /// Items x retained components after varimax, once [`PcaResult::rotate`] has run.
    #[serde(with = "crate::matrix_serde::opt_rows")]
    pub rotated_loadings: Option<DMatrix<f64>>,
    /// `None` when the correlation matrix is singular.
    pub kmo: Option<f64>,
    pub bartlett: Option<BartlettResult>,
    pub kaiser_count: usize,
    /// `None` with fewer than three items.
    pub elbow_count: Option<usize>,
    pub retained_k: usize,
    pub n_respondents: usize,
}

impl PcaResult {
    /// Keeps the first `k` components and varimax-rotates them.
    pub fn rotate(&mut self, k: usize) -> Result<VarimaxResult, StatsError> {
        if k == 0 || k > self.loadings.ncols() {
            return Err(StatsError::InvalidArgument(format!(
                "cannot retain {k} of {} components",
                self.loadings.ncols()
            )));
        }
        let result = varimax(&self.loadings.columns(0, k).into_owned());
        self.retained_k = k;
        self.rotated_loadings = Some(result.loadings.clone());
        Ok(result)
    }

    pub fn item_index(&self, item: &str) -> Option<usize> {
        self.items.iter().position(|i| i == item)
    }
}

/// Flips each column so that its largest-magnitude entry is positive.
/// The first entry wins among equal magnitudes.
pub(super) fn fix_column_signs(m: &mut DMatrix<f64>) -> Vec<bool> {
    let mut flipped = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let mut best = 0usize;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        let flip = !col.is_empty() && col[best] < 0.0;
        if flip {
            col.neg_mut();
        }
        flipped.push(flip);
    }
    flipped
}

fn check_correlation_matrix(r: &DMatrix<f64>) -> Result<usize, StatsError> {
    let p = r.nrows();
    if p == 0 || r.ncols() != p {
        return Err(StatsError::InvalidArgument(format!(
            "expected a nonempty square matrix, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    Ok(p)
}

pub fn kmo(r: &DMatrix<f64>) -> Result<f64, StatsError> {
    let p = check_correlation_matrix(r)?;
    let inv = r
        .clone()
        .cholesky()
        .ok_or(StatsError::SingularMatrix)?
        .inverse();
    let (mut r2, mut q2) = (0.0, 0.0);
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            r2 += r[(i, j)] * r[(i, j)];
            let q = -inv[(i, j)] / (inv[(i, i)] * inv[(j, j)]).sqrt();
            q2 += q * q;
        }
    }
    if r2 + q2 == 0.0 {
        return Err(StatsError::UndefinedKmo);
    }
    Ok(r2 / (r2 + q2))
}

pub fn bartlett_sphericity(r: &DMatrix<f64>, n: usize) -> Result<BartlettResult, StatsError> {
    let p = check_correlation_matrix(r)?;
    if n <= p {
        return Err(StatsError::InsufficientData(format!(
            "{n} respondents for {p} items, need more respondents than items"
        )));
    }
    let chol = r.clone().cholesky().ok_or(StatsError::SingularMatrix)?;
    let ln_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let pf = p as f64;
    let chi2 = -((n as f64) - 1.0 - (2.0 * pf + 5.0) / 6.0) * ln_det;
    let df = p * (p - 1) / 2;
    let p_value = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64).expect("positive df").sf(chi2.max(0.0))
    };
    Ok(BartlettResult { chi2, df, p_value })
}

/// Number of eigenvalues strictly greater than one.
pub fn kaiser_count(eigenvalues: &[f64]) -> usize {
    eigenvalues.iter().filter(|&&l| l > 1.0).count()
}

/// Retained count at the point of maximum second difference; the lowest index wins ties.
pub fn scree_elbow(eigenvalues: &[f64]) -> Result<usize, StatsError> {
    if eigenvalues.len() < 3 {
        return Err(StatsError::InsufficientData(format!(
            "{} eigenvalues, need at least 3",
            eigenvalues.len()
        )));
    }
    let accel: Vec<f64> = eigenvalues
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .collect();
    let best = accel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = eigenvalues.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let first = accel
        .iter()
        .position(|&a| a >= best - 1e-12 * scale)
        .expect("at least one window");
    // Window w centres on eigenvalue w + 1 (0-based), i.e. 1-based index w + 2.
    Ok(first + 2)
}

/// Unrotated correlation-matrix PCA. `retained_k` starts at the Kaiser count (at least 1).
pub fn pca(m: &ScoreMatrix) -> Result<PcaResult, StatsError> {
    let r = pearson_corr_matrix(m)?;
    let eig = symmetric_eigen(&r)?;
    let eigenvalues: Vec<f64> = eig.values.iter().copied().collect();
    let mut loadings = eig.vectors.clone();
    for (j, mut col) in loadings.column_iter_mut().enumerate() {
        col *= eigenvalues[j].max(0.0).sqrt();
    }
    fix_column_signs(&mut loadings);
    let kaiser = kaiser_count(&eigenvalues);
    Ok(PcaResult {
        items: m.col_labels.clone(),
        elbow_count: scree_elbow(&eigenvalues).ok(),
        kaiser_count: kaiser,
        retained_k: kaiser.max(1),
        eigenvalues,
        loadings,
        rotated_loadings: None,
        kmo: kmo(&r).ok(),
        bartlett: bartlett_sphericity(&r, m.nrows()).ok(),
        n_respondents: m.nrows(),
    })
}
