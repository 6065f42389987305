//! Agreement, reliability and factor-analysis statistics.
//!
//! Every routine is deterministic: fixed iteration orders, no randomized
//! algorithms, sample variances with `n - 1` denominators throughout.

mod alpha;
mod correlation;
mod descriptive;
mod eigen;
mod factor;
mod icc;
mod kappa;
mod reduction;
mod varimax;

use thiserror::Error;

pub use alpha::{cronbach_alpha, AlphaResult, ItemAlpha};
pub use correlation::{column_means, pearson_corr_matrix, sample_variance};
pub use descriptive::{cosine_similarity, histogram, quantile, summary_stats, HistogramBin, Summary};
pub use eigen::{symmetric_eigen, EigenDecomposition};
pub use factor::{
    bartlett_sphericity, kaiser_count, kmo, pca, scree_elbow, BartlettResult, PcaResult,
};
pub use icc::{icc_consistency, icc_from_f, IccResult};
pub use kappa::{weighted_kappa, KappaResult, WeightScheme};
pub use reduction::{
    assign_components_to_traits, factor_congruence, iterative_item_reduction, ComponentAssignment,
    FlaggedItem, ReductionResult, SALIENT_LOADING,
};
pub use varimax::{varimax, varimax_criterion, varimax_with, VarimaxOptions, VarimaxResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("input is empty")]
    Empty,
    #[error("category {0} is outside 1..=5")]
    CategoryOutOfRange(u8),
    #[error("weighted kappa is undefined: expected disagreement is zero")]
    UndefinedKappa,
    #[error("column {0:?} has zero variance")]
    DegenerateColumn(String),
    #[error("ICC is undefined: no between-subject or residual variance")]
    IccDegenerate,
    #[error("Cronbach's alpha is undefined: total score has zero variance")]
    UndefinedAlpha,
    #[error("matrix is singular or not positive definite")]
    SingularMatrix,
    #[error("KMO is undefined: all off-diagonal correlations are zero")]
    UndefinedKmo,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("every item was dropped from the model")]
    EmptyModel,
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
