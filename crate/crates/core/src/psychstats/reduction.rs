use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::factor::{pca, PcaResult};
use super::StatsError;
use crate::inventory::Trait;
use crate::scoring::ScoreMatrix;

/// Loadings at or above this magnitude count as salient.
pub const SALIENT_LOADING: f64 = 0.40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionResult {
    pub retained: Vec<String>,
    /// Items dropped in each round, in column order; the last round drops nothing.
    pub dropped_per_round: Vec<Vec<String>>,
    pub final_pca: PcaResult,
}

impl ReductionResult {
    pub fn dropped(&self) -> Vec<String> {
        self.dropped_per_round.iter().flatten().cloned().collect()
    }

    pub fn removal_rounds(&self) -> usize {
        self.dropped_per_round.iter().filter(|r| !r.is_empty()).count()
    }
}

/// PCA, keep `k` components, varimax, drop items below `threshold` on every
/// component; repeat until nothing drops.
pub fn iterative_item_reduction(
    m: &ScoreMatrix,
    k: usize,
    threshold: f64,
) -> Result<ReductionResult, StatsError> {
    if k == 0 || !(threshold > 0.0) {
        return Err(StatsError::InvalidArgument(format!(
            "need k >= 1 and a positive threshold, got k = {k}, threshold = {threshold}"
        )));
    }
    let mut current = m.clone();
    let mut dropped_per_round = Vec::new();
    loop {
        if current.ncols() < k {
            return Err(StatsError::InsufficientData(format!(
                "{} items left, fewer than {k} components",
                current.ncols()
            )));
        }
        let mut result = pca(&current)?;
        result.rotate(k)?;
        let rotated = result.rotated_loadings.as_ref().expect("just rotated");
        let keep: Vec<usize> = (0..current.ncols())
            .filter(|&i| rotated.row(i).iter().any(|v| v.abs() >= threshold))
            .collect();
        let dropped: Vec<String> = (0..current.ncols())
            .filter(|i| !keep.contains(i))
            .map(|i| current.col_labels[i].clone())
            .collect();
        let done = dropped.is_empty();
        dropped_per_round.push(dropped);
        if done {
            return Ok(ReductionResult {
                retained: current.col_labels.clone(),
                dropped_per_round,
                final_pca: result,
            });
        }
        if keep.is_empty() {
            return Err(StatsError::EmptyModel);
        }
        current = current.select_columns(&keep);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedItem {
    pub item: String,
    pub trait_: Trait,
    /// The component labeled with the item's trait, if any.
    pub component: Option<usize>,
    pub loading: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentAssignment {
    /// Trait per component (0-based), `None` when no trait has a unique majority.
    pub labels: Vec<Option<Trait>>,
    /// Salient item counts per component and trait.
    pub salient_counts: Vec<BTreeMap<Trait, usize>>,
    pub flagged: Vec<FlaggedItem>,
}

impl ComponentAssignment {
    pub fn component_of(&self, t: Trait) -> Option<usize> {
        self.labels.iter().position(|l| *l == Some(t))
    }

    pub fn unlabeled(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&c| self.labels[c].is_none()).collect()
    }
}

/// Labels each component by the trait contributing the most salient items, then
/// flags items that are not salient on their own trait's component.
pub fn assign_components_to_traits(
    rotated: &DMatrix<f64>,
    items: &[String],
    item_traits: &BTreeMap<String, Trait>,
) -> Result<ComponentAssignment, StatsError> {
    if rotated.nrows() != items.len() {
        return Err(StatsError::LengthMismatch(rotated.nrows(), items.len()));
    }
    let mut labels = Vec::with_capacity(rotated.ncols());
    let mut salient_counts = Vec::with_capacity(rotated.ncols());
    for c in 0..rotated.ncols() {
        let mut counts: BTreeMap<Trait, usize> = BTreeMap::new();
        for (i, item) in items.iter().enumerate() {
            if let Some(&t) = item_traits.get(item) {
                if rotated[(i, c)].abs() >= SALIENT_LOADING {
                    *counts.entry(t).or_default() += 1;
                }
            }
        }
        let best = counts.values().copied().max().unwrap_or(0);
        let leaders: Vec<Trait> = counts.iter().filter(|(_, &n)| n == best).map(|(t, _)| *t).collect();
        labels.push(if best > 0 && leaders.len() == 1 { Some(leaders[0]) } else { None });
        salient_counts.push(counts);
    }

    let mut flagged = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let Some(&t) = item_traits.get(item) else { continue };
        // A trait can lead more than one component; use its strongest for this item.
        let component = (0..labels.len())
            .filter(|&c| labels[c] == Some(t))
            .max_by(|&a, &b| rotated[(i, a)].abs().total_cmp(&rotated[(i, b)].abs()));
        let loading = component.map(|c| rotated[(i, c)]);
        if loading.is_none_or(|l| l.abs() < SALIENT_LOADING) {
            flagged.push(FlaggedItem {
                item: item.clone(),
                trait_: t,
                component,
                loading,
            });
        }
    }
    Ok(ComponentAssignment {
        labels,
        salient_counts,
        flagged,
    })
}

/// Tucker's congruence coefficient between two loading vectors.
pub fn factor_congruence(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    super::descriptive::cosine_similarity(a, b)
}
