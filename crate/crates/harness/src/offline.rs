//! Statistics recomputed from stored records, optionally joined with human
//! rating files: agreement (kappa), inter-rater ICC and correlations, and the
//! study's reliability and factor statistics.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use traitlens_core::inventory::{load_inventory, InventoryItem, Orientation};
use traitlens_core::psychstats::{icc_consistency, pearson_corr_matrix, weighted_kappa, KappaResult, WeightScheme};
use traitlens_core::rater::{extract_frequency_keyword, keyword_rater_id, RatingRecord};
use traitlens_core::scoring::{build_score_matrix, trait_scores, MatrixOrientation};

use crate::artifacts::{InterRater, TraitScoreTable};
use crate::error::{HarnessError, Result};
use crate::experiments::{analyze_study, answers_from_records, ratings_from_records, Administered, StudyStats};
use crate::store::StoredRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsKind {
    Kappa,
    Icc,
    Alpha,
    Pca,
    All,
}

impl std::str::FromStr for StatsKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "kappa" => Ok(StatsKind::Kappa),
            "icc" => Ok(StatsKind::Icc),
            "alpha" => Ok(StatsKind::Alpha),
            "pca" => Ok(StatsKind::Pca),
            "all" => Ok(StatsKind::All),
            other => Err(format!("unknown statistic {other:?}")),
        }
    }
}

/// Answers from plain administrations (no persona system text) in the normal keyword order.
fn plain_answers(answers: &[Administered], orientation: Orientation) -> Vec<&Administered> {
    answers
        .iter()
        .filter(|a| a.orientation == orientation && a.exchange.system_text.is_none())
        .collect()
}

/// Keyword-derived ratings for the normal-order plain answers.
pub fn keyword_ratings(answers: &[Administered]) -> Vec<RatingRecord> {
    plain_answers(answers, Orientation::Normal)
        .into_iter()
        .filter_map(|a| {
            let score = extract_frequency_keyword(&a.exchange.response_text).score()?;
            Some(RatingRecord {
                item_id: a.item.id,
                rater_id: keyword_rater_id(),
                score,
                orientation: Orientation::Normal,
                raw_answer_ref: a.exchange.request_hash.clone(),
                respondent: None,
                distribution: None,
            })
        })
        .collect()
}

/// Kappa for every pairing the run supports: keyword order (normal vs reversed
/// answers) and, per rater, normal vs reversed scale on the same answers.
pub fn kappa_table(records: &[StoredRecord], scheme: WeightScheme) -> Result<BTreeMap<String, KappaResult>> {
    let answers = answers_from_records(records);
    let mut out = BTreeMap::new();
    let normal = plain_answers(&answers, Orientation::Normal);
    let reversed = plain_answers(&answers, Orientation::Reversed);
    let pairs: Vec<(u8, u8)> = normal
        .iter()
        .filter_map(|n| {
            let r = reversed.iter().find(|r| r.item.id == n.item.id)?;
            Some((
                extract_frequency_keyword(&n.exchange.response_text).score()?,
                extract_frequency_keyword(&r.exchange.response_text).score()?,
            ))
        })
        .collect();
    if !pairs.is_empty() {
        let (x, y): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        out.insert("keyword-order".to_string(), weighted_kappa(&x, &y, scheme)?);
    }
    let ratings = ratings_from_records(records);
    let mut by_rater: BTreeMap<&str, BTreeMap<(&str, Option<&str>), [Option<u8>; 2]>> = BTreeMap::new();
    for r in &ratings {
        let slot = by_rater
            .entry(r.rater_id.as_str())
            .or_default()
            .entry((r.raw_answer_ref.as_str(), r.respondent.as_deref()))
            .or_default();
        let idx = usize::from(r.orientation == Orientation::Reversed);
        slot[idx].get_or_insert(r.normalized_score());
    }
    for (rater, cells) in by_rater {
        let (x, y): (Vec<u8>, Vec<u8>) = cells.values().filter_map(|c| Some((c[0]?, c[1]?))).unzip();
        if !x.is_empty() {
            out.insert(format!("{rater} scale"), weighted_kappa(&x, &y, scheme)?);
        }
    }
    Ok(out)
}

/// Items x raters agreement over the plain normal-order answers, the stored
/// normal-scale ratings of those answers, and any human ratings.
pub fn inter_rater(records: &[StoredRecord], humans: &[RatingRecord]) -> Result<InterRater> {
    let answers = answers_from_records(records);
    let plain: HashSet<&str> = plain_answers(&answers, Orientation::Normal)
        .iter()
        .map(|a| a.exchange.request_hash.as_str())
        .collect();
    let mut pool = keyword_ratings(&answers);
    pool.extend(
        ratings_from_records(records)
            .into_iter()
            .filter(|r| r.orientation == Orientation::Normal && r.respondent.is_none())
            .filter(|r| plain.contains(r.raw_answer_ref.as_str())),
    );
    pool.extend(humans.iter().cloned());
    let mut seen = HashSet::new();
    pool.retain(|r| seen.insert((r.item_id, r.rater_id.clone())));
    let raters: BTreeSet<&str> = pool.iter().map(|r| r.rater_id.as_str()).collect();
    if raters.len() < 2 {
        return Err(HarnessError::Precondition(format!(
            "inter-rater statistics need at least two raters, found {}",
            raters.len()
        )));
    }
    let shared: BTreeSet<_> = pool
        .iter()
        .map(|r| r.item_id)
        .filter(|id| raters.iter().all(|rt| pool.iter().any(|r| r.item_id == *id && r.rater_id == *rt)))
        .collect();
    let grid_records: Vec<RatingRecord> = pool.iter().filter(|r| shared.contains(&r.item_id)).cloned().collect();
    if shared.len() < 2 {
        return Err(HarnessError::Precondition("fewer than two items were rated by every rater".into()));
    }
    let grid = build_score_matrix(&grid_records, MatrixOrientation::ItemsByRaters)?;
    let corr = pearson_corr_matrix(&grid)?;
    let mut icc = vec![("all raters".to_string(), icc_consistency(&grid)?)];
    let human_cols: Vec<usize> = (0..grid.ncols()).filter(|&j| grid.col_labels[j].starts_with("human:")).collect();
    if !human_cols.is_empty() {
        for j in (0..grid.ncols()).filter(|j| !human_cols.contains(j)) {
            let mut cols = human_cols.clone();
            cols.push(j);
            icc.push((
                format!("{} + humans", grid.col_labels[j]),
                icc_consistency(&grid.select_columns(&cols))?,
            ));
        }
    }
    Ok(InterRater {
        raters: grid.col_labels.clone(),
        items: grid.row_labels.clone(),
        correlation: corr.row_iter().map(|r| r.iter().copied().collect()).collect(),
        icc,
    })
}

/// Study statistics over the respondent-labeled ratings in a run.
pub fn study_stats(records: &[StoredRecord]) -> Result<StudyStats> {
    let ratings: Vec<RatingRecord> = ratings_from_records(records)
        .into_iter()
        .filter(|r| r.respondent.is_some())
        .collect();
    if ratings.is_empty() {
        return Err(HarnessError::Precondition("run holds no respondent-labeled ratings".into()));
    }
    let present: BTreeSet<_> = ratings.iter().map(|r| r.item_id).collect();
    let items: Vec<InventoryItem> = load_inventory().into_iter().filter(|i| present.contains(&i.id)).collect();
    analyze_study(&ratings, &items)
}

/// Per-rater trait means over the plain normal-order answers.
pub fn trait_score_table(records: &[StoredRecord], full_bank: bool) -> Result<TraitScoreTable> {
    let answers = answers_from_records(records);
    let plain: HashSet<&str> = plain_answers(&answers, Orientation::Normal)
        .iter()
        .map(|a| a.exchange.request_hash.as_str())
        .collect();
    let mut pool = keyword_ratings(&answers);
    pool.extend(
        ratings_from_records(records)
            .into_iter()
            .filter(|r| r.respondent.is_none() && plain.contains(r.raw_answer_ref.as_str())),
    );
    let mut by_rater: BTreeMap<String, BTreeMap<_, f64>> = BTreeMap::new();
    for r in &pool {
        let label = match r.orientation {
            Orientation::Normal => r.rater_id.clone(),
            Orientation::Reversed => format!("{} (reversed scale)", r.rater_id),
        };
        by_rater.entry(label).or_default().entry(r.item_id).or_insert(f64::from(r.normalized_score()));
    }
    if by_rater.is_empty() {
        return Err(HarnessError::Precondition("run holds no scorable answers".into()));
    }
    let items = load_inventory();
    let profiles = by_rater
        .into_iter()
        .map(|(rater, scores)| Ok((rater, trait_scores(&scores, &items, !full_bank)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TraitScoreTable {
        item_set: if full_bank { "full-44" } else { "final-40" }.into(),
        profiles,
    })
}
