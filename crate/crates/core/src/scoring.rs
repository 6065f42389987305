//! Rating aggregation: dense score matrices and per-trait profiles.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::{InventoryItem, ItemId, Trait};
use crate::rater::RatingRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("incomplete grid, missing cells: {}", format_cells(.missing))]
    IncompleteGrid { missing: Vec<(String, String)> },
    #[error("duplicate cell ({row}, {col})")]
    Duplicate { row: String, col: String },
    #[error("no items selected for {0}")]
    EmptyTrait(Trait),
    #[error("no records to assemble")]
    Empty,
    #[error("record for {item} has no respondent id")]
    MissingRespondent { item: ItemId },
    #[error("matrix shape {rows}x{cols} does not match labels")]
    Shape { rows: usize, cols: usize },
}

fn format_cells(cells: &[(String, String)]) -> String {
    cells
        .iter()
        .map(|(r, c)| format!("({r}, {c})"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixOrientation {
    ItemsByRaters,
    RespondentsByItems,
}

/// Dense labelled table of scores. Rows and columns depend on the orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    #[serde(with = "crate::matrix_serde::rows")]
    pub values: DMatrix<f64>,
    pub orientation: MatrixOrientation,
}

impl ScoreMatrix {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: DMatrix<f64>,
        orientation: MatrixOrientation,
    ) -> Result<Self, ScoringError> {
        if values.nrows() != row_labels.len() || values.ncols() != col_labels.len() {
            return Err(ScoringError::Shape {
                rows: values.nrows(),
                cols: values.ncols(),
            });
        }
        Ok(ScoreMatrix {
            row_labels,
            col_labels,
            values,
            orientation,
        })
    }

    pub fn from_rows(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        rows: &[Vec<f64>],
        orientation: MatrixOrientation,
    ) -> Result<Self, ScoringError> {
        let ncols = col_labels.len();
        if rows.len() != row_labels.len() || rows.iter().any(|r| r.len() != ncols) {
            return Err(ScoringError::Shape {
                rows: rows.len(),
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        let values = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        Self::new(row_labels, col_labels, values, orientation)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Submatrix keeping only the named columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> ScoreMatrix {
        let values = DMatrix::from_fn(self.nrows(), keep.len(), |i, j| self.values[(i, keep[j])]);
        ScoreMatrix {
            row_labels: self.row_labels.clone(),
            col_labels: keep.iter().map(|&j| self.col_labels[j].clone()).collect(),
            values,
            orientation: self.orientation,
        }
    }

    /// CSV with a header row of column labels and the row label in the first column.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        writer.write_record(&header).expect("in-memory write");
        for (i, label) in self.row_labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend(self.values.row(i).iter().map(|v| v.to_string()));
            writer.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Assembles a complete grid from rating records.
///
/// Items are ordered by item number, raters lexicographically, respondents by
/// first appearance. Scores enter on the normal scale.
pub fn build_score_matrix(
    records: &[RatingRecord],
    orientation: MatrixOrientation,
) -> Result<ScoreMatrix, ScoringError> {
    if records.is_empty() {
        return Err(ScoringError::Empty);
    }
    let keyed: Vec<(String, String, f64)> = match orientation {
        MatrixOrientation::ItemsByRaters => records
            .iter()
            .map(|r| (r.item_id.to_string(), r.rater_id.clone(), f64::from(r.normalized_score())))
            .collect(),
        MatrixOrientation::RespondentsByItems => records
            .iter()
            .map(|r| {
                let respondent = r
                    .respondent
                    .clone()
                    .ok_or(ScoringError::MissingRespondent { item: r.item_id })?;
                Ok((respondent, r.item_id.to_string(), f64::from(r.normalized_score())))
            })
            .collect::<Result<_, ScoringError>>()?,
    };

    let item_order = |label: &String| label.parse::<ItemId>().map(|id| id.number()).unwrap_or(u8::MAX);
    let (row_labels, col_labels): (Vec<String>, Vec<String>) = match orientation {
        MatrixOrientation::ItemsByRaters => {
            let mut rows: Vec<String> = keyed.iter().map(|k| k.0.clone()).collect::<BTreeSet<_>>().into_iter().collect();
            rows.sort_by_key(item_order);
            let cols = keyed.iter().map(|k| k.1.clone()).collect::<BTreeSet<_>>().into_iter().collect();
            (rows, cols)
        }
        MatrixOrientation::RespondentsByItems => {
            let mut seen = BTreeSet::new();
            let rows = keyed
                .iter()
                .filter(|k| seen.insert(k.0.clone()))
                .map(|k| k.0.clone())
                .collect();
            let mut cols: Vec<String> = keyed.iter().map(|k| k.1.clone()).collect::<BTreeSet<_>>().into_iter().collect();
            cols.sort_by_key(item_order);
            (rows, cols)
        }
    };

    let row_index: HashMap<&str, usize> = row_labels.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let col_index: HashMap<&str, usize> = col_labels.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut cells: Vec<Option<f64>> = vec![None; row_labels.len() * col_labels.len()];
    for (row, col, value) in &keyed {
        let slot = &mut cells[row_index[row.as_str()] * col_labels.len() + col_index[col.as_str()]];
        if slot.is_some() {
            return Err(ScoringError::Duplicate {
                row: row.clone(),
                col: col.clone(),
            });
        }
        *slot = Some(*value);
    }
    let missing: Vec<(String, String)> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(idx, _)| {
            (
                row_labels[idx / col_labels.len()].clone(),
                col_labels[idx % col_labels.len()].clone(),
            )
        })
        .collect();
    if !missing.is_empty() {
        return Err(ScoringError::IncompleteGrid { missing });
    }
    let ncols = col_labels.len();
    let values = DMatrix::from_fn(row_labels.len(), ncols, |i, j| cells[i * ncols + j].expect("checked"));
    ScoreMatrix::new(row_labels, col_labels, values, orientation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitScore {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub mean: f64,
    pub item_count: usize,
}

/// Mean score per trait over the active items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitProfile {
    pub scores: Vec<TraitScore>,
}

impl TraitProfile {
    pub fn get(&self, trait_: Trait) -> Option<f64> {
        self.scores.iter().find(|s| s.trait_ == trait_).map(|s| s.mean)
    }
}

/// Per-trait arithmetic means. No reverse keying: the raters score the trait itself.
pub fn trait_scores(
    item_scores: &BTreeMap<ItemId, f64>,
    items: &[InventoryItem],
    use_final_set: bool,
) -> Result<TraitProfile, ScoringError> {
    let active: Vec<&InventoryItem> = items.iter().filter(|i| !use_final_set || i.in_final_set).collect();
    let missing: Vec<(String, String)> = active
        .iter()
        .filter(|i| !item_scores.contains_key(&i.id))
        .map(|i| (i.id.to_string(), i.trait_.to_string()))
        .collect();
    if !missing.is_empty() {
        return Err(ScoringError::IncompleteGrid { missing });
    }
    let scores = Trait::ALL
        .iter()
        .filter_map(|&trait_| {
            let values: Vec<f64> = active
                .iter()
                .filter(|i| i.trait_ == trait_)
                .map(|i| item_scores[&i.id])
                .collect();
            (!values.is_empty()).then(|| TraitScore {
                trait_,
                mean: values.iter().sum::<f64>() / values.len() as f64,
                item_count: values.len(),
            })
        })
        .collect();
    Ok(TraitProfile { scores })
}

/// Respondents x items matrix restricted to `trait_`'s items among `items`.
pub fn respondent_matrix_by_trait(
    records: &[RatingRecord],
    items: &[InventoryItem],
    trait_: Trait,
) -> Result<ScoreMatrix, ScoringError> {
    let wanted: BTreeSet<ItemId> = items.iter().filter(|i| i.trait_ == trait_).map(|i| i.id).collect();
    if wanted.is_empty() {
        return Err(ScoringError::EmptyTrait(trait_));
    }
    let subset: Vec<RatingRecord> = records
        .iter()
        .filter(|r| wanted.contains(&r.item_id))
        .cloned()
        .collect();
    let matrix = build_score_matrix(&subset, MatrixOrientation::RespondentsByItems)?;
    let present: BTreeSet<String> = matrix.col_labels.iter().cloned().collect();
    let absent: Vec<(String, String)> = wanted
        .iter()
        .filter(|id| !present.contains(&id.to_string()))
        .flat_map(|id| matrix.row_labels.iter().map(move |r| (r.clone(), id.to_string())))
        .collect();
    if !absent.is_empty() {
        return Err(ScoringError::IncompleteGrid { missing: absent });
    }
    Ok(matrix)
}
