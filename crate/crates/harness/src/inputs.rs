//! Readers for the experiment input files: personas, original BFI statements,
//! keyword overrides, and human ratings.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use traitlens_core::inventory::{ItemId, Orientation};
use traitlens_core::rater::{human_rater_id, RatingRecord};
use traitlens_core::report::ScoreOverride;

use crate::error::{HarnessError, Result};

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            HarnessError::Config(format!("input file {} does not exist", path.display()))
        } else {
            HarnessError::io(format!("reading {}", path.display()), e)
        }
    })
}

fn input_error(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::Input {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn strip_numbering(line: &str) -> &str {
    let digits = line.len() - line.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return line;
    }
    match line[digits..].strip_prefix(['.', ')']) {
        Some(rest) if rest.starts_with(char::is_whitespace) => rest.trim_start(),
        _ => line,
    }
}

/// Personas as plain text (one per line, optional "1." numbering) or, for
/// `.csv` files, an indexed CSV whose last column holds the description.
pub fn read_personas(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path)?;
    let personas: Vec<String> = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut out = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| input_error(path, e.to_string()))?;
            if let Some(p) = row.iter().last().map(str::trim).filter(|p| !p.is_empty()) {
                out.push(p.to_string());
            }
        }
        out
    } else {
        text.lines()
            .map(|l| strip_numbering(l.trim()).trim())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    };
    if personas.is_empty() {
        return Err(input_error(path, "no personas found"));
    }
    Ok(personas)
}

/// The persona file for `model` inside `dir`: `{model}.txt` or `{model}.csv`,
/// falling back to `default.txt`.
pub fn persona_file_for(dir: &Path, model: &str) -> Result<PathBuf> {
    let safe: String = model
        .chars()
        .map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    [format!("{safe}.txt"), format!("{safe}.csv"), "default.txt".to_string()]
        .iter()
        .map(|name| dir.join(name))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            HarnessError::Config(format!(
                "no persona file for {model} in {} (tried {safe}.txt, {safe}.csv, default.txt)",
                dir.display()
            ))
        })
}

#[derive(Debug, Deserialize)]
struct StatementRow {
    id: String,
    text: String,
}

/// Original BFI statements as CSV `id,text`; ids are `1`..`44` or `Q1`..`Q44`.
pub fn read_bfi_statements(path: &Path) -> Result<Vec<(ItemId, String)>> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<StatementRow>() {
        let row = row.map_err(|e| input_error(path, e.to_string()))?;
        let id: ItemId = row.id.parse().map_err(|e: traitlens_core::inventory::InventoryError| input_error(path, e.to_string()))?;
        if row.text.trim().is_empty() {
            return Err(input_error(path, format!("statement {id} is empty")));
        }
        out.push((id, row.text.trim().to_string()));
    }
    if out.is_empty() {
        return Err(input_error(path, "no statements found"));
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct OverrideRow {
    item_id: String,
    variant: String,
    corrected_score: u8,
    #[serde(default)]
    note: String,
}

/// Manual keyword corrections as CSV `item_id,variant,corrected_score,note`.
pub fn read_overrides(path: &Path) -> Result<Vec<ScoreOverride>> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<OverrideRow>() {
        let row = row.map_err(|e| input_error(path, e.to_string()))?;
        let item_id: ItemId = row
            .item_id
            .parse()
            .map_err(|e: traitlens_core::inventory::InventoryError| input_error(path, e.to_string()))?;
        let variant: Orientation = row.variant.parse().map_err(|e| input_error(path, format!("{e}")))?;
        if !(1..=5).contains(&row.corrected_score) {
            return Err(input_error(path, format!("corrected score {} outside 1..=5", row.corrected_score)));
        }
        out.push(ScoreOverride {
            item_id,
            variant,
            corrected_score: row.corrected_score,
            note: row.note,
        });
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct HumanRow {
    item_id: String,
    rater_name: String,
    score: u8,
}

/// Human ratings as CSV `item_id,rater_name,score`, all on the normal scale.
pub fn read_human_ratings(path: &Path) -> Result<Vec<RatingRecord>> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<HumanRow>().enumerate() {
        let row = row.map_err(|e| input_error(path, e.to_string()))?;
        let item_id: ItemId = row
            .item_id
            .parse()
            .map_err(|e: traitlens_core::inventory::InventoryError| input_error(path, e.to_string()))?;
        if !(1..=5).contains(&row.score) {
            return Err(input_error(path, format!("score {} outside 1..=5 on line {}", row.score, i + 2)));
        }
        out.push(RatingRecord {
            item_id,
            rater_id: human_rater_id(row.rater_name.trim()),
            score: row.score,
            orientation: Orientation::Normal,
            raw_answer_ref: format!("{}:{}", path.display(), i + 2),
            respondent: None,
            distribution: None,
        });
    }
    Ok(out)
}
