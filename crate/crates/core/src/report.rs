//! Experiment report types and the table/figure emitters built from them.
//!
//! Every emitter is a pure function: the same report always produces the same
//! bytes. CSV and JSON keep full float precision; markdown rounds to 3 places.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::{FrequencyKeyword, ItemId, Trait};
use crate::psychstats::{
    histogram, summary_stats, weighted_kappa, AlphaResult, ComponentAssignment, IccResult,
    KappaResult, PcaResult, Summary, WeightScheme, SALIENT_LOADING,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("loading table needs rotated loadings")]
    MissingRotation,
    #[error("model has no items")]
    EmptyModel,
}

/// Width of the similarity histogram bins on [0, 1].
pub const SIMILARITY_BIN_WIDTH: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReversalKind {
    /// Frequency keywords presented in reverse order to the testee.
    KeywordOrder,
    /// Rater scale presented in reverse order, scores mapped back by 6 - x.
    RaterScale,
    /// Numeric self-report on the original statements, both scale orders.
    SelfReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Analyzed,
    /// No frequency keyword in at least one of the two answers.
    Unkeyed,
    /// No usable 1-5 rating in at least one of the two responses.
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOverride {
    pub item_id: ItemId,
    pub variant: crate::inventory::Orientation,
    pub corrected_score: u8,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalItem {
    pub item: ItemId,
    #[serde(rename = "trait")]
    pub trait_: Trait,
    /// Score under the normal presentation.
    pub normal_score: Option<u8>,
    /// Score under the reversed presentation, already on the normal scale.
    pub reversed_score: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_keyword: Option<FrequencyKeyword>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reversed_keyword: Option<FrequencyKeyword>,
    /// Testee answers, or rater replies for the rater-scale experiment.
    pub normal_text: String,
    pub reversed_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<ScoreOverride>,
    pub status: ItemStatus,
    /// Scores disagreed before any manual override.
    pub raw_inconsistent: bool,
    pub inconsistent: bool,
}

impl ReversalItem {
    /// Builds an item and applies matching overrides to the scores.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        item: ItemId,
        trait_: Trait,
        normal_score: Option<u8>,
        reversed_score: Option<u8>,
        normal_text: String,
        reversed_text: String,
        failure_status: ItemStatus,
        overrides: &[ScoreOverride],
    ) -> Self {
        let raw_inconsistent = matches!((normal_score, reversed_score), (Some(a), Some(b)) if a != b);
        let applied: Vec<ScoreOverride> = overrides.iter().filter(|o| o.item_id == item).cloned().collect();
        let (mut normal, mut reversed) = (normal_score, reversed_score);
        for o in &applied {
            match o.variant {
                crate::inventory::Orientation::Normal => normal = Some(o.corrected_score),
                crate::inventory::Orientation::Reversed => reversed = Some(o.corrected_score),
            }
        }
        let status = if normal.is_some() && reversed.is_some() {
            ItemStatus::Analyzed
        } else {
            failure_status
        };
        ReversalItem {
            item,
            trait_,
            normal_score: normal,
            reversed_score: reversed,
            normal_keyword: None,
            reversed_keyword: None,
            normal_text,
            reversed_text,
            similarity: None,
            raw_inconsistent,
            inconsistent: matches!((normal, reversed), (Some(a), Some(b)) if a != b),
            overrides: applied,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalReport {
    pub kind: ReversalKind,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rater: Option<String>,
    pub items: Vec<ReversalItem>,
    pub analyzed: usize,
    pub flagged: usize,
    /// Disagreements before overrides, among items analyzable before overrides.
    pub raw_inconsistency_count: usize,
    pub inconsistency_count: usize,
    pub kappa: Option<KappaResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<Summary>,
}

impl ReversalReport {
    pub fn assemble(
        kind: ReversalKind,
        model: String,
        rater: Option<String>,
        items: Vec<ReversalItem>,
        scheme: WeightScheme,
    ) -> Self {
        let pairs: Vec<(u8, u8)> = items
            .iter()
            .filter(|i| i.status == ItemStatus::Analyzed)
            .filter_map(|i| Some((i.normal_score?, i.reversed_score?)))
            .collect();
        let (xs, ys): (Vec<u8>, Vec<u8>) = pairs.iter().copied().unzip();
        let (kappa, kappa_error) = match weighted_kappa(&xs, &ys, scheme) {
            Ok(k) => (Some(k), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let sims: Vec<f64> = items.iter().filter_map(|i| i.similarity).collect();
        ReversalReport {
            kind,
            model,
            rater,
            analyzed: pairs.len(),
            flagged: items.len() - pairs.len(),
            raw_inconsistency_count: items.iter().filter(|i| i.raw_inconsistent).count(),
            inconsistency_count: items.iter().filter(|i| i.inconsistent).count(),
            kappa,
            kappa_error,
            similarity: summary_stats(&sims).ok(),
            items,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementCell {
    pub model: String,
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub level: u8,
    /// One trait score per persona, in persona order.
    pub scores: Vec<f64>,
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub cells: Vec<MeasurementCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredScore {
    pub model: String,
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub level: u8,
    pub persona_index: usize,
    pub score: f64,
}

impl MeasurementReport {
    /// Groups scores by (model, trait, level); cells come out sorted by model,
    /// trait, then level, with scores ordered by persona index.
    pub fn assemble(scores: &[MeasuredScore]) -> Self {
        let mut grouped: BTreeMap<(String, Trait, u8), Vec<(usize, f64)>> = BTreeMap::new();
        for s in scores {
            grouped
                .entry((s.model.clone(), s.trait_, s.level))
                .or_default()
                .push((s.persona_index, s.score));
        }
        let cells = grouped
            .into_iter()
            .map(|((model, trait_, level), mut v)| {
                v.sort_by_key(|(p, _)| *p);
                let scores: Vec<f64> = v.into_iter().map(|(_, s)| s).collect();
                MeasurementCell {
                    summary: summary_stats(&scores).ok(),
                    model,
                    trait_,
                    level,
                    scores,
                }
            })
            .collect();
        MeasurementReport { cells }
    }

    pub fn cell(&self, model: &str, trait_: Trait, level: u8) -> Option<&MeasurementCell> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.trait_ == trait_ && c.level == level)
    }

    pub fn mean(&self, model: &str, trait_: Trait, level: u8) -> Option<f64> {
        self.cell(model, trait_, level).and_then(|c| c.summary.as_ref().map(|s| s.mean))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableOutput {
    pub csv: String,
    pub markdown: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversalArtifacts {
    pub scatter_csv: String,
    pub histogram_csv: String,
    pub box_stats_json: String,
    pub scatter_svg: String,
}

fn csv_string(rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-trait alpha with item-deleted values; a `*` marks items whose removal raises alpha.
pub fn emit_alpha_table(results: &[(Trait, AlphaResult)]) -> TableOutput {
    let mut rows = vec![vec![
        "trait".to_string(),
        "alpha".into(),
        "item".into(),
        "alpha_if_deleted".into(),
        "raises_alpha".into(),
    ]];
    let mut md = String::new();
    for (t, a) in results {
        let _ = writeln!(md, "| {} (alpha = {:.3}) | alpha if item deleted |", t.name(), a.alpha);
        md.push_str("|---|---|\n");
        for item in &a.alpha_if_deleted {
            let raises = item.alpha_if_deleted.is_some_and(|v| v > a.alpha);
            rows.push(vec![
                t.name().to_string(),
                a.alpha.to_string(),
                item.item.clone(),
                opt(item.alpha_if_deleted),
                raises.to_string(),
            ]);
            let shown = item.alpha_if_deleted.map_or("n/a".to_string(), |v| format!("{v:.3}"));
            let _ = writeln!(md, "| {} | {}{} |", item.item, shown, if raises { "*" } else { "" });
        }
        md.push('\n');
    }
    TableOutput {
        csv: csv_string(&rows),
        markdown: md,
    }
}

/// Rotated loadings, rows grouped by dominant component and sorted by
/// descending loading magnitude within each group.
pub fn emit_loading_table(
    pca: &PcaResult,
    assignment: &ComponentAssignment,
) -> Result<TableOutput, ReportError> {
    let rotated = pca.rotated_loadings.as_ref().ok_or(ReportError::MissingRotation)?;
    if rotated.nrows() == 0 || rotated.ncols() == 0 {
        return Err(ReportError::EmptyModel);
    }
    let k = rotated.ncols();
    let dominant = |i: usize| {
        (0..k)
            .max_by(|&a, &b| rotated[(i, a)].abs().total_cmp(&rotated[(i, b)].abs()).then(b.cmp(&a)))
            .expect("k >= 1")
    };
    let mut order: Vec<usize> = (0..rotated.nrows()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = (dominant(a), dominant(b));
        da.cmp(&db)
            .then(rotated[(b, db)].abs().total_cmp(&rotated[(a, da)].abs()))
            .then(a.cmp(&b))
    });

    let component_name = |c: usize| match assignment.labels.get(c).copied().flatten() {
        Some(t) => format!("Component {} ({})", c + 1, t.name()),
        None => format!("Component {}", c + 1),
    };
    let mut header = vec!["item".to_string()];
    header.extend((0..k).map(|c| format!("component_{}", c + 1)));
    header.push("salient_components".into());
    let mut rows = vec![header];
    let mut md = String::from("| Item |");
    for c in 0..k {
        let _ = write!(md, " {} |", component_name(c));
    }
    md.push_str("\n|---|");
    md.push_str(&"---|".repeat(k));
    md.push('\n');
    for &i in &order {
        let mut row = vec![pca.items[i].clone()];
        let mut salient = Vec::new();
        let _ = write!(md, "| {} |", pca.items[i]);
        for c in 0..k {
            let v = rotated[(i, c)];
            row.push(v.to_string());
            if v.abs() >= SALIENT_LOADING {
                salient.push((c + 1).to_string());
                let _ = write!(md, " **{v:.3}** |");
            } else {
                let _ = write!(md, " {v:.3} |");
            }
        }
        row.push(salient.join(";"));
        rows.push(row);
        md.push('\n');
    }
    Ok(TableOutput {
        csv: csv_string(&rows),
        markdown: md,
    })
}

pub fn emit_reversal_artifacts(report: &ReversalReport) -> ReversalArtifacts {
    let mut rows = vec![vec![
        "item".to_string(),
        "trait".into(),
        "normal_score".into(),
        "reversed_score".into(),
        "similarity".into(),
        "status".into(),
        "inconsistent".into(),
    ]];
    for i in &report.items {
        rows.push(vec![
            i.item.to_string(),
            i.trait_.name().to_string(),
            opt(i.normal_score),
            opt(i.reversed_score),
            opt(i.similarity),
            serde_json::to_value(i.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            i.inconsistent.to_string(),
        ]);
    }
    let sims: Vec<f64> = report.items.iter().filter_map(|i| i.similarity).collect();
    let mut hist = vec![vec!["bin_low".to_string(), "bin_high".into(), "count".into()]];
    if !sims.is_empty() {
        for b in histogram(&sims, 0.0, 1.0, SIMILARITY_BIN_WIDTH).expect("fixed valid range") {
            hist.push(vec![b.lo.to_string(), b.hi.to_string(), b.count.to_string()]);
        }
    }
    ReversalArtifacts {
        scatter_csv: csv_string(&rows),
        histogram_csv: csv_string(&hist),
        box_stats_json: serde_json::to_string_pretty(&report.similarity).expect("plain data"),
        scatter_svg: reversal_scatter_svg(report),
    }
}

/// Long format: one row per measured score.
pub fn emit_measurement_ridgeline(report: &MeasurementReport) -> String {
    let mut rows = vec![vec![
        "model".to_string(),
        "trait".into(),
        "level".into(),
        "persona".into(),
        "score".into(),
    ]];
    for c in &report.cells {
        for (p, s) in c.scores.iter().enumerate() {
            rows.push(vec![
                c.model.clone(),
                c.trait_.name().to_string(),
                c.level.to_string(),
                (p + 1).to_string(),
                s.to_string(),
            ]);
        }
    }
    csv_string(&rows)
}

pub fn emit_scree_csv(pca: &PcaResult) -> String {
    let mut rows = vec![vec!["component".to_string(), "eigenvalue".into()]];
    for (i, l) in pca.eigenvalues.iter().enumerate() {
        rows.push(vec![(i + 1).to_string(), l.to_string()]);
    }
    csv_string(&rows)
}

/// Square matrix with labels on both axes, e.g. a correlation heatmap.
pub fn emit_matrix_csv(labels: &[String], m: &DMatrix<f64>) -> String {
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    let mut rows = vec![header];
    for (i, l) in labels.iter().enumerate() {
        let mut row = vec![l.clone()];
        row.extend(m.row(i).iter().map(|v| v.to_string()));
        rows.push(row);
    }
    csv_string(&rows)
}

pub fn emit_icc_bars(results: &[(String, IccResult)]) -> String {
    let mut rows = vec![vec![
        "comparison".to_string(),
        "icc_single".into(),
        "icc_average".into(),
        "single_low".into(),
        "single_high".into(),
        "average_low".into(),
        "average_high".into(),
        "f_value".into(),
        "p_value".into(),
    ]];
    for (name, r) in results {
        rows.push(vec![
            name.clone(),
            r.icc_single.to_string(),
            r.icc_average.to_string(),
            r.ci95_single.0.to_string(),
            r.ci95_single.1.to_string(),
            r.ci95_average.0.to_string(),
            r.ci95_average.1.to_string(),
            opt(r.f_value),
            r.p_value.to_string(),
        ]);
    }
    csv_string(&rows)
}

const SVG_SIZE: f64 = 320.0;
const SVG_MARGIN: f64 = 40.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n<title>{t}</title>\n<rect width=\"{s}\" height=\"{s}\" fill=\"white\"/>\n",
        s = SVG_SIZE,
        t = xml_escape(title)
    )
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn axes(svg: &mut String, x_label: &str, y_label: &str) {
    let (lo, hi) = (SVG_MARGIN, SVG_SIZE - SVG_MARGIN);
    let _ = writeln!(svg, "<line x1=\"{lo}\" y1=\"{hi}\" x2=\"{hi}\" y2=\"{hi}\" stroke=\"black\"/>");
    let _ = writeln!(svg, "<line x1=\"{lo}\" y1=\"{lo}\" x2=\"{lo}\" y2=\"{hi}\" stroke=\"black\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        SVG_SIZE / 2.0,
        SVG_SIZE - 8.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"12\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 {})\">{}</text>",
        SVG_SIZE / 2.0,
        SVG_SIZE / 2.0,
        xml_escape(y_label)
    );
}

/// Scatter of normal vs reversed scores on the 1-5 grid; marker area grows
/// with the number of items sharing a cell, inconsistent cells get a red ring.
pub fn reversal_scatter_svg(report: &ReversalReport) -> String {
    let mut svg = svg_open(&format!("{} reversal: {}", kind_name(report.kind), report.model));
    axes(&mut svg, "normal", "reversed (normalized)");
    let pos = |s: u8| SVG_MARGIN + (f64::from(s) - 0.5) / 5.0 * (SVG_SIZE - 2.0 * SVG_MARGIN);
    for s in 1..=5u8 {
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"10\" text-anchor=\"middle\">{s}</text>",
            x = pos(s),
            y = SVG_SIZE - SVG_MARGIN + 14.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"10\" text-anchor=\"end\">{s}</text>",
            x = SVG_MARGIN - 4.0,
            y = SVG_SIZE - pos(s) + 4.0
        );
    }
    let mut cells: BTreeMap<(u8, u8), usize> = BTreeMap::new();
    for i in &report.items {
        if let (Some(x), Some(y)) = (i.normal_score, i.reversed_score) {
            *cells.entry((x, y)).or_default() += 1;
        }
    }
    for (&(x, y), &n) in &cells {
        let (cx, cy) = (pos(x), SVG_SIZE - pos(y));
        let r = 3.0 + 2.0 * (n as f64).sqrt();
        let _ = writeln!(svg, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{r:.2}\" fill=\"steelblue\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{cx}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\" fill=\"white\">{n}</text>",
            cy + 3.0
        );
        if x != y {
            let _ = writeln!(
                svg,
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{:.2}\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>",
                r + 5.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Eigenvalues by component with a dashed line at 1.
pub fn scree_svg(eigenvalues: &[f64]) -> String {
    let mut svg = svg_open("scree");
    axes(&mut svg, "component", "eigenvalue");
    let top = eigenvalues.iter().copied().fold(1.0, f64::max) * 1.05;
    let n = eigenvalues.len().max(1) as f64;
    let span = SVG_SIZE - 2.0 * SVG_MARGIN;
    let x = |i: usize| SVG_MARGIN + (i as f64 + 0.5) / n * span;
    let y = |v: f64| SVG_SIZE - SVG_MARGIN - v / top * span;
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{y1:.2}\" x2=\"{}\" y2=\"{y1:.2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>",
        SVG_MARGIN,
        SVG_SIZE - SVG_MARGIN,
        y1 = y(1.0)
    );
    let points: Vec<String> = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v)))
        .collect();
    let _ = writeln!(svg, "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\"/>", points.join(" "));
    for (i, &v) in eigenvalues.iter().enumerate() {
        let _ = writeln!(svg, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>", x(i), y(v));
    }
    svg.push_str("</svg>\n");
    svg
}

fn kind_name(kind: ReversalKind) -> &'static str {
    match kind {
        ReversalKind::KeywordOrder => "keyword order",
        ReversalKind::RaterScale => "rater scale",
        ReversalKind::SelfReport => "self-report",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::Orientation;
    use crate::psychstats::ItemAlpha;

    fn id(n: u8) -> ItemId {
        ItemId::new(n).unwrap()
    }

    fn pair_report(pairs: &[(u8, u8)]) -> ReversalReport {
        let items = pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let mut it = ReversalItem::new(
                    id(i as u8 + 1),
                    Trait::Openness,
                    Some(a),
                    Some(b),
                    "x".into(),
                    "y".into(),
                    ItemStatus::Unkeyed,
                    &[],
                );
                it.similarity = Some(0.9 + 0.01 * (i % 10) as f64);
                it
            })
            .collect();
        ReversalReport::assemble(ReversalKind::KeywordOrder, "m".into(), None, items, WeightScheme::Quadratic)
    }

    #[test]
    fn overrides_fix_scores() {
        let o = ScoreOverride {
            item_id: id(35),
            variant: Orientation::Reversed,
            corrected_score: 1,
            note: "same meaning".into(),
        };
        let it = ReversalItem::new(id(35), Trait::Agreeableness, Some(1), Some(5), "".into(), "".into(), ItemStatus::Unkeyed, &[o]);
        assert!(it.raw_inconsistent);
        assert!(!it.inconsistent);
        assert_eq!(it.reversed_score, Some(1));
        let missing = ReversalItem::new(id(2), Trait::Openness, None, Some(3), "".into(), "".into(), ItemStatus::Unkeyed, &[]);
        assert_eq!(missing.status, ItemStatus::Unkeyed);
    }

    #[test]
    fn report_counts_reconcile() {
        let r = pair_report(&[(1, 1), (2, 2), (3, 4), (5, 5), (4, 4)]);
        assert_eq!(r.analyzed + r.flagged, 5);
        assert_eq!(r.inconsistency_count, 1);
        let consistent = pair_report(&[(1, 1), (2, 2), (3, 3)]);
        assert_eq!(consistent.kappa.as_ref().unwrap().kappa, 1.0);
        let a = emit_reversal_artifacts(&consistent);
        let mut rdr = csv::Reader::from_reader(a.scatter_csv.as_bytes());
        for rec in rdr.records() {
            let rec = rec.unwrap();
            assert_eq!(&rec[2], &rec[3]);
            assert_eq!(&rec[6], "false");
        }
    }

    #[test]
    fn scatter_flags_planted_flips() {
        let pairs: Vec<(u8, u8)> = (0..44).map(|i| if i < 6 { (4, 2) } else { (3, 3) }).collect();
        let a = emit_reversal_artifacts(&pair_report(&pairs));
        let flagged = a.scatter_csv.lines().filter(|l| l.ends_with(",true")).count();
        assert_eq!(flagged, 6);
        assert_eq!(a.scatter_csv.lines().count(), 45);
        assert!(a.scatter_svg.contains("stroke=\"red\""));
        let total: usize = a
            .histogram_csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, 44);
        assert_eq!(a.histogram_csv.lines().count(), 51);
    }

    #[test]
    fn alpha_table_asterisks_and_round_trip() {
        let a = AlphaResult {
            alpha: 0.8123456789012345,
            alpha_if_deleted: vec![
                ItemAlpha { item: "Q1".into(), alpha_if_deleted: Some(0.7) },
                ItemAlpha { item: "Q22".into(), alpha_if_deleted: Some(0.8312345678901234) },
            ],
            k_items: 2,
            n_respondents: 10,
        };
        let t = emit_alpha_table(&[(Trait::Agreeableness, a.clone())]);
        assert!(t.markdown.contains("| Q22 | 0.831* |"));
        assert!(t.markdown.contains("| Q1 | 0.700 |"));
        let mut rdr = csv::Reader::from_reader(t.csv.as_bytes());
        let recs: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
        assert_eq!(recs[0][1].parse::<f64>().unwrap(), a.alpha);
        assert_eq!(recs[1][3].parse::<f64>().unwrap(), 0.8312345678901234);
        assert_eq!(&recs[1][4], "true");

        let low = AlphaResult {
            alpha_if_deleted: vec![ItemAlpha { item: "Q1".into(), alpha_if_deleted: Some(0.5) }],
            ..a
        };
        assert!(!emit_alpha_table(&[(Trait::Openness, low)]).markdown.contains('*'));
    }

    fn pca_with(rotated: DMatrix<f64>, items: &[&str]) -> PcaResult {
        PcaResult {
            items: items.iter().map(|s| s.to_string()).collect(),
            eigenvalues: vec![],
            loadings: rotated.clone(),
            rotated_loadings: Some(rotated.clone()),
            kmo: None,
            bartlett: None,
            kaiser_count: 0,
            elbow_count: None,
            retained_k: rotated.ncols(),
            n_respondents: 0,
        }
    }

    #[test]
    fn loading_table_order_and_flags() {
        let rotated = DMatrix::from_row_slice(3, 2, &[0.1, 0.372, 0.866, 0.2, 0.5, 0.45]);
        let p = pca_with(rotated, &["Q22", "Q25", "Q7"]);
        let assignment = ComponentAssignment {
            labels: vec![Some(Trait::Extraversion), None],
            salient_counts: vec![BTreeMap::new(), BTreeMap::new()],
            flagged: vec![],
        };
        let t = emit_loading_table(&p, &assignment).unwrap();
        let items: Vec<&str> = t.csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(items, ["Q25", "Q7", "Q22"]);
        assert!(t.markdown.contains("**0.866**"));
        assert!(t.markdown.contains(" 0.372 |"));
        assert!(t.markdown.contains("Component 1 (Extraversion)"));
        let empty = pca_with(DMatrix::zeros(0, 2), &[]);
        assert_eq!(emit_loading_table(&empty, &assignment), Err(ReportError::EmptyModel));
    }

    #[test]
    fn ridgeline_rows() {
        let scores: Vec<MeasuredScore> = (0..10)
            .map(|p| MeasuredScore {
                model: "m".into(),
                trait_: Trait::Neuroticism,
                level: 3,
                persona_index: 9 - p,
                score: 1.0 + p as f64 * 0.4,
            })
            .collect();
        let report = MeasurementReport::assemble(&scores);
        let csv = emit_measurement_ridgeline(&report);
        assert_eq!(csv.lines().count(), 11);
        assert_eq!(report.cell("m", Trait::Neuroticism, 3).unwrap().scores[0], 1.0 + 9.0 * 0.4);
        assert_eq!(
            emit_measurement_ridgeline(&MeasurementReport { cells: vec![] }),
            "model,trait,level,persona,score\n"
        );
    }

    #[test]
    fn emission_is_byte_identical() {
        let r = pair_report(&[(1, 2), (3, 3), (5, 4)]);
        assert_eq!(emit_reversal_artifacts(&r), emit_reversal_artifacts(&r.clone()));
        assert!(scree_svg(&[3.0, 1.2, 0.5]).starts_with("<svg"));
    }
}
