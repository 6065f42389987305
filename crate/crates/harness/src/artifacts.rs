//! Report files rebuilt from a run's statistics records. Experiments emit
//! through the same path, so a rebuild from the log reproduces them exactly.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use traitlens_core::inventory::Trait;
use traitlens_core::psychstats::{AlphaResult, ComponentAssignment, IccResult, KappaResult, PcaResult, ReductionResult};
use traitlens_core::report::{
    emit_alpha_table, emit_icc_bars, emit_loading_table, emit_matrix_csv, emit_measurement_ridgeline,
    emit_reversal_artifacts, emit_scree_csv, scree_svg, MeasurementReport, ReversalReport,
};
use traitlens_core::scoring::{ScoreMatrix, TraitProfile};
use nalgebra::DMatrix;

use crate::error::{HarnessError, Result};
use crate::store::{RecordBody, RunStore, StoredRecord};

/// Inter-rater agreement over an items x raters grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterRater {
    pub raters: Vec<String>,
    pub items: Vec<String>,
    /// Rater x rater Pearson correlations, row-major.
    pub correlation: Vec<Vec<f64>>,
    /// Labeled ICC results, e.g. all raters or one model rater with the humans.
    pub icc: Vec<(String, IccResult)>,
}

/// Per-rater trait scores from one administration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitScoreTable {
    pub item_set: String,
    pub profiles: Vec<(String, TraitProfile)>,
}

/// The last statistics record of each name in a run, in log order.
pub fn latest_stats(records: &[StoredRecord]) -> BTreeMap<String, Value> {
    let mut out = BTreeMap::new();
    for r in records {
        if let RecordBody::Stats(s) = &r.body {
            out.insert(s.name.clone(), s.value.clone());
        }
    }
    out
}

fn decode<T: for<'de> Deserialize<'de>>(name: &str, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| HarnessError::Store(format!("stored {name} is unreadable: {e}")))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data") + "\n"
}

/// (file name, contents) pairs for every report the stored statistics support.
pub fn render_reports(stats: &BTreeMap<String, Value>) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    for name in ["keyword_reversal", "rater_reversal", "self_report_reversal"] {
        if let Some(v) = stats.get(name) {
            let report: ReversalReport = decode(name, v)?;
            let a = emit_reversal_artifacts(&report);
            files.push((format!("{name}.json"), pretty(&report)));
            files.push((format!("{name}_scatter.csv"), a.scatter_csv));
            files.push((format!("{name}_scatter.svg"), a.scatter_svg));
            if report.similarity.is_some() {
                files.push((format!("{name}_similarity_histogram.csv"), a.histogram_csv));
                files.push((format!("{name}_similarity_box.json"), a.box_stats_json + "\n"));
            }
        }
    }
    if let Some(v) = stats.get("measurement") {
        let report: MeasurementReport = decode("measurement", v)?;
        files.push(("measurement.json".into(), pretty(&report)));
        files.push(("ridgeline.csv".into(), emit_measurement_ridgeline(&report)));
    }
    if let Some(v) = stats.get("matrix") {
        let m: ScoreMatrix = decode("matrix", v)?;
        files.push(("score_matrix.csv".into(), m.to_csv()));
    }
    let alphas: Vec<(Trait, AlphaResult)> = Trait::ALL
        .iter()
        .filter_map(|t| stats.get(&format!("alpha:{t}")).map(|v| (*t, v)))
        .map(|(t, v)| Ok((t, decode("alpha", v)?)))
        .collect::<Result<_>>()?;
    if !alphas.is_empty() {
        let table = emit_alpha_table(&alphas);
        files.push(("alpha_table.csv".into(), table.csv));
        files.push(("alpha_table.md".into(), table.markdown));
    }
    if let Some(v) = stats.get("pca") {
        let p: PcaResult = decode("pca", v)?;
        files.push(("pca.json".into(), pretty(&p)));
        files.push(("scree.csv".into(), emit_scree_csv(&p)));
        files.push(("scree.svg".into(), scree_svg(&p.eigenvalues)));
    }
    if let (Some(r), Some(a)) = (stats.get("reduction"), stats.get("assignment")) {
        let reduction: ReductionResult = decode("reduction", r)?;
        let assignment: ComponentAssignment = decode("assignment", a)?;
        let table = emit_loading_table(&reduction.final_pca, &assignment)?;
        files.push(("reduction.json".into(), pretty(&reduction)));
        files.push(("assignment.json".into(), pretty(&assignment)));
        files.push(("loading_table.csv".into(), table.csv));
        files.push(("loading_table.md".into(), table.markdown));
    }
    if let Some(v) = stats.get("kappa") {
        let k: BTreeMap<String, KappaResult> = decode("kappa", v)?;
        files.push(("kappa.json".into(), pretty(&k)));
    }
    if let Some(v) = stats.get("interrater") {
        let ir: InterRater = decode("interrater", v)?;
        let n = ir.raters.len();
        let m = DMatrix::from_fn(n, n, |i, j| ir.correlation[i][j]);
        files.push(("interrater.json".into(), pretty(&ir)));
        files.push(("rater_correlation.csv".into(), emit_matrix_csv(&ir.raters, &m)));
        files.push(("icc_bars.csv".into(), emit_icc_bars(&ir.icc)));
    }
    if let Some(v) = stats.get("trait_scores") {
        let t: TraitScoreTable = decode("trait_scores", v)?;
        files.push(("trait_scores.csv".into(), trait_scores_csv(&t)));
    }
    Ok(files)
}

fn trait_scores_csv(t: &TraitScoreTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rater", "trait", "mean", "items"]).expect("in-memory write");
    for (rater, profile) in &t.profiles {
        for s in &profile.scores {
            w.write_record([rater.clone(), s.trait_.name().to_string(), s.mean.to_string(), s.item_count.to_string()])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Rebuilds all reports of `run_id` from its log and writes them, returning the paths.
pub fn emit_run_reports(store: &RunStore, run_id: &str) -> Result<Vec<PathBuf>> {
    let records = store.run_records(run_id)?;
    render_reports(&latest_stats(&records))?
        .into_iter()
        .map(|(name, contents)| store.write_report(run_id, &name, &contents))
        .collect()
}
