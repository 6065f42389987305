//! Browser demo: builds persona/profile prompts, computes weighted kappa for
//! two pasted rating columns, and runs PCA, varimax and item reduction on a
//! synthetic planted-factor dataset. Every export returns a JSON string; failures
//! come back as `{"error": "..."}` so the page never has to catch exceptions.

use serde::Serialize;
use serde_json::json;
use traitlens_core::inventory::render_persona_profile_prompt;
use traitlens_core::psychstats::{
    assign_components_to_traits, iterative_item_reduction, pca, weighted_kappa, WeightScheme,
};
use traitlens_core::report::scree_svg;
use traitlens_core::synthetic::{planted_factor_data, FactorGroup, PlantedSpec};
use traitlens_core::Trait;
use wasm_bindgen::prelude::*;

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).expect("plain data"),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// The system prompt for one persona, trait and level (1-5).
#[wasm_bindgen]
pub fn profile_prompt(persona: &str, trait_name: &str, level: u8) -> String {
    respond((|| {
        let t: Trait = trait_name.parse().map_err(|e: traitlens_core::inventory::InventoryError| e.to_string())?;
        let p = render_persona_profile_prompt(persona, t, level).map_err(|e| e.to_string())?;
        Ok(json!({ "trait": t.name(), "level": level, "system": p.system_text }))
    })())
}

fn parse_scores(text: &str) -> Result<Vec<u8>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u8>().map_err(|_| format!("{s:?} is not a rating")))
        .collect()
}

/// Weighted kappa between two comma- or space-separated rating lists, plus the
/// 5x5 contingency table.
#[wasm_bindgen]
pub fn kappa_explore(x: &str, y: &str, quadratic: bool) -> String {
    respond((|| {
        let (x, y) = (parse_scores(x)?, parse_scores(y)?);
        let scheme = if quadratic { WeightScheme::Quadratic } else { WeightScheme::Linear };
        let k = weighted_kappa(&x, &y, scheme).map_err(|e| e.to_string())?;
        let mut table = [[0usize; 5]; 5];
        for (a, b) in x.iter().zip(&y) {
            table[usize::from(*a) - 1][usize::from(*b) - 1] += 1;
        }
        let disagreements = x.iter().zip(&y).filter(|(a, b)| a != b).count();
        Ok(json!({ "kappa": k, "table": table, "disagreements": disagreements }))
    })())
}

/// Planted-factor playground. `strengths` lists one loading per factor
/// (traits assigned in O, C, E, A, N order), each factor gets `items_per_factor`
/// items, and `noise_items` weak items load 0.2 on every factor.
#[wasm_bindgen]
pub fn factor_explore(seed: u32, strengths: &str, items_per_factor: u32, noise_items: u32, threshold: f64) -> String {
    respond((|| {
        let loadings: Vec<f64> = strengths
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| format!("{s:?} is not a loading")))
            .collect::<Result<_, _>>()?;
        if loadings.is_empty() || loadings.len() > 5 {
            return Err("give between one and five factor loadings".into());
        }
        if loadings.iter().any(|l| !(0.0..1.0).contains(l)) {
            return Err("loadings must lie in [0, 1)".into());
        }
        if !(2..=20).contains(&items_per_factor) || noise_items > 10 {
            return Err("use 2-20 items per factor and at most 10 noise items".into());
        }
        let spec = PlantedSpec {
            respondents: 250,
            groups: loadings
                .iter()
                .zip(Trait::ALL)
                .map(|(&loading, trait_)| FactorGroup {
                    trait_,
                    items: items_per_factor as usize,
                    loading,
                })
                .collect(),
            noise_items: noise_items as usize,
            noise_loading: 0.2,
            seed: u64::from(seed),
        };
        let data = planted_factor_data(&spec);
        let full = pca(&data.matrix).map_err(|e| e.to_string())?;
        let reduction = iterative_item_reduction(&data.matrix, full.retained_k, threshold).map_err(|e| e.to_string())?;
        let rotated = reduction.final_pca.rotated_loadings.clone().ok_or("no rotated loadings")?;
        let assignment = assign_components_to_traits(&rotated, &reduction.final_pca.items, &data.item_traits)
            .map_err(|e| e.to_string())?;
        Ok(json!({
            "eigenvalues": full.eigenvalues,
            "kaiser": full.kaiser_count,
            "elbow": full.elbow_count,
            "retained": full.retained_k,
            "noise_items": data.noise_items,
            "dropped": reduction.dropped(),
            "labels": assignment.labels,
            "scree_svg": scree_svg(&full.eigenvalues),
        }))
    })())
}
