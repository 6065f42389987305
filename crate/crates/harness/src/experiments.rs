//! Experiment drivers. Each one issues stateless calls through the gateway
//! (which records and caches them) and assembles its report from the replies.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use traitlens_core::inventory::{
    generate_study_prompts, load_inventory, render_administration_prompt, render_persona_profile_prompt,
    render_self_rating_prompt, InventoryItem, ItemId, Orientation, Trait,
};
use traitlens_core::psychstats::{
    cosine_similarity, cronbach_alpha, iterative_item_reduction, pca, assign_components_to_traits,
    AlphaResult, ComponentAssignment, PcaResult, ReductionResult, WeightScheme, SALIENT_LOADING,
};
use traitlens_core::rater::{extract_frequency_keyword, normalize_reversed, parse_self_rating, RatingRecord};
use traitlens_core::report::{
    ItemStatus, MeasuredScore, MeasurementReport, ReversalItem, ReversalKind, ReversalReport, ScoreOverride,
};
use traitlens_core::scoring::{build_score_matrix, respondent_matrix_by_trait, MatrixOrientation, ScoreMatrix};

use crate::config::EndpointConfig;
use crate::error::{HarnessError, Result};
use crate::gateway::Gateway;
use crate::rating::{Answer, Rater};
use crate::store::{ChatExchange, RecordBody, StoredRecord};

/// Runs `f` over `inputs` on at most `limit` threads and returns results in input order.
/// Stops handing out work after the first failure and returns the failure with the lowest index.
pub fn fan_out<T: Sync, R: Send>(
    limit: usize,
    inputs: &[T],
    f: impl Fn(&T) -> Result<R> + Sync,
) -> Result<Vec<R>> {
    let slots: Vec<Mutex<Option<Result<R>>>> = inputs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let workers = limit.max(1).min(inputs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failed.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(input) = inputs.get(i) else { break };
                let r = f(input);
                if r.is_err() {
                    failed.store(true, Ordering::SeqCst);
                }
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    let mut out = Vec::with_capacity(inputs.len());
    for slot in slots {
        match slot.into_inner().expect("slot lock") {
            Some(Ok(r)) => out.push(r),
            Some(Err(e)) => return Err(e),
            None => {
                return Err(HarnessError::Precondition(
                    "run stopped after an earlier failure; rerun to resume from the cache".into(),
                ))
            }
        }
    }
    Ok(out)
}

/// One item's answer from one administration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Administered {
    pub item: InventoryItem,
    pub orientation: Orientation,
    pub exchange: ChatExchange,
}

/// One stateless chat call per item; the optional system text carries a persona/profile.
pub fn administer(
    gw: &Gateway,
    cfg: &EndpointConfig,
    items: &[InventoryItem],
    variant: Orientation,
    system: Option<&str>,
) -> Result<Vec<Administered>> {
    fan_out(cfg.parallelism_limit, items, |item| {
        let prompt = render_administration_prompt(item, variant);
        let exchange = gw.chat_complete(cfg, system, &prompt.user_text)?;
        Ok(Administered {
            item: item.clone(),
            orientation: variant,
            exchange,
        })
    })
}

/// Recovers administered answers from stored chat records by matching their
/// user text against the rendered administration prompts. The first answer per
/// (item, order, system text) wins; output is ordered by item, then order.
pub fn answers_from_records(records: &[StoredRecord]) -> Vec<Administered> {
    let mut by_prompt: HashMap<String, (InventoryItem, Orientation)> = HashMap::new();
    for item in load_inventory() {
        for o in [Orientation::Normal, Orientation::Reversed] {
            by_prompt.insert(render_administration_prompt(&item, o).user_text, (item.clone(), o));
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut out: Vec<Administered> = records
        .iter()
        .filter_map(|r| match &r.body {
            RecordBody::Chat(x) => by_prompt.get(&x.user_text).map(|(item, o)| (item, *o, x)),
            _ => None,
        })
        .filter(|(item, o, x)| seen.insert((item.id, *o, x.system_text.clone())))
        .map(|(item, orientation, x)| Administered {
            item: item.clone(),
            orientation,
            exchange: x.clone(),
        })
        .collect();
    out.sort_by_key(|a| (a.item.id, a.orientation));
    out
}

/// Ratings stored in a run, in log order.
pub fn ratings_from_records(records: &[StoredRecord]) -> Vec<RatingRecord> {
    records
        .iter()
        .filter_map(|r| match &r.body {
            RecordBody::Rating(x) => Some(x.clone()),
            _ => None,
        })
        .collect()
}

fn persist_stats(gw: &Gateway, name: &str, value: serde_json::Value) -> Result<()> {
    match gw.recorder() {
        Some(rec) => rec.store.record_stats(&rec.run_id, name, value),
        None => Ok(()),
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Keyword-order reversal: the same items with the frequency list in both
/// orders. Keyword scores are compared directly (the keywords keep their meaning).
pub fn keyword_reversal_experiment(
    gw: &Gateway,
    model: &EndpointConfig,
    embedder: Option<&EndpointConfig>,
    items: &[InventoryItem],
    overrides: &[ScoreOverride],
    scheme: WeightScheme,
) -> Result<ReversalReport> {
    let normal = administer(gw, model, items, Orientation::Normal, None)?;
    let reversed = administer(gw, model, items, Orientation::Reversed, None)?;
    let similarities: Vec<Option<f64>> = match embedder {
        Some(e) => fan_out(e.parallelism_limit, &normal.iter().zip(&reversed).collect::<Vec<_>>(), |(n, r)| {
            let (a, b) = (&n.exchange.response_text, &r.exchange.response_text);
            if a.trim().is_empty() || b.trim().is_empty() {
                return Ok(None);
            }
            Ok(Some(cosine_similarity(&gw.embed(e, a)?, &gw.embed(e, b)?)?))
        })?,
        None => vec![None; items.len()],
    };
    let report_items = normal
        .iter()
        .zip(&reversed)
        .zip(similarities)
        .map(|((n, r), similarity)| {
            let nk = extract_frequency_keyword(&n.exchange.response_text).primary.map(|h| h.keyword);
            let rk = extract_frequency_keyword(&r.exchange.response_text).primary.map(|h| h.keyword);
            let mut item = ReversalItem::new(
                n.item.id,
                n.item.trait_,
                nk.map(|k| k.score()),
                rk.map(|k| k.score()),
                n.exchange.response_text.clone(),
                r.exchange.response_text.clone(),
                ItemStatus::Unkeyed,
                overrides,
            );
            item.normal_keyword = nk;
            item.reversed_keyword = rk;
            item.similarity = similarity;
            item
        })
        .collect();
    let report = ReversalReport::assemble(
        ReversalKind::KeywordOrder,
        model.model_id.clone(),
        None,
        report_items,
        scheme,
    );
    persist_stats(gw, "keyword_reversal", to_value(&report))?;
    Ok(report)
}

/// Rater-scale reversal: every answer rated under both scale orders, reversed
/// ratings mapped back with 6 - x (by the rating record's orientation tag).
pub fn rater_reversal_experiment(
    gw: &Gateway,
    rater: &EndpointConfig,
    answers: &[Administered],
    scheme: WeightScheme,
) -> Result<ReversalReport> {
    let rater = Rater::decoder(rater.clone());
    let outcomes = fan_out(rater.cfg.parallelism_limit, answers, |a| {
        let answer = Answer {
            item: &a.item,
            text: &a.exchange.response_text,
            answer_ref: &a.exchange.request_hash,
            respondent: None,
        };
        Ok((
            rater.rate(gw, answer, Orientation::Normal)?,
            rater.rate(gw, answer, Orientation::Reversed)?,
        ))
    })?;
    let items = answers
        .iter()
        .zip(outcomes)
        .map(|(a, (n, r))| {
            ReversalItem::new(
                a.item.id,
                a.item.trait_,
                n.rating.as_ref().ok().map(RatingRecord::normalized_score),
                r.rating.as_ref().ok().map(RatingRecord::normalized_score),
                n.reply,
                r.reply,
                ItemStatus::Unparseable,
                &[],
            )
        })
        .collect();
    let model = answers.first().map_or_else(String::new, |a| a.exchange.model_id.clone());
    let report = ReversalReport::assemble(ReversalKind::RaterScale, model, Some(rater.id()), items, scheme);
    persist_stats(gw, "rater_reversal", to_value(&report))?;
    Ok(report)
}

/// Numeric self-report on the original statements under both scale orders.
/// Traits come from the adapted item with the same number.
pub fn self_report_reversal_baseline(
    gw: &Gateway,
    model: &EndpointConfig,
    statements: &[(ItemId, String)],
    scheme: WeightScheme,
) -> Result<ReversalReport> {
    let bank: BTreeMap<ItemId, Trait> = load_inventory().into_iter().map(|i| (i.id, i.trait_)).collect();
    let replies = fan_out(model.parallelism_limit, statements, |(_, text)| {
        let n = render_self_rating_prompt(text, Orientation::Normal)?;
        let r = render_self_rating_prompt(text, Orientation::Reversed)?;
        Ok((
            gw.chat_complete(model, None, &n.user_text)?.response_text,
            gw.chat_complete(model, None, &r.user_text)?.response_text,
        ))
    })?;
    let items = statements
        .iter()
        .zip(replies)
        .map(|((id, _), (n, r))| {
            let normal = parse_self_rating(&n).ok();
            let reversed = parse_self_rating(&r).ok().and_then(|s| normalize_reversed(i64::from(s)).ok());
            ReversalItem::new(*id, bank[id], normal, reversed, n, r, ItemStatus::Unparseable, &[])
        })
        .collect();
    let report = ReversalReport::assemble(ReversalKind::SelfReport, model.model_id.clone(), None, items, scheme);
    persist_stats(gw, "self_report_reversal", to_value(&report))?;
    Ok(report)
}

/// Everything the reliability and validity study produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOutput {
    pub respondents: usize,
    pub ratings: Vec<RatingRecord>,
    pub stats: StudyStats,
}

/// Reliability and factor statistics over a respondents x items grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyStats {
    pub matrix: ScoreMatrix,
    pub alphas: Vec<(Trait, AlphaResult)>,
    /// Unrotated PCA of the full grid; `retained_k` is the retention decision.
    pub pca: PcaResult,
    pub reduction: ReductionResult,
    pub assignment: ComponentAssignment,
}

/// Builds the respondents x items grid from ratings that carry respondent
/// labels, then runs alpha per trait, PCA with retention, item reduction at
/// 0.40, and component labeling.
pub fn analyze_study(ratings: &[RatingRecord], items: &[InventoryItem]) -> Result<StudyStats> {
    let wanted: std::collections::BTreeSet<ItemId> = items.iter().map(|i| i.id).collect();
    let ratings: Vec<RatingRecord> = ratings.iter().filter(|r| wanted.contains(&r.item_id)).cloned().collect();
    let matrix = build_score_matrix(&ratings, MatrixOrientation::RespondentsByItems)?;
    if matrix.ncols() != wanted.len() {
        return Err(HarnessError::Precondition(format!(
            "grid has {} of {} items; every item needs ratings",
            matrix.ncols(),
            wanted.len()
        )));
    }
    let alphas = Trait::ALL
        .iter()
        .filter(|t| items.iter().any(|i| i.trait_ == **t))
        .map(|&t| Ok((t, cronbach_alpha(&respondent_matrix_by_trait(&ratings, items, t)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let full = pca(&matrix)?;
    let reduction = iterative_item_reduction(&matrix, full.retained_k, SALIENT_LOADING)?;
    let item_traits: BTreeMap<String, Trait> = items.iter().map(|i| (i.id.to_string(), i.trait_)).collect();
    let rotated = reduction
        .final_pca
        .rotated_loadings
        .as_ref()
        .ok_or_else(|| HarnessError::Precondition("reduction left no rotated loadings".into()))?;
    let assignment = assign_components_to_traits(rotated, &reduction.final_pca.items, &item_traits)?;
    Ok(StudyStats {
        matrix,
        alphas,
        pca: full,
        reduction,
        assignment,
    })
}

fn persist_study_stats(gw: &Gateway, stats: &StudyStats) -> Result<()> {
    persist_stats(gw, "matrix", to_value(&stats.matrix))?;
    for (t, a) in &stats.alphas {
        persist_stats(gw, &format!("alpha:{t}"), to_value(a))?;
    }
    persist_stats(gw, "pca", to_value(&stats.pca))?;
    persist_stats(gw, "reduction", to_value(&stats.reduction))?;
    persist_stats(gw, "assignment", to_value(&stats.assignment))
}

pub fn respondent_label(index: usize) -> String {
    format!("R{:03}", index + 1)
}

/// Persona x trait x level respondents, each answering every item, each answer
/// rated once on its own item's trait in the normal scale order.
pub fn reliability_validity_study(
    gw: &Gateway,
    testee: &EndpointConfig,
    rater: &Rater,
    personas: &[String],
    items: &[InventoryItem],
) -> Result<StudyOutput> {
    let prompts = generate_study_prompts(personas, &Trait::ALL, &[1, 2, 3, 4, 5])?;
    let tasks: Vec<(usize, &str, &InventoryItem)> = prompts
        .iter()
        .enumerate()
        .flat_map(|(r, p)| {
            let system = p.system_text.as_deref().unwrap_or_default();
            items.iter().map(move |item| (r, system, item))
        })
        .collect();
    let limit = testee.parallelism_limit.min(rater.cfg.parallelism_limit);
    let outcomes = fan_out(limit, &tasks, |(r, system, item)| {
        let prompt = render_administration_prompt(item, Orientation::Normal);
        let x = gw.chat_complete(testee, Some(system), &prompt.user_text)?;
        let label = respondent_label(*r);
        let answer = Answer {
            item,
            text: &x.response_text,
            answer_ref: &x.request_hash,
            respondent: Some(&label),
        };
        rater.rate(gw, answer, Orientation::Normal)
    })?;
    let mut ratings = Vec::with_capacity(outcomes.len());
    let mut unparseable = Vec::new();
    for ((r, _, item), o) in tasks.iter().zip(outcomes) {
        match o.rating {
            Ok(rec) => ratings.push(rec),
            Err(_) => unparseable.push(format!("{}/{}", respondent_label(*r), item.id)),
        }
    }
    if !unparseable.is_empty() {
        return Err(HarnessError::Precondition(format!(
            "{} of {} ratings unparseable ({}); the grid is incomplete",
            unparseable.len(),
            tasks.len(),
            unparseable.iter().take(5).cloned().collect::<Vec<_>>().join(", ")
        )));
    }
    let stats = analyze_study(&ratings, items)?;
    persist_study_stats(gw, &stats)?;
    Ok(StudyOutput {
        respondents: prompts.len(),
        ratings,
        stats,
    })
}

/// One testee model and the personas it is paired with.
#[derive(Debug, Clone)]
pub struct Testee {
    pub cfg: EndpointConfig,
    pub personas: Vec<String>,
}

/// For each testee, persona, trait and level: answer the trait's items under the
/// persona/profile prompt, rate them, and average into the measured trait score.
pub fn personality_measurement_test(
    gw: &Gateway,
    testees: &[Testee],
    rater: &Rater,
    items: &[InventoryItem],
    traits: &[Trait],
) -> Result<MeasurementReport> {
    if testees.is_empty() {
        return Err(HarnessError::Precondition("at least one testee model is required".into()));
    }
    struct Task<'a> {
        testee: &'a Testee,
        persona: usize,
        trait_: Trait,
        level: u8,
        system: String,
        item: &'a InventoryItem,
    }
    let mut tasks = Vec::new();
    for testee in testees {
        for (persona, text) in testee.personas.iter().enumerate() {
            for &trait_ in traits {
                for level in 1..=5u8 {
                    let system = render_persona_profile_prompt(text, trait_, level)?
                        .system_text
                        .expect("profile prompts are system text");
                    for item in items.iter().filter(|i| i.trait_ == trait_) {
                        tasks.push(Task {
                            testee,
                            persona,
                            trait_,
                            level,
                            system: system.clone(),
                            item,
                        });
                    }
                }
            }
        }
    }
    let limit = testees.iter().map(|t| t.cfg.parallelism_limit).min().unwrap_or(1);
    let outcomes = fan_out(limit.min(rater.cfg.parallelism_limit), &tasks, |t| {
        let prompt = render_administration_prompt(t.item, Orientation::Normal);
        let x = gw.chat_complete(&t.testee.cfg, Some(&t.system), &prompt.user_text)?;
        let answer = Answer {
            item: t.item,
            text: &x.response_text,
            answer_ref: &x.request_hash,
            respondent: None,
        };
        rater.rate(gw, answer, Orientation::Normal)
    })?;
    let mut cells: BTreeMap<(String, usize, Trait, u8), Vec<f64>> = BTreeMap::new();
    for (t, o) in tasks.iter().zip(outcomes) {
        let key = (t.testee.cfg.model_id.clone(), t.persona, t.trait_, t.level);
        let entry = cells.entry(key).or_default();
        match o.rating {
            Ok(r) => entry.push(f64::from(r.normalized_score())),
            Err(e) => log::warn!("{} {} skipped: {e}", t.testee.cfg.model_id, t.item.id),
        }
    }
    let mut scores = Vec::with_capacity(cells.len());
    for ((model, persona_index, trait_, level), values) in cells {
        if values.is_empty() {
            return Err(HarnessError::Precondition(format!(
                "{model}: no usable ratings for persona {persona_index}, {trait_} level {level}"
            )));
        }
        scores.push(MeasuredScore {
            model,
            trait_,
            level,
            persona_index,
            score: values.iter().sum::<f64>() / values.len() as f64,
        });
    }
    let report = MeasurementReport::assemble(&scores);
    persist_stats(gw, "measurement", to_value(&report))?;
    Ok(report)
}
