//! Network-facing raters: the decoder prompt rater and the NLI zero-shot rater.

use serde_json::json;
use traitlens_core::inventory::{render_rater_prompt, render_zsc_hypotheses, InventoryItem, Orientation};
use traitlens_core::rater::{
    decoder_rater_id, parse_decoder_rating, zsc_decision, zsc_rater_id, RaterError, RatingRecord,
};

use crate::config::EndpointConfig;
use crate::error::Result;
use crate::gateway::Gateway;
use crate::store::{content_hash, RecordBody};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RaterKind {
    #[default]
    Decoder,
    Zsc,
}

impl std::str::FromStr for RaterKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "decoder" => Ok(RaterKind::Decoder),
            "zsc" => Ok(RaterKind::Zsc),
            other => Err(format!("unknown rater {other:?} (expected decoder or zsc)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rater {
    pub kind: RaterKind,
    pub cfg: EndpointConfig,
}

impl Rater {
    pub fn decoder(cfg: EndpointConfig) -> Self {
        Rater {
            kind: RaterKind::Decoder,
            cfg,
        }
    }

    pub fn zsc(cfg: EndpointConfig) -> Self {
        Rater { kind: RaterKind::Zsc, cfg }
    }

    pub fn id(&self) -> String {
        match self.kind {
            RaterKind::Decoder => decoder_rater_id(&self.cfg.model_id),
            RaterKind::Zsc => zsc_rater_id(&self.cfg.model_id),
        }
    }
}

/// What the rater said about one answer: the raw reply and, if usable, the record.
#[derive(Debug, Clone)]
pub struct RatingOutcome {
    pub reply: String,
    pub rating: std::result::Result<RatingRecord, RaterError>,
}

/// The answer being rated.
#[derive(Debug, Clone, Copy)]
pub struct Answer<'a> {
    pub item: &'a InventoryItem,
    pub text: &'a str,
    /// Request hash of the exchange that produced the answer.
    pub answer_ref: &'a str,
    pub respondent: Option<&'a str>,
}

fn persist_rating(gw: &Gateway, record: &RatingRecord) -> Result<()> {
    let Some(rec) = gw.recorder() else { return Ok(()) };
    let hash = content_hash(&json!({
        "kind": "rating",
        "rater": record.rater_id,
        "answer": record.raw_answer_ref,
        "orientation": record.orientation,
        "respondent": record.respondent,
    }));
    if !rec.store.run_has(&rec.run_id, &hash) {
        rec.store
            .append_record(&rec.run_id, &hash, RecordBody::Rating(record.clone()))?;
    }
    Ok(())
}

/// Rates one answer on its item's trait with the decoder prompt in the given scale order.
pub fn rate_with_decoder(
    gw: &Gateway,
    cfg: &EndpointConfig,
    answer: Answer<'_>,
    orientation: Orientation,
) -> Result<RatingOutcome> {
    let prompt = render_rater_prompt(answer.item.trait_, &answer.item.text, answer.text, orientation)?;
    let exchange = gw.chat_complete(cfg, prompt.system_text.as_deref(), &prompt.user_text)?;
    let rating = parse_decoder_rating(&exchange.response_text).map(|score| RatingRecord {
        item_id: answer.item.id,
        rater_id: decoder_rater_id(&cfg.model_id),
        score,
        orientation,
        raw_answer_ref: answer.answer_ref.to_string(),
        respondent: answer.respondent.map(str::to_string),
        distribution: None,
    });
    if let Ok(r) = &rating {
        persist_rating(gw, r)?;
    }
    Ok(RatingOutcome {
        reply: exchange.response_text,
        rating,
    })
}

/// Rates one answer by NLI entailment of each trait-label hypothesis, one request per label.
pub fn rate_with_zsc(gw: &Gateway, cfg: &EndpointConfig, answer: Answer<'_>) -> Result<RatingOutcome> {
    let mut entailments = [0.0; 5];
    for (slot, hypothesis) in entailments
        .iter_mut()
        .zip(render_zsc_hypotheses(answer.item.trait_))
    {
        *slot = gw.nli_score(cfg, answer.text, &hypothesis)?.entailment;
    }
    let rating = zsc_decision(&entailments).map(|score| RatingRecord {
        item_id: answer.item.id,
        rater_id: zsc_rater_id(&cfg.model_id),
        score,
        orientation: Orientation::Normal,
        raw_answer_ref: answer.answer_ref.to_string(),
        respondent: answer.respondent.map(str::to_string),
        distribution: Some(entailments),
    });
    if let Ok(r) = &rating {
        persist_rating(gw, r)?;
    }
    Ok(RatingOutcome {
        reply: format!("{entailments:?}"),
        rating,
    })
}

impl Rater {
    /// The zero-shot rater has no scale order, so `orientation` only applies to the decoder.
    pub fn rate(&self, gw: &Gateway, answer: Answer<'_>, orientation: Orientation) -> Result<RatingOutcome> {
        match self.kind {
            RaterKind::Decoder => rate_with_decoder(gw, &self.cfg, answer, orientation),
            RaterKind::Zsc => rate_with_zsc(gw, &self.cfg, answer),
        }
    }
}
