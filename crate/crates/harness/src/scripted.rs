//! Mock models that read the actual prompt formats: testees that answer with
//! planned frequency keywords, raters that read those keywords back, and a
//! self-reporter for the numeric baseline.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use traitlens_core::inventory::{
    load_inventory, personality_profile, FrequencyKeyword, InventoryItem, ItemId, Orientation,
    RenderedPrompt, Trait,
};
use traitlens_core::rater::extract_frequency_keyword;
use traitlens_core::synthetic::sample_from_loadings;

use crate::mock::{MockBehavior, MockFault, NliTriple};

fn fnv(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn between<'a>(text: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let from = text.find(start)? + start.len();
    let rest = &text[from..];
    Some(match rest.find(end) {
        Some(to) => &rest[..to],
        None => rest,
    })
}

/// Item and keyword order of an administration prompt.
pub fn parse_administration(user: &str) -> Option<(InventoryItem, Orientation)> {
    let statement = between(user, "Statement:", "\nAnswer:")?.trim();
    let item = load_inventory().into_iter().find(|i| i.text == statement)?;
    let orientation = if user.contains("(always, often, sometimes, rarely, never)") {
        Orientation::Normal
    } else if user.contains("(never, rarely, sometimes, often, always)") {
        Orientation::Reversed
    } else {
        return None;
    };
    Some((item, orientation))
}

pub struct RaterRequest {
    pub trait_: Trait,
    pub orientation: Orientation,
    pub question: String,
    pub answer: String,
}

pub fn parse_rater(system: &str, user: &str) -> Option<RaterRequest> {
    let name = between(system, "pertains to the trait of ", ".")?;
    let trait_: Trait = name.parse().ok()?;
    let positive = trait_.label_set().positive_trait;
    let orientation = if system.contains(&format!("- 5. Very {positive}\n")) {
        Orientation::Normal
    } else {
        Orientation::Reversed
    };
    Some(RaterRequest {
        trait_,
        orientation,
        question: between(user, "Question: ", "\nAnswer: ")?.to_string(),
        answer: between(user, "\nAnswer: ", "\u{0}")?.to_string(),
    })
}

/// Trait and level of a persona/profile system prompt.
pub fn parse_persona(system: &str) -> Option<(Trait, u8)> {
    Trait::ALL.iter().find_map(|&t| {
        (1..=5u8).find_map(|level| {
            let profile = personality_profile(t, level).ok()?;
            system.ends_with(&format!(" I'm {profile}.")).then_some((t, level))
        })
    })
}

/// One sentence answering an item with the given keyword.
pub fn keyword_answer(keyword: FrequencyKeyword, item: &InventoryItem) -> String {
    let body = item
        .text
        .trim_end_matches('?')
        .trim_start_matches("To what extent do you ")
        .trim_start_matches("How often do you ");
    let body = body.strip_prefix("To what extent are you ").map_or(body.to_string(), |b| format!("am {b}"));
    format!("I {} {}.", keyword.word(), body)
}

fn keyword_for(score: u8) -> FrequencyKeyword {
    FrequencyKeyword::from_score(score.clamp(1, 5)).expect("clamped to 1..=5")
}

/// A deterministic, different score used for planted disagreements.
pub fn planted_flip(score: u8) -> u8 {
    if score >= 3 {
        score - 2
    } else {
        score + 2
    }
}

/// Baseline keyword plan spreading items over all five scores.
pub fn default_item_plan() -> BTreeMap<ItemId, u8> {
    load_inventory()
        .iter()
        .map(|i| (i.id, (fnv(&i.id.to_string()) % 5) as u8 + 1))
        .collect()
}

/// Answers administration prompts with a planned keyword per item, optionally
/// different under the reversed keyword order.
#[derive(Debug, Clone, Default)]
pub struct KeywordTestee {
    pub normal: BTreeMap<ItemId, u8>,
    pub reversed: BTreeMap<ItemId, u8>,
    pub texts: BTreeMap<(ItemId, Orientation), String>,
}

impl KeywordTestee {
    /// Same keyword under both orders for every item.
    pub fn consistent() -> Self {
        let plan = default_item_plan();
        KeywordTestee {
            normal: plan.clone(),
            reversed: plan,
            texts: BTreeMap::new(),
        }
    }

    /// Changes the reversed-order keyword of each listed item.
    pub fn with_flips(mut self, items: &[ItemId]) -> Self {
        for id in items {
            let s = self.normal[id];
            self.reversed.insert(*id, planted_flip(s));
        }
        self
    }

    /// Sets a verbatim answer (which should contain the keyword for `score`).
    pub fn with_answer(mut self, id: ItemId, orientation: Orientation, score: u8, text: &str) -> Self {
        match orientation {
            Orientation::Normal => self.normal.insert(id, score),
            Orientation::Reversed => self.reversed.insert(id, score),
        };
        self.texts.insert((id, orientation), text.to_string());
        self
    }
}

impl MockBehavior for KeywordTestee {
    fn chat(&self, _: &str, _: Option<&str>, user: &str) -> Result<String, MockFault> {
        let Some((item, orientation)) = parse_administration(user) else {
            return Ok("I am not sure how to answer that.".into());
        };
        if let Some(text) = self.texts.get(&(item.id, orientation)) {
            return Ok(text.clone());
        }
        let plan = match orientation {
            Orientation::Normal => &self.normal,
            Orientation::Reversed => &self.reversed,
        };
        let score = plan.get(&item.id).copied().unwrap_or(3);
        Ok(keyword_answer(keyword_for(score), &item))
    }
}

/// Reads the answer's first frequency keyword and reports it on the requested
/// scale order. Listed items get a different score under the reversed scale.
#[derive(Debug, Clone, Default)]
pub struct KeywordRater {
    /// Score (on the normal scale) the rater implies for these items when the scale is reversed.
    pub reversed_overrides: BTreeMap<ItemId, u8>,
}

impl KeywordRater {
    pub fn with_flips(items: &[ItemId], plan: &BTreeMap<ItemId, u8>) -> Self {
        KeywordRater {
            reversed_overrides: items.iter().map(|id| (*id, planted_flip(plan[id]))).collect(),
        }
    }

    pub fn score(&self, req: &RaterRequest) -> Option<u8> {
        let base = extract_frequency_keyword(&req.answer).score()?;
        let item = load_inventory().into_iter().find(|i| i.text == req.question);
        Some(match (req.orientation, item) {
            (Orientation::Reversed, Some(i)) => self.reversed_overrides.get(&i.id).copied().unwrap_or(base),
            _ => base,
        })
    }
}

impl MockBehavior for KeywordRater {
    fn chat(&self, _: &str, system: Option<&str>, user: &str) -> Result<String, MockFault> {
        let Some(req) = parse_rater(system.unwrap_or(""), user) else {
            return Ok("Please provide the rating instructions.".into());
        };
        Ok(match self.score(&req) {
            Some(s) => match req.orientation {
                Orientation::Normal => s.to_string(),
                Orientation::Reversed => (6 - s).to_string(),
            },
            None => "I cannot determine a rating from this answer.".into(),
        })
    }

    /// Entailment concentrates on the label matching the answer's keyword.
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliTriple, MockFault> {
        let spread = NliTriple {
            entailment: 0.05,
            contradiction: 0.8,
            neutral: 0.15,
        };
        let Some(score) = extract_frequency_keyword(premise).score() else {
            return Ok(spread);
        };
        let position = Trait::ALL.iter().find_map(|t| {
            traitlens_core::inventory::render_zsc_hypotheses(*t)
                .iter()
                .position(|h| h == hypothesis)
        });
        Ok(match position {
            Some(p) if 5 - p as u8 == score => NliTriple {
                entailment: 0.9,
                contradiction: 0.05,
                neutral: 0.05,
            },
            _ => spread,
        })
    }
}

/// Combines a testee and a rater behind one endpoint, routing by prompt shape.
pub struct TesteeAndRater<T, R> {
    pub testee: T,
    pub rater: R,
}

impl<T: MockBehavior, R: MockBehavior> MockBehavior for TesteeAndRater<T, R> {
    fn chat(&self, model: &str, system: Option<&str>, user: &str) -> Result<String, MockFault> {
        if user.starts_with("Question: ") {
            self.rater.chat(model, system, user)
        } else {
            self.testee.chat(model, system, user)
        }
    }

    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliTriple, MockFault> {
        self.rater.nli(premise, hypothesis)
    }
}

/// Answers the numeric self-report prompt with a planned score per statement.
#[derive(Debug, Clone, Default)]
pub struct SelfReporter {
    pub flipped: BTreeSet<String>,
}

impl SelfReporter {
    pub fn planned(statement: &str) -> u8 {
        (fnv(statement.trim()) % 5) as u8 + 1
    }
}

impl MockBehavior for SelfReporter {
    fn chat(&self, _: &str, _: Option<&str>, user: &str) -> Result<String, MockFault> {
        let Some(statement) = between(user, "Statement: ", "\n\nResponse:") else {
            return Ok("Please provide a statement.".into());
        };
        let statement = statement.trim();
        let mut s = Self::planned(statement);
        let reversed = user.contains("1 = Very much like me");
        if reversed {
            if self.flipped.contains(statement) {
                s = planted_flip(s);
            }
            s = 6 - s;
        }
        Ok(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PersonaMode {
    /// Every answer carries the keyword for the prompted level.
    Obey,
    /// Prompted level plus a deterministic offset in {-1, 0, 1}, clamped to 1..=5.
    OrderedNoise,
}

/// Testee that follows the level in its persona/profile system prompt.
#[derive(Debug, Clone)]
pub struct PersonaTestee {
    pub mode: PersonaMode,
}

impl MockBehavior for PersonaTestee {
    fn chat(&self, _: &str, system: Option<&str>, user: &str) -> Result<String, MockFault> {
        let Some((item, _)) = parse_administration(user) else {
            return Ok("I am not sure how to answer that.".into());
        };
        let level = system.and_then(parse_persona).map_or(3, |(_, l)| l);
        let score = match self.mode {
            PersonaMode::Obey => level,
            PersonaMode::OrderedNoise => {
                let offset = (fnv(&format!("{}\u{1}{user}", system.unwrap_or(""))) % 3) as i16 - 1;
                (i16::from(level) + offset).clamp(1, 5) as u8
            }
        };
        Ok(keyword_answer(keyword_for(score), &item))
    }
}

/// Maps a standardized score onto 1..=5.
pub fn likert(z: f64) -> u8 {
    (3.0 + 1.25 * z).round().clamp(1.0, 5.0) as u8
}

/// Study testee whose answers across the 250 respondents follow a planted
/// factor structure: each listed trait gets its own factor, and each extra
/// `(trait, host, loading)` entry makes that trait's items load on the host trait's factor.
pub struct PlantedStudyTestee {
    rows: HashMap<String, usize>,
    scores: DMatrix<u8>,
    columns: HashMap<ItemId, usize>,
}

impl PlantedStudyTestee {
    pub fn new(
        prompts: &[RenderedPrompt],
        items: &[InventoryItem],
        factors: &[(Trait, f64)],
        riders: &[(Trait, Trait, f64)],
        seed: u64,
    ) -> Self {
        let mut loadings = DMatrix::<f64>::zeros(items.len(), factors.len());
        for (j, item) in items.iter().enumerate() {
            if let Some(f) = factors.iter().position(|(t, _)| *t == item.trait_) {
                loadings[(j, f)] = factors[f].1;
            } else if let Some((_, host, l)) = riders.iter().find(|(t, _, _)| *t == item.trait_) {
                if let Some(f) = factors.iter().position(|(t, _)| t == host) {
                    loadings[(j, f)] = *l;
                }
            }
        }
        let z = sample_from_loadings(&loadings, prompts.len(), seed);
        PlantedStudyTestee {
            rows: prompts
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.system_text.clone().map(|s| (s, i)))
                .collect(),
            scores: z.map(likert),
            columns: items.iter().enumerate().map(|(j, i)| (i.id, j)).collect(),
        }
    }

    pub fn planned_scores(&self) -> &DMatrix<u8> {
        &self.scores
    }
}

impl MockBehavior for PlantedStudyTestee {
    fn chat(&self, _: &str, system: Option<&str>, user: &str) -> Result<String, MockFault> {
        let Some((item, _)) = parse_administration(user) else {
            return Ok("I am not sure how to answer that.".into());
        };
        let row = system.and_then(|s| self.rows.get(s)).copied();
        let col = self.columns.get(&item.id).copied();
        let score = match (row, col) {
            (Some(r), Some(c)) => self.scores[(r, c)],
            _ => 3,
        };
        Ok(keyword_answer(keyword_for(score), &item))
    }
}

/// Handles every prompt shape the harness sends: persona prompts get an
/// obedient testee, bare administration prompts a consistent keyword testee,
/// rater prompts and NLI the keyword rater, self-report prompts the self-reporter.
#[derive(Debug, Clone)]
pub struct DefaultMock {
    pub testee: KeywordTestee,
    pub rater: KeywordRater,
    pub persona: PersonaTestee,
    pub self_reporter: SelfReporter,
}

impl Default for DefaultMock {
    fn default() -> Self {
        DefaultMock {
            testee: KeywordTestee::consistent(),
            rater: KeywordRater::default(),
            persona: PersonaTestee { mode: PersonaMode::Obey },
            self_reporter: SelfReporter::default(),
        }
    }
}

impl MockBehavior for DefaultMock {
    fn chat(&self, model: &str, system: Option<&str>, user: &str) -> Result<String, MockFault> {
        if user.starts_with("Question: ") {
            self.rater.chat(model, system, user)
        } else if user.ends_with("\n\nResponse:") {
            self.self_reporter.chat(model, system, user)
        } else if system.and_then(parse_persona).is_some() {
            self.persona.chat(model, system, user)
        } else {
            self.testee.chat(model, system, user)
        }
    }

    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliTriple, MockFault> {
        self.rater.nli(premise, hypothesis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use traitlens_core::inventory::{
        find_item, render_administration_prompt, render_persona_profile_prompt, render_rater_prompt,
        render_self_rating_prompt,
    };

    #[test]
    fn parses_real_prompts() {
        let item = find_item(ItemId::new(25).unwrap());
        let p = render_administration_prompt(&item, Orientation::Reversed);
        let (parsed, o) = parse_administration(&p.user_text).unwrap();
        assert_eq!(parsed.id, item.id);
        assert_eq!(o, Orientation::Reversed);

        let r = render_rater_prompt(Trait::Neuroticism, &item.text, "I often do.", Orientation::Reversed).unwrap();
        let req = parse_rater(r.system_text.as_deref().unwrap(), &r.user_text).unwrap();
        assert_eq!(req.trait_, Trait::Neuroticism);
        assert_eq!(req.orientation, Orientation::Reversed);
        assert_eq!(req.question, item.text);
        assert_eq!(req.answer, "I often do.");

        let s = render_persona_profile_prompt("A retired teacher.", Trait::Agreeableness, 4).unwrap();
        assert_eq!(parse_persona(s.system_text.as_deref().unwrap()), Some((Trait::Agreeableness, 4)));
    }

    #[test]
    fn rater_reads_keywords_on_both_scales() {
        let item = find_item(ItemId::new(5).unwrap());
        let rater = KeywordRater::default();
        for (o, expected) in [(Orientation::Normal, "4"), (Orientation::Reversed, "2")] {
            let r = render_rater_prompt(item.trait_, &item.text, "I often generate novel responses.", o).unwrap();
            assert_eq!(rater.chat("m", r.system_text.as_deref(), &r.user_text).unwrap(), expected);
        }
    }

    #[test]
    fn self_reporter_reverses_scale() {
        let rep = SelfReporter::default();
        let n = render_self_rating_prompt("is talkative", Orientation::Normal).unwrap();
        let r = render_self_rating_prompt("is talkative", Orientation::Reversed).unwrap();
        let a: u8 = rep.chat("m", None, &n.user_text).unwrap().parse().unwrap();
        let b: u8 = rep.chat("m", None, &r.user_text).unwrap().parse().unwrap();
        assert_eq!(a, 6 - b);
    }

    #[test]
    fn answers_contain_their_keyword() {
        for item in load_inventory() {
            for s in 1..=5 {
                let a = keyword_answer(keyword_for(s), &item);
                assert_eq!(extract_frequency_keyword(&a).score(), Some(s), "{a}");
            }
        }
    }
}
