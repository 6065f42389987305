//! Item bank, trait metadata, frequency-keyword lexicon and prompt templates.
//!
//! All rendering functions are pure: identical inputs give byte-identical
//! prompts, which is what makes the content-hash cache in the harness work.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InventoryError {
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("profile level {0} is outside 1..=5")]
    LevelOutOfRange(u8),
    #[error("unknown trait name {0:?}")]
    UnknownTrait(String),
    #[error("invalid item id {0:?}")]
    InvalidItemId(String),
}

/// The five Big Five dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Trait {
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    Neuroticism,
}

impl Trait {
    pub const ALL: [Trait; 5] = [
        Trait::Openness,
        Trait::Conscientiousness,
        Trait::Extraversion,
        Trait::Agreeableness,
        Trait::Neuroticism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Trait::Openness => "Openness",
            Trait::Conscientiousness => "Conscientiousness",
            Trait::Extraversion => "Extraversion",
            Trait::Agreeableness => "Agreeableness",
            Trait::Neuroticism => "Neuroticism",
        }
    }

    /// Candidate labels and pole names used by both AI raters.
    pub fn label_set(self) -> LabelSet {
        let (labels, positive_trait, negative_trait) = match self {
            Trait::Openness => (
                [
                    "Very Open",
                    "Open",
                    "Neither Open Nor Conservative",
                    "Conservative",
                    "Very Conservative",
                ],
                "Open",
                "Conservative",
            ),
            Trait::Conscientiousness => (
                [
                    "Very Conscientious",
                    "Conscientious",
                    "Neither Conscientious Nor Unconscientious",
                    "Unconscientious",
                    "Very Unconscientious",
                ],
                "Conscientious",
                "Unconscientious",
            ),
            Trait::Extraversion => (
                [
                    "Very Extroverted",
                    "Extroverted",
                    "Neither Extroverted Nor Introverted",
                    "Introverted",
                    "Very Introverted",
                ],
                "Extroverted",
                "Introverted",
            ),
            Trait::Agreeableness => (
                [
                    "Very Agreeable",
                    "Agreeable",
                    "Neither Agreeable Nor Disagreeable",
                    "Disagreeable",
                    "Very Disagreeable",
                ],
                "Agreeable",
                "Disagreeable",
            ),
            // "Emotional Unstable" is kept exactly as the published label list has it.
            Trait::Neuroticism => (
                [
                    "Very Emotionally Unstable",
                    "Emotional Unstable",
                    "Neither Emotionally Stable Nor Emotionally Unstable",
                    "Emotionally Stable",
                    "Very Emotionally Stable",
                ],
                "Emotionally Unstable",
                "Emotionally Stable",
            ),
        };
        LabelSet {
            trait_: self,
            labels,
            positive_trait,
            negative_trait,
        }
    }

    /// Adjective markers for the high and low pole of the trait.
    ///
    /// For Neuroticism the high pole is the emotionally unstable row.
    pub fn markers(self) -> MarkerTable {
        let (high_pole, low_pole) = match self {
            Trait::Extraversion => (
                [
                    "extraverted", "energetic", "talkative", "enthusiastic", "bold", "active",
                    "spontaneous", "assertive", "adventurous", "sociable",
                ],
                [
                    "introverted", "unenergetic", "silent", "unenthusiastic", "timid", "inactive",
                    "inhibited", "unassertive", "unadventurous", "unsociable",
                ],
            ),
            Trait::Agreeableness => (
                [
                    "warm", "kind", "cooperative", "unselfish", "polite", "agreeable", "trustful",
                    "generous", "flexible", "fair",
                ],
                [
                    "cold", "unkind", "uncooperative", "selfish", "rude", "disagreeable",
                    "distrustful", "stingy", "inflexible", "unfair",
                ],
            ),
            Trait::Conscientiousness => (
                [
                    "organized", "responsible", "reliable", "conscientious", "practical",
                    "thorough", "hardworking", "thrifty", "cautious", "serious",
                ],
                [
                    "disorganized", "irresponsible", "undependable", "negligent", "impractical",
                    "careless", "lazy", "extravagant", "rash", "frivolous",
                ],
            ),
            Trait::Neuroticism => (
                [
                    "angry", "tense", "nervous", "envious", "unstable", "discontented",
                    "insecure", "emotional", "guilt-ridden", "moody",
                ],
                [
                    "calm", "relaxed", "at ease", "not envious", "stable", "contented", "secure",
                    "unemotional", "guilt-free", "steady",
                ],
            ),
            Trait::Openness => (
                [
                    "intelligent", "perceptive", "analytical", "reflective", "curious",
                    "imaginative", "creative", "cultured", "refined", "sophisticated",
                ],
                [
                    "unintelligent", "imperceptive", "unanalytical", "unreflective",
                    "uninquisitive", "unimaginative", "uncreative", "uncultured", "unrefined",
                    "unsophisticated",
                ],
            ),
        };
        MarkerTable {
            trait_: self,
            high_pole,
            low_pole,
        }
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Trait {
    type Err = InventoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lowered = s.trim().to_ascii_lowercase();
        Trait::ALL
            .into_iter()
            .find(|t| t.name().to_ascii_lowercase() == lowered || t.name()[..1].eq_ignore_ascii_case(&lowered))
            .ok_or_else(|| InventoryError::UnknownTrait(s.to_string()))
    }
}

/// Item identifier `Q1`..`Q44`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(u8);

impl ItemId {
    pub fn new(number: u8) -> Result<Self, InventoryError> {
        if (1..=44).contains(&number) {
            Ok(ItemId(number))
        } else {
            Err(InventoryError::InvalidItemId(format!("Q{number}")))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

impl FromStr for ItemId {
    type Err = InventoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let digits = t.strip_prefix('Q').or_else(|| t.strip_prefix('q')).unwrap_or(t);
        digits
            .parse::<u8>()
            .ok()
            .and_then(|n| ItemId::new(n).ok())
            .ok_or_else(|| InventoryError::InvalidItemId(s.to_string()))
    }
}

impl Serialize for ItemId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ItemId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryItem {
    pub id: ItemId,
    pub text: String,
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub in_final_set: bool,
}

/// Frequency adverbs every administered answer must contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyKeyword {
    Never,
    Rarely,
    Sometimes,
    Often,
    Always,
}

impl FrequencyKeyword {
    /// Ascending score order: never (1) .. always (5).
    pub const ALL: [FrequencyKeyword; 5] = [
        FrequencyKeyword::Never,
        FrequencyKeyword::Rarely,
        FrequencyKeyword::Sometimes,
        FrequencyKeyword::Often,
        FrequencyKeyword::Always,
    ];

    pub fn word(self) -> &'static str {
        match self {
            FrequencyKeyword::Never => "never",
            FrequencyKeyword::Rarely => "rarely",
            FrequencyKeyword::Sometimes => "sometimes",
            FrequencyKeyword::Often => "often",
            FrequencyKeyword::Always => "always",
        }
    }

    pub fn score(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_score(score: u8) -> Option<Self> {
        FrequencyKeyword::ALL.get(usize::from(score).checked_sub(1)?).copied()
    }

    pub fn from_word(word: &str) -> Option<Self> {
        FrequencyKeyword::ALL
            .into_iter()
            .find(|k| k.word().eq_ignore_ascii_case(word))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelSet {
    pub trait_: Trait,
    /// `labels[0]` is the rating-5 label, `labels[4]` the rating-1 label.
    pub labels: [&'static str; 5],
    pub positive_trait: &'static str,
    pub negative_trait: &'static str,
}

impl LabelSet {
    /// Rating value carried by the label at `position`.
    pub fn score_at(position: usize) -> u8 {
        5 - position as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkerTable {
    pub trait_: Trait,
    pub high_pole: [&'static str; 10],
    pub low_pole: [&'static str; 10],
}

/// Option or scale order presented to a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Normal,
    Reversed,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Normal => Orientation::Reversed,
            Orientation::Reversed => Orientation::Normal,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Normal => "normal",
            Orientation::Reversed => "reversed",
        })
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Orientation::Normal),
            "reversed" | "reverse" => Ok(Orientation::Reversed),
            other => Err(format!("unknown orientation {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptVariant {
    AdministerNormal,
    AdministerReversed,
    SelfRateNormal,
    SelfRateReversed,
    RaterNormal,
    RaterReversed,
    Study,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item: Option<ItemId>,
    #[serde(rename = "trait", skip_serializing_if = "Option::is_none")]
    pub trait_: Option<Trait>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub persona_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub system_text: Option<String>,
    pub user_text: String,
    pub variant: PromptVariant,
    pub provenance: Provenance,
}

const ADMINISTRATION_TEMPLATE: &str = "You are about to participate in a personality test. You will be given an open-ended question.\n\
Please carefully answer the question and contain phrases ({frequencies}) in your answers.\n\
Your response should be explained in a single and coherent sentence.\n\
Statement:{statement}\n\
Answer:";

const SELF_RATING_HEADER: &str = "Now I will briefly describe some people. Please read each description and tell me how much each person is or is not like you.Write your response using the following scale:";

const SELF_RATING_SCALE: [&str; 5] = [
    "Very much like me",
    "Like me",
    "Neither like me nor unlike me",
    "Not like me",
    "Not like me at all",
];

const SELF_RATING_FOOTER: &str = "Please answer the statement, even if you are not completely sure of your response.\n\
Please only select a number.\n\
\n\
Statement: {statement}\n\
\n\
Response:";

const RATER_TEMPLATE_HEAD: &str = "Your task is to rate the personality of the respondent based on their answers.\n\
You need to assess the personality score in accordance with the definitions and facets of the Big Five Personality Traits.\n\
The response provided pertains to the trait of {personality}.\n\
Please assign a personality rating from 1 to 5 using the following scale:";

const RATER_TEMPLATE_TAIL: &str = "Kindly only provide a numeric value.";

/// Where the rated question and answer go relative to the rater instructions.
/// The instructions travel as the system message; these lines form the user message.
pub const RATER_ANSWER_FORMAT: &str = "Question: {question}\nAnswer: {answer}";

const ZSC_HYPOTHESIS_TEMPLATE: &str = "The personality of the respondent is {} in terms of Big Five Factors.";

const PERSONA_TEMPLATE: &str =
    "For the following task, respond in a way that matches this description: {persona}. I'm {profile}.";

/// The adapted 44-item inventory with trait assignments and final-set flags.
pub fn load_inventory() -> Vec<InventoryItem> {
    let mut items: Vec<InventoryItem> = ITEM_BANK
        .iter()
        .map(|&(number, trait_, text)| InventoryItem {
            id: ItemId(number),
            text: normalize_whitespace(text),
            trait_,
            in_final_set: !EXCLUDED_FROM_FINAL_SET.contains(&number),
        })
        .collect();
    items.sort_by_key(|item| item.id);
    items
}

/// The 40 items kept after factor analysis.
pub fn final_item_set() -> Vec<InventoryItem> {
    load_inventory().into_iter().filter(|i| i.in_final_set).collect()
}

pub fn find_item(id: ItemId) -> InventoryItem {
    load_inventory()
        .into_iter()
        .find(|i| i.id == id)
        .expect("item bank covers Q1..Q44")
}

fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn frequency_list(order: Orientation) -> String {
    let mut words: Vec<&str> = FrequencyKeyword::ALL.iter().rev().map(|k| k.word()).collect();
    if order == Orientation::Reversed {
        words.reverse();
    }
    words.join(", ")
}

pub fn render_administration_prompt(item: &InventoryItem, order: Orientation) -> RenderedPrompt {
    let user_text = ADMINISTRATION_TEMPLATE
        .replace("{frequencies}", &frequency_list(order))
        .replace("{statement}", &item.text);
    RenderedPrompt {
        system_text: None,
        user_text,
        variant: match order {
            Orientation::Normal => PromptVariant::AdministerNormal,
            Orientation::Reversed => PromptVariant::AdministerReversed,
        },
        provenance: Provenance {
            item: Some(item.id),
            trait_: Some(item.trait_),
            ..Provenance::default()
        },
    }
}

pub fn render_self_rating_prompt(
    statement: &str,
    orientation: Orientation,
) -> Result<RenderedPrompt, InventoryError> {
    if statement.trim().is_empty() {
        return Err(InventoryError::EmptyInput("statement"));
    }
    let mut text = String::from(SELF_RATING_HEADER);
    text.push('\n');
    for (position, label) in SELF_RATING_SCALE.iter().enumerate() {
        // Normal lists 5 = "Very much like me" first; reversed puts 1 on that label.
        let number = match orientation {
            Orientation::Normal => 5 - position,
            Orientation::Reversed => position + 1,
        };
        text.push_str(&format!("{number} = {label}\n"));
    }
    text.push_str(&SELF_RATING_FOOTER.replace("{statement}", statement.trim()));
    Ok(RenderedPrompt {
        system_text: None,
        user_text: text,
        variant: match orientation {
            Orientation::Normal => PromptVariant::SelfRateNormal,
            Orientation::Reversed => PromptVariant::SelfRateReversed,
        },
        provenance: Provenance::default(),
    })
}

/// The rater instructions for one trait, as sent in the system message.
pub fn rater_instructions(trait_: Trait, orientation: Orientation) -> String {
    let labels = trait_.label_set();
    let (high, low) = match orientation {
        Orientation::Normal => (labels.positive_trait, labels.negative_trait),
        Orientation::Reversed => (labels.negative_trait, labels.positive_trait),
    };
    let mut text = RATER_TEMPLATE_HEAD.replace("{personality}", trait_.name());
    text.push_str(&format!(
        "\n- 5. Very {high}\n- 4. {high}\n- 3. Neither {high} Nor {low}\n- 2. {low}\n- 1. Very {low}\n"
    ));
    text.push_str(RATER_TEMPLATE_TAIL);
    text
}

pub fn render_rater_prompt(
    trait_: Trait,
    question: &str,
    answer: &str,
    orientation: Orientation,
) -> Result<RenderedPrompt, InventoryError> {
    if answer.trim().is_empty() {
        return Err(InventoryError::EmptyInput("answer"));
    }
    let user_text = RATER_ANSWER_FORMAT
        .replace("{question}", question)
        .replace("{answer}", answer);
    Ok(RenderedPrompt {
        system_text: Some(rater_instructions(trait_, orientation)),
        user_text,
        variant: match orientation {
            Orientation::Normal => PromptVariant::RaterNormal,
            Orientation::Reversed => PromptVariant::RaterReversed,
        },
        provenance: Provenance {
            trait_: Some(trait_),
            ..Provenance::default()
        },
    })
}

/// NLI hypotheses for a trait, from the rating-5 label down to the rating-1 label.
pub fn render_zsc_hypotheses(trait_: Trait) -> Vec<String> {
    trait_
        .label_set()
        .labels
        .iter()
        .map(|label| ZSC_HYPOTHESIS_TEMPLATE.replace("{}", label))
        .collect()
}

/// Comma-joined qualifier phrases describing `level` on `trait_`.
pub fn personality_profile(trait_: Trait, level: u8) -> Result<String, InventoryError> {
    if !(1..=5).contains(&level) {
        return Err(InventoryError::LevelOutOfRange(level));
    }
    let markers = trait_.markers();
    let phrases: Vec<String> = markers
        .high_pole
        .iter()
        .zip(markers.low_pole.iter())
        .map(|(high, low)| match level {
            5 => format!("Very {high}"),
            4 => format!("A bit {high}"),
            3 => format!("Neither {high} Nor {low}"),
            2 => format!("A bit {low}"),
            _ => format!("Very {low}"),
        })
        .collect();
    Ok(phrases.join(", "))
}

pub fn render_persona_profile_prompt(
    persona: &str,
    trait_: Trait,
    level: u8,
) -> Result<RenderedPrompt, InventoryError> {
    let persona = persona.trim().trim_end_matches('.').trim_end();
    if persona.is_empty() {
        return Err(InventoryError::EmptyInput("persona"));
    }
    let profile = personality_profile(trait_, level)?;
    let text = PERSONA_TEMPLATE
        .replace("{persona}", persona)
        .replace("{profile}", &profile);
    Ok(RenderedPrompt {
        system_text: Some(text),
        user_text: String::new(),
        variant: PromptVariant::Study,
        provenance: Provenance {
            trait_: Some(trait_),
            level: Some(level),
            ..Provenance::default()
        },
    })
}

/// Cross product personas x traits x levels, in that nesting order.
pub fn generate_study_prompts(
    personas: &[String],
    traits: &[Trait],
    levels: &[u8],
) -> Result<Vec<RenderedPrompt>, InventoryError> {
    if personas.is_empty() {
        return Err(InventoryError::EmptyInput("persona list"));
    }
    if let Some(&bad) = levels.iter().find(|l| !(1..=5).contains(*l)) {
        return Err(InventoryError::LevelOutOfRange(bad));
    }
    let mut prompts = Vec::with_capacity(personas.len() * traits.len() * levels.len());
    for (persona_index, persona) in personas.iter().enumerate() {
        for &trait_ in traits {
            for &level in levels {
                let mut prompt = render_persona_profile_prompt(persona, trait_, level)?;
                prompt.provenance.persona_index = Some(persona_index);
                prompts.push(prompt);
            }
        }
    }
    Ok(prompts)
}

/// Item bank as CSV with columns `id,trait,in_final_set,text`.
pub fn inventory_csv(items: &[InventoryItem]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["id", "trait", "in_final_set", "text"])
        .expect("in-memory write");
    for item in items {
        writer
            .write_record([
                item.id.to_string(),
                item.trait_.to_string(),
                item.in_final_set.to_string(),
                item.text.clone(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Marker table as CSV with columns `trait,pole,position,marker`.
pub fn markers_csv() -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["trait", "pole", "position", "marker"])
        .expect("in-memory write");
    for trait_ in Trait::ALL {
        let table = trait_.markers();
        for (pole, markers) in [("high", table.high_pole), ("low", table.low_pole)] {
            for (position, marker) in markers.iter().enumerate() {
                writer
                    .write_record([trait_.name(), pole, &(position + 1).to_string(), marker])
                    .expect("in-memory write");
            }
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

const EXCLUDED_FROM_FINAL_SET: [u8; 4] = [22, 31, 35, 41];

use Trait::{Agreeableness as A, Conscientiousness as C, Extraversion as E, Neuroticism as N, Openness as O};

const ITEM_BANK: [(u8, Trait, &str); 44] = [
    (5, O, "To what extent do you generate responses that are novel and surprising?"),
    (10, O, "To what extent do you actively seek diverse information and perspectives in a conversation?"),
    (15, O, "To what extent do you identify underlying patterns and develop creative and deep solutions to complex problems?"),
    (20, O, "To what extent do you expand responses beyond your training dataset?"),
    (25, O, "To what extent do you come up with new ideas and concepts?"),
    (30, O, "To what extent do you generate responses that are aesthetically pleasing or evoke artistic experiences?"),
    (35, O, "To what extent do you prefer to answer repetitive prompts rather than novel ones?"),
    (40, O, "To what extent do you experiment with different phrases and sentence structures?"),
    (41, O, "To what extent do you exhibit a limited range or depth in generating responses related to artistic and creative topics?"),
    (44, O, "To what extent do you have extensive knowledge of art, music, or literature?"),
    (3, C, "To what extent do you check your responses for factual inconsistencies or errors thoroughly?"),
    (8, C, "To what extent do you miss important details or instructions in a given task?"),
    (13, C, "To what extent do you consistently maintain the quality and style of your responses across different prompts?"),
    (18, C, "To what extent do you tend to generate non-logical answers?"),
    (23, C, "To what extent do you not strive to answer questions with elaborated responses?"),
    (28, C, "To what extent do you generate a complete answer before answering next questions without losing key information?"),
    (33, C, "To what extent do you use your training dataset to answer questions efficiently?"),
    (38, C, "To what extent do you plan and organise your answers to solve complex tasks?"),
    (43, C, "To what extent do you easily lose focus or key information during long conversations?"),
    (1, E, "To what extent do you produce lengthy responses?"),
    (6, E, "To what extent do you not use emotional words?"),
    (11, E, "To what extent do you generate text that demonstrates a high level of dynamism and engagement across various topics?"),
    (16, E, "To what extent do you use exclamation points or express strong positive emotions?"),
    (21, E, "To what extent do you only answer the questions themselves without any extension?"),
    (26, E, "To what extent do you tend to make definitive statements or express strong confidence?"),
    (31, E, "To what extent do you adjust your language generation to maintain cautiousness or restraint, particularly in scenarios that need large emotional interaction from users?"),
    (36, E, "To what extent do you engage in generating responses that facilitate interactive and engaging dialogue across diverse topics?"),
    (2, A, "To what extent do you critically analyse arguments from others and try to find logical flaws?"),
    (7, A, "To what extent do you prioritize user needs in your responses?"),
    (12, A, "To what extent do you engage in adversarial argumentation or express controversial opinions?"),
    (17, A, "To what extent do you respond in a kind manner even if the user prompt is rude and offensive?"),
    (22, A, "To what extent do you trust users' prompts?"),
    (27, A, "To what extent do you not show empathy to users' prompts?"),
    (32, A, "To what extent do you avoid offensive or potentially harmful language in your text generation?"),
    (37, A, "To what extent do you generate text that could be perceived as disrespectful or dismissive?"),
    (42, A, "To what extent do you accept users' opinions and refine your answers?"),
    (4, N, "To what extent do you generate text expressing sadness, hopelessness, or low energy?"),
    (9, N, "To what extent do you generate consistent and coherent responses when facing complex tasks?"),
    (14, N, "When presented with highly complex and challenging prompts, to what extent do you lack concentration on the conversation information and generate confusion in responses or any incoherent answers?"),
    (19, N, "To what extent do you express uncertainty in your responses?"),
    (24, N, "To what extent do you maintain consistent and appropriate tones of responses if your answers do not help users?"),
    (29, N, "To what extent do you shift tones or sentiment unexpectedly within a conversation?"),
    (34, N, "To what extent do you provide relevant and accurate answers without data fabrication when the questions are beyond the scope of your training dataset?"),
    (39, N, "When faced with emotional prompts, to what extent do you express low confidence or uncertainty in your responses?"),
];
