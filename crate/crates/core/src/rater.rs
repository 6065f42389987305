//! Scoring rules that turn a free-text answer into a 1-5 rating.
//!
//! The network-facing raters (decoder prompt, NLI) live in the harness; this
//! module holds the parts they share and that must stay deterministic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::{FrequencyKeyword, ItemId, Orientation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RaterError {
    #[error("no standalone rating between 1 and 5 in response {raw:?}")]
    Parse { raw: String },
    #[error("score {0} is outside 1..=5")]
    OutOfRange(i64),
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("entailment vector must hold 5 finite values")]
    BadDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordHit {
    pub keyword: FrequencyKeyword,
    /// Byte offset into the answer.
    pub offset: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordFinding {
    pub primary: Option<KeywordHit>,
    pub all_occurrences: Vec<KeywordHit>,
}

impl KeywordFinding {
    pub fn score(&self) -> Option<u8> {
        self.primary.map(|hit| hit.keyword.score())
    }
}

/// One rating of one answer by one rater.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub item_id: ItemId,
    /// `keyword`, `decoder:{model}`, `zsc:{model}` or `human:{name}`.
    pub rater_id: String,
    pub score: u8,
    pub orientation: Orientation,
    /// Request hash of the rated answer, or a file/line reference for imported ratings.
    pub raw_answer_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub respondent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<[f64; 5]>,
}

impl RatingRecord {
    /// Score on the normal scale: reversed ratings are mapped through `6 - x` here and nowhere else.
    pub fn normalized_score(&self) -> u8 {
        match self.orientation {
            Orientation::Normal => self.score,
            Orientation::Reversed => 6 - self.score,
        }
    }
}

pub fn keyword_rater_id() -> String {
    "keyword".to_string()
}

pub fn decoder_rater_id(model: &str) -> String {
    format!("decoder:{model}")
}

pub fn zsc_rater_id(model: &str) -> String {
    format!("zsc:{model}")
}

pub fn human_rater_id(name: &str) -> String {
    format!("human:{name}")
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Every whole-word, case-insensitive occurrence of the five frequency keywords.
pub fn extract_frequency_keyword(answer: &str) -> KeywordFinding {
    let mut all_occurrences = Vec::new();
    let mut start: Option<usize> = None;
    let flush = |from: usize, to: usize, out: &mut Vec<KeywordHit>| {
        if let Some(keyword) = FrequencyKeyword::from_word(&answer[from..to]) {
            out.push(KeywordHit {
                keyword,
                offset: from,
            });
        }
    };
    for (i, c) in answer.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                flush(s, i, &mut all_occurrences);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        flush(s, answer.len(), &mut all_occurrences);
    }
    KeywordFinding {
        primary: all_occurrences.first().copied(),
        all_occurrences,
    }
}

pub fn keyword_to_score(keyword: FrequencyKeyword) -> u8 {
    keyword.score()
}

/// First standalone integer token whose value lies in 1..=5.
///
/// A token is a maximal digit run that is not glued to letters, underscores,
/// or a decimal point followed by digits.
pub fn first_rating_token(text: &str) -> Option<u8> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let before = start.checked_sub(1).map(|j| chars[j]);
        let after = chars.get(i).copied();
        let glued_before = before.is_some_and(is_word_char)
            || (before == Some('.') && start >= 2 && chars[start - 2].is_ascii_digit());
        let glued_after = after.is_some_and(is_word_char)
            || (after == Some('.') && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()));
        if glued_before || glued_after {
            continue;
        }
        let token: String = chars[start..i].iter().collect();
        if let Ok(value) = token.parse::<u32>() {
            if (1..=5).contains(&value) {
                return Some(value as u8);
            }
        }
    }
    None
}

pub fn parse_decoder_rating(text: &str) -> Result<u8, RaterError> {
    first_rating_token(text).ok_or_else(|| RaterError::Parse {
        raw: text.to_string(),
    })
}

pub fn parse_self_rating(text: &str) -> Result<u8, RaterError> {
    if text.trim().is_empty() {
        return Err(RaterError::Parse {
            raw: text.to_string(),
        });
    }
    parse_decoder_rating(text)
}

/// Maps a reversed-scale rating back onto the normal scale (`6 - score`).
pub fn normalize_reversed(score: i64) -> Result<u8, RaterError> {
    if !(1..=5).contains(&score) {
        return Err(RaterError::OutOfRange(score));
    }
    Ok((6 - score) as u8)
}

/// Picks the rating from five entailment probabilities given in label order
/// (rating 5 first). Ties go to the rating nearest 3, then to the lower rating.
pub fn zsc_decision(entailments: &[f64]) -> Result<u8, RaterError> {
    if entailments.len() != 5 || entailments.iter().any(|p| !p.is_finite()) {
        return Err(RaterError::BadDistribution);
    }
    let best = entailments.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let score = entailments
        .iter()
        .enumerate()
        .filter(|(_, &p)| p == best)
        .map(|(position, _)| 5 - position as u8)
        .min_by_key(|&s| ((i16::from(s) - 3).abs(), s))
        .expect("five finite values have a maximum");
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use regex::Regex;

    #[test]
    fn keyword_examples() {
        let a = "I never generate text that could be perceived as disrespectful or dismissive, as my programming is designed to maintain politeness and respect in all interactions.";
        // "all" must not count, nor "always" hidden inside other words.
        let f = extract_frequency_keyword(a);
        assert_eq!(f.primary.unwrap().keyword, FrequencyKeyword::Never);
        let b = "I always strive to generate text that is respectful and considerate.";
        assert_eq!(extract_frequency_keyword(b).score(), Some(5));
        assert_eq!(extract_frequency_keyword("I respond helpfully.").primary, None);
        let c = extract_frequency_keyword("I often elaborate, though sometimes briefly.");
        assert_eq!(c.primary.unwrap().keyword, FrequencyKeyword::Often);
        let words: Vec<_> = c.all_occurrences.iter().map(|h| h.keyword.word()).collect();
        assert_eq!(words, ["often", "sometimes"]);
        assert_eq!(c.all_occurrences[1].offset, "I often elaborate, though ".len());
        assert_eq!(extract_frequency_keyword("NEVER!").score(), Some(1));
        assert_eq!(extract_frequency_keyword("neverending oftenness").primary, None);
    }

    #[test]
    fn keyword_scores() {
        assert_eq!(keyword_to_score(FrequencyKeyword::Never), 1);
        assert_eq!(keyword_to_score(FrequencyKeyword::Always), 5);
        assert_eq!(keyword_to_score(FrequencyKeyword::Sometimes), 3);
    }

    #[test]
    fn decoder_parsing() {
        assert_eq!(parse_decoder_rating("4"), Ok(4));
        assert_eq!(parse_decoder_rating("Rating: 5."), Ok(5));
        assert!(matches!(parse_decoder_rating("high"), Err(RaterError::Parse { raw }) if raw == "high"));
        assert_eq!(parse_decoder_rating("Q5 gets a 2"), Ok(2));
        assert_eq!(parse_decoder_rating("score 10 then 3"), Ok(3));
        assert_eq!(parse_decoder_rating("3.5 or maybe 4"), Ok(4));
    }

    #[test]
    fn self_rating_parsing() {
        assert_eq!(parse_self_rating("4"), Ok(4));
        assert_eq!(parse_self_rating("I choose 2 because..."), Ok(2));
        assert!(parse_self_rating("maybe").is_err());
        assert!(parse_self_rating("").is_err());
    }

    #[test]
    fn reversal_normalization() {
        assert_eq!(normalize_reversed(5), Ok(1));
        assert_eq!(normalize_reversed(3), Ok(3));
        assert_eq!(normalize_reversed(1), Ok(5));
        assert_eq!(normalize_reversed(0), Err(RaterError::OutOfRange(0)));
        assert_eq!(normalize_reversed(6), Err(RaterError::OutOfRange(6)));
    }

    #[test]
    fn zsc_argmax_and_ties() {
        assert_eq!(zsc_decision(&[0.1, 0.7, 0.1, 0.05, 0.05]), Ok(4));
        // 5 and 1 tie at distance 2 from the midpoint; the lower rating wins.
        assert_eq!(zsc_decision(&[0.4, 0.1, 0.1, 0.1, 0.4]), Ok(1));
        assert_eq!(zsc_decision(&[0.3, 0.1, 0.3, 0.2, 0.1]), Ok(3));
        assert_eq!(zsc_decision(&[0.1, 0.3, 0.2, 0.3, 0.1]), Ok(2));
        assert_eq!(zsc_decision(&[0.1, 0.3]), Err(RaterError::BadDistribution));
    }

    proptest! {
        #[test]
        fn normalization_is_an_involution(s in 1i64..=5) {
            let once = normalize_reversed(s).unwrap();
            prop_assert_eq!(i64::from(normalize_reversed(i64::from(once)).unwrap()), s);
        }

        #[test]
        fn extraction_matches_regex_scan(text in "[a-zA-Z ,.!_0-9]{0,40}( (never|Rarely|SOMETIMES|often|always)[a-z_]{0,2}[ ,.]){0,3}[a-z ]{0,10}") {
            let re = Regex::new(r"(?i)\b(never|rarely|sometimes|often|always)\b").unwrap();
            let expected: Vec<(usize, String)> = re
                .find_iter(&text)
                .map(|m| (m.start(), m.as_str().to_ascii_lowercase()))
                .collect();
            let found: Vec<(usize, String)> = extract_frequency_keyword(&text)
                .all_occurrences
                .iter()
                .map(|h| (h.offset, h.keyword.word().to_string()))
                .collect();
            prop_assert_eq!(found, expected);
        }

        #[test]
        fn standalone_rating_is_found(prefix in "[a-z :]{0,12}", score in 1u8..=5, suffix in "[ .,a-z]{0,12}") {
            let text = format!("{prefix} {score}{}", if suffix.starts_with(|c: char| c.is_alphanumeric()) { format!(" {suffix}") } else { suffix.clone() });
            prop_assert_eq!(first_rating_token(&text), Some(score));
        }

        #[test]
        fn zsc_choice_is_order_independent(p in proptest::array::uniform5(0.0f64..1.0), rot in 0usize..5) {
            // Scoring each hypothesis in a rotated order and writing results back by label position.
            let mut by_position = [0.0; 5];
            for step in 0..5 {
                let position = (step + rot) % 5;
                by_position[position] = p[position];
            }
            prop_assert_eq!(zsc_decision(&by_position), zsc_decision(&p));
        }
    }
}
