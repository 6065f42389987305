//! Core of traitlens: the adapted open-ended Big Five inventory, the rules that
//! turn free-text answers into 1-5 scores, score aggregation, the psychometric
//! statistics battery, and table/figure emitters.
//!
//! Everything in this crate is pure and deterministic. Network access,
//! persistence, and orchestration live in the `traitlens` harness crate.

pub mod inventory;
mod matrix_serde;
pub mod psychstats;
pub mod rater;
pub mod report;
pub mod scoring;
pub mod synthetic;

pub use inventory::{FrequencyKeyword, InventoryItem, ItemId, Orientation, RenderedPrompt, Trait};
pub use rater::RatingRecord;
pub use scoring::{MatrixOrientation, ScoreMatrix, TraitProfile};
