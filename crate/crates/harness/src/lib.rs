//! Orchestration side of traitlens: endpoint configuration, the chat /
//! embedding / NLI gateway, the append-only run store, mock upstreams, and
//! the experiment drivers used by the `traitlens` binary.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gateway;
pub mod inputs;
pub mod mock;
pub mod offline;
pub mod rating;
pub mod scripted;
pub mod store;

pub use config::{Config, EndpointConfig};
pub use error::{HarnessError, Result};
pub use gateway::Gateway;
pub use store::RunStore;
