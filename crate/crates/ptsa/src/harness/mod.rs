//! The experiment layer: run configuration, the full abstraction-aware
//! search driver, episode loops, the speedup study, the verification suite,
//! and metric emission.
//!
//! Episodes and seeds are independent given their configs; workers share
//! nothing mutable. Every output file carries a `schema_version`.

mod config;
mod episode;
mod metrics;
mod run;
mod search;
mod speedup;
mod verify;

pub use config::{EnvironmentSpec, ModelSpec, RunConfig};
pub use episode::{run_episode, select_action, EpisodeResult, MoveRecord};
pub use metrics::{
    emit_metrics, parse_jsonl, summarize, EpisodeSummary, RunMetrics, SearchRecord,
    METRICS_SCHEMA_VERSION,
};
pub use run::{dump_tree, run, RunOutput};
pub use search::{ptsa_search, SearchEvent, SearchOutcome};
pub use speedup::{speedup_study, SpeedupReport, SpeedupRow, SpeedupStudyConfig};
pub use verify::{random_tables, verify_suite, CheckResult, VerifyReport};

use thiserror::Error;

use crate::abstraction::AbstractionError;
use crate::mdp::MdpError;
use crate::tree::TreeError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("model failure at simulation {sim}: {source}")]
    Model { sim: usize, source: MdpError },
    #[error("environment failure: {0}")]
    Environment(#[from] MdpError),
    #[error("tree operation failed: {0}")]
    Tree(#[from] TreeError),
    #[error("abstraction failure: {0}")]
    Abstraction(#[from] AbstractionError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("io at {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Splitmix-style seed combiner for deriving per-episode and per-move seeds
/// from one configured seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
