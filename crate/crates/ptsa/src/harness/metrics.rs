use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::HarnessError;

pub const METRICS_SCHEMA_VERSION: u32 = 1;

/// Metrics of one search. Wall time is kept out of the serialized records so
/// metrics files stay byte-identical across reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunMetrics {
    /// Paths added to the searched-path list over the search.
    pub searched_paths: usize,
    /// Positive aggregation decisions (each prunes one path).
    pub aggregated_paths: usize,
    /// `100 * aggregated / searched`; recomputable from the event log.
    pub aggregation_percentage: f64,
    /// Live (unpruned) expanded nodes at the end of the search: the
    /// surviving search space.
    pub expanded_nodes: usize,
    /// Mean live-path length at the end of the search.
    pub average_search_depth: f64,
    /// Path comparisons performed by each simulation's sweep.
    pub comparisons_per_iteration: Vec<usize>,
    /// Summed per-depth absolute value gaps over aggregated pairs.
    pub aggregation_error_measured: f64,
    /// Closed-form bound when the active predicate has one.
    pub aggregation_error_bound: Option<f64>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// One JSONL row: a search flattened for plotting, one record per move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub schema_version: u32,
    pub episode: usize,
    pub move_index: usize,
    pub simulations: usize,
    pub seed: u64,
    pub abstraction: String,
    /// Action selected from the visit policy.
    pub action: usize,
    /// Environment reward of the move, from the first player's perspective.
    pub reward: f64,
    pub searched_paths: usize,
    pub aggregated_paths: usize,
    pub aggregation_percentage: f64,
    pub expanded_nodes: usize,
    pub average_search_depth: f64,
    pub comparisons_max: usize,
    pub comparisons_total: usize,
    pub aggregation_error_measured: f64,
    pub aggregation_error_bound: Option<f64>,
}

/// One CSV row: an episode summarized from its records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub schema_version: u32,
    pub episode: usize,
    pub moves: usize,
    pub episode_return: f64,
    pub mean_aggregation_percentage: f64,
    pub mean_search_depth: f64,
    pub total_expanded_nodes: usize,
}

/// Per-episode summaries recomputed purely from the records, so summarizing
/// parsed JSONL reproduces the emitted CSV exactly.
pub fn summarize(records: &[SearchRecord]) -> Vec<EpisodeSummary> {
    let mut episodes: Vec<usize> = records.iter().map(|r| r.episode).collect();
    episodes.sort_unstable();
    episodes.dedup();
    episodes
        .into_iter()
        .map(|episode| {
            let rows: Vec<&SearchRecord> = records.iter().filter(|r| r.episode == episode).collect();
            let n = rows.len() as f64;
            EpisodeSummary {
                schema_version: METRICS_SCHEMA_VERSION,
                episode,
                moves: rows.len(),
                episode_return: rows.iter().map(|r| r.reward).sum(),
                mean_aggregation_percentage: rows.iter().map(|r| r.aggregation_percentage).sum::<f64>()
                    / n,
                mean_search_depth: rows.iter().map(|r| r.average_search_depth).sum::<f64>() / n,
                total_expanded_nodes: rows.iter().map(|r| r.expanded_nodes).sum(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunReport {
    schema_version: u32,
    record_count: usize,
    episodes: Vec<EpisodeSummary>,
}

/// Writes `<base>.jsonl` (one record per search), `<base>.csv` (episode
/// summaries), and `<base>.report.json`.
pub fn emit_metrics(records: &[SearchRecord], base: &str) -> Result<(), HarnessError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source: std::io::Error| HarnessError::Io { path: path.clone(), source }
    };

    let jsonl_path = Path::new(&format!("{base}.jsonl")).to_path_buf();
    let mut jsonl = String::new();
    for record in records {
        jsonl.push_str(&serde_json::to_string(record)?);
        jsonl.push('\n');
    }
    fs::write(&jsonl_path, jsonl).map_err(io_err(&jsonl_path))?;

    let csv_path = format!("{base}.csv");
    let mut writer = csv::Writer::from_path(&csv_path)
        .map_err(|e| HarnessError::Config(format!("csv open {csv_path}: {e}")))?;
    let summaries = summarize(records);
    if summaries.is_empty() {
        // Header-only CSV for an empty run.
        writer.write_record([
            "schema_version",
            "episode",
            "moves",
            "episode_return",
            "mean_aggregation_percentage",
            "mean_search_depth",
            "total_expanded_nodes",
        ])?;
    }
    for summary in &summaries {
        writer.serialize(summary)?;
    }
    writer.flush().map_err(io_err(Path::new(&csv_path)))?;

    let report_path = Path::new(&format!("{base}.report.json")).to_path_buf();
    let report = RunReport {
        schema_version: METRICS_SCHEMA_VERSION,
        record_count: records.len(),
        episodes: summaries,
    };
    fs::write(&report_path, serde_json::to_string_pretty(&report)?).map_err(io_err(&report_path))?;
    Ok(())
}

/// Parses records back from JSONL text.
pub fn parse_jsonl(text: &str) -> Result<Vec<SearchRecord>, HarnessError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}
