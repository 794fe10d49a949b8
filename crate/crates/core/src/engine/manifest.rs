use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CallRecord, GenerationResult, Method, Phase, RefinedPrompt, RunConfig};

pub const MANIFEST_VERSION: u32 = 1;

/// Record of a generation job, written next to the synthetic CSV.
///
/// `created_at` is the only field that changes between two identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub created_at: String,
    pub method: Method,
    pub config: RunConfig,
    pub runs_executed: usize,
    pub follow_up_calls: usize,
    pub n_generated: usize,
    pub n_written: usize,
    pub truncated: bool,
    pub rows_by_phase: BTreeMap<Phase, usize>,
    pub rejected_by_phase: BTreeMap<Phase, usize>,
    pub rejected_total: usize,
    pub calls: Vec<CallRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined_prompt: Option<RefinedPrompt>,
    /// Free-form context from the caller (dataset path, split, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(config: &RunConfig, result: &GenerationResult) -> Self {
        Self {
            version: MANIFEST_VERSION,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            method: result.method,
            config: config.clone(),
            runs_executed: result.runs_executed,
            follow_up_calls: result.follow_up_calls,
            n_generated: result.n_generated,
            n_written: result.synthetic.len(),
            truncated: result.truncated,
            rows_by_phase: result.rows_by_phase(),
            rejected_by_phase: result.rejected_by_phase(),
            rejected_total: result.rejected_total,
            calls: result.call_log.clone(),
            refined_prompt: result.refined_prompt.clone(),
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: impl Into<String>, value: impl Serialize) -> Self {
        self.extra.insert(key.into(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}
