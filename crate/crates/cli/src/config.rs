//! Experiment configuration: one JSON document, every key optional, with
//! command-line flags applied on top.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use tagal::dataset::{FeatureSpec, SplitMode, DEFAULT_TRAIN_FRACTION};
use tagal::engine::RunConfig;
use tagal::evalsuite::EvalConfig;
use tagal::llmlink::BackendKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    /// Target column; defaults to the last column.
    pub target: Option<String>,
    /// Full schema, replacing inference. Names must match the header.
    pub features: Option<Vec<FeatureSpec>>,
    pub train_fraction: f64,
    pub stratified: bool,
    /// Seeds the split, the few-shot draws, the baseline and the evaluation.
    pub seed: u64,
    pub run: RunConfig,
    pub backend: Option<BackendKind>,
    /// Wraps the backend in a record/replay cache at this path.
    pub replay_cache: Option<PathBuf>,
    /// Directory with template overrides.
    pub templates: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub eval: EvalConfig,
    /// Whether `e2e` evaluates after generating.
    pub evaluate: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            target: None,
            features: None,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            stratified: false,
            seed: 0,
            run: RunConfig::default(),
            backend: None,
            replay_cache: None,
            templates: None,
            out: None,
            eval: EvalConfig::default(),
            evaluate: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn split_mode(&self) -> SplitMode {
        if self.stratified {
            SplitMode::Stratified
        } else {
            SplitMode::Shuffle
        }
    }

    /// Propagates the global seed to the run and evaluation settings.
    pub fn resolved(mut self) -> Self {
        self.run.seed = self.seed;
        self.eval.seed = self.seed;
        self
    }

    pub fn dataset(&self) -> Result<&Path> {
        self.dataset.as_deref().context("no dataset given (use --dataset or the \"dataset\" key)")
    }

    pub fn out(&self) -> Result<&Path> {
        self.out.as_deref().context("no output directory given (use --out or the \"out\" key)")
    }

    /// Checks everything that can be checked without touching the network.
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            bail!("train_fraction must lie strictly between 0 and 1, got {}", self.train_fraction);
        }
        self.run.validate()?;
        if self.eval.k == 0 {
            bail!("eval.k must be at least 1");
        }
        if self.eval.runs == 0 {
            bail!("eval.runs must be at least 1");
        }
        if let Some(BackendKind::Replay { fallback: Some(_), .. }) = &self.backend {
            if self.replay_cache.is_some() {
                bail!("a replay backend cannot be wrapped in another replay cache");
            }
        }
        Ok(())
    }

    /// The backend actually used: the configured one, wrapped in a
    /// recording cache when `replay_cache` is set.
    pub fn effective_backend(&self) -> Result<BackendKind> {
        let backend = self.backend.clone().context("no backend given (use --backend or the \"backend\" key)")?;
        Ok(match (&self.replay_cache, backend) {
            (Some(_), b @ BackendKind::Replay { .. }) => b,
            (Some(cache), inner) => BackendKind::Replay { cache: cache.clone(), fallback: Some(Box::new(inner)) },
            (None, b) => b,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"datasett": "a.csv"}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"run": {"iteration": 2}}"#).is_err());
        let c: ExperimentConfig = serde_json::from_str(r#"{"run": {"iterations": 2}, "seed": 4}"#).unwrap();
        assert_eq!(c.run.iterations, 2);
        assert_eq!(c.run.per_class_shots, 20);
        assert_eq!(c.resolved().run.seed, 4);
    }

    #[test]
    fn replay_cache_wraps_backend() {
        let c = ExperimentConfig {
            backend: Some(BackendKind::Mock { script: "m.json".into() }),
            replay_cache: Some("c.jsonl".into()),
            ..Default::default()
        };
        match c.effective_backend().unwrap() {
            BackendKind::Replay { cache, fallback: Some(inner) } => {
                assert_eq!(cache, PathBuf::from("c.jsonl"));
                assert!(matches!(*inner, BackendKind::Mock { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_fail_validation() {
        let c = ExperimentConfig { train_fraction: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.run.iterations = 0;
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::default().validate().is_ok());
    }
}
