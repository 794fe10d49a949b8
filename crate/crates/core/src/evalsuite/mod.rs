//! Evaluation of synthetic tables against real data.
//!
//! [`evaluate`] runs the whole pipeline: collisions against the real
//! training rows are counted and removed, the cleaned rows are scored with
//! manifold precision/recall, and downstream utility is measured with
//! a bagged tree ensemble (TSTR on the cleaned rows, combined 50/50 on the
//! raw rows).

mod auc;
mod encode;
mod forest;
mod manifold;
mod utility;

use std::collections::HashSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{row_key, Table};

pub use auc::roc_auc;
pub use encode::{encode, ColumnBlock, EncodedMatrix, Encoder};
pub use forest::{fit_tree, BaggedTrees, Classifier, ForestParams, Tree};
pub use manifold::{count_inside, euclidean, knn_radii, precision_recall, ManifoldParams, DEFAULT_K};
pub use utility::{utility, UtilityMode, UtilityScore};

pub const DEFAULT_RUNS: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("set of {n} points is too small for k = {k}")]
    TooSmall { n: usize, k: usize },
    #[error("encoded dimensions differ: real {real}, synthetic {synth}")]
    DimensionMismatch { real: usize, synth: usize },
    #[error("tables do not share a schema")]
    SchemaMismatch,
    #[error("ROC AUC needs both classes")]
    SingleClass,
    #[error("ROC AUC got a NaN score")]
    NanScore,
    #[error("only binary targets are supported, found {0} classes")]
    MultiClass(usize),
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("class '{0}' of the training data is missing from the test data")]
    MissingClassInTest(String),
    #[error("no usable synthetic rows to train on")]
    EmptyTraining,
    #[error("at least one run is required")]
    ZeroRuns,
}

fn same_columns(a: &Table, b: &Table) -> bool {
    a.schema().names().eq(b.schema().names())
}

/// Synthetic rows identical to some real training row (canonical cell
/// equality over every column), and the synthetic table without them.
pub fn collisions(real_train: &Table, synth: &Table) -> Result<(usize, Table), EvalError> {
    if !same_columns(real_train, synth) {
        return Err(EvalError::SchemaMismatch);
    }
    let real: HashSet<String> = real_train.rows().iter().map(|r| row_key(r)).collect();
    let keep: Vec<usize> = (0..synth.len()).filter(|&i| !real.contains(&synth.row_key(i))).collect();
    Ok((synth.len() - keep.len(), synth.select(&keep)))
}

/// Rows minus distinct rows.
pub fn duplicates(synth: &Table) -> usize {
    let distinct: HashSet<String> = (0..synth.len()).map(|i| synth.row_key(i)).collect();
    synth.len() - distinct.len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k: usize,
    pub runs: usize,
    pub seed: u64,
    pub forest: ForestParams,
    /// Also train on the real rows for a reference score.
    pub original: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { k: DEFAULT_K, runs: DEFAULT_RUNS, seed: 0, forest: ForestParams::default(), original: true }
    }
}

/// Every metric of one evaluation. Ratios are in `[0, 1]`; metrics that
/// could not be computed are `None` with the reason in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_real: usize,
    pub n_real_test: usize,
    pub n_synth_raw: usize,
    pub n_synth_clean: usize,
    pub collisions: usize,
    pub collision_rate: f64,
    pub duplicates: usize,
    pub duplicate_rate: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub tstr_auc: Option<f64>,
    pub combined_auc: Option<f64>,
    pub original_auc: Option<f64>,
    pub k: usize,
    pub runs: usize,
    pub notes: Vec<String>,
}

fn ratio(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

pub fn evaluate(
    real_train: &Table,
    real_test: &Table,
    synth_raw: &Table,
    config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    if !same_columns(real_train, synth_raw) || !same_columns(real_train, real_test) {
        return Err(EvalError::SchemaMismatch);
    }
    let labels = utility::Labels::from_train(real_train)?;
    labels.check_present(real_test).map_err(EvalError::MissingClassInTest)?;

    let mut notes = Vec::new();
    let (n_collisions, clean) = collisions(real_train, synth_raw)?;
    let n_dup = duplicates(synth_raw);

    let (precision, recall) = if clean.len() > config.k && real_train.len() > config.k {
        let (r, s) = encode(real_train, &clean);
        let (p, rc) = precision_recall(&r, &s, ManifoldParams { k: config.k })?;
        (Some(p), Some(rc))
    } else {
        notes.push(format!(
            "precision/recall not computable: {} clean synthetic rows for k = {}",
            clean.len(),
            config.k
        ));
        (None, None)
    };

    let model = BaggedTrees::new(config.forest);
    let mut score = |synth: &Table, mode: UtilityMode, what: &str| {
        match utility(real_train, real_test, synth, mode, config.runs, config.seed, &model) {
            Ok(s) => Some(s.mean),
            Err(e) => {
                notes.push(format!("{what} not computable: {e}"));
                None
            }
        }
    };
    let tstr_auc = score(&clean, UtilityMode::Tstr, "TSTR utility");
    let combined_auc = score(synth_raw, UtilityMode::Combined, "combined utility");
    let original_auc = if config.original {
        score(synth_raw, UtilityMode::Original, "original utility")
    } else {
        None
    };

    Ok(EvalReport {
        n_real: real_train.len(),
        n_real_test: real_test.len(),
        n_synth_raw: synth_raw.len(),
        n_synth_clean: clean.len(),
        collisions: n_collisions,
        collision_rate: ratio(n_collisions, synth_raw.len()),
        duplicates: n_dup,
        duplicate_rate: ratio(n_dup, synth_raw.len()),
        precision,
        recall,
        tstr_auc,
        combined_auc,
        original_auc,
        k: config.k,
        runs: config.runs,
        notes,
    })
}

fn fmt2(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

impl EvalReport {
    /// Aligned text table with the utility, precision/recall and collision
    /// columns. Percentages carry two decimals.
    pub fn to_text_table(&self, label: &str) -> String {
        let headers = [
            "Model",
            "U. TSTR",
            "U. Comb",
            "Precision",
            "Recall",
            "Collisions [%]",
            "Duplicates [%]",
        ];
        let values = [
            label.to_string(),
            fmt2(self.tstr_auc),
            fmt2(self.combined_auc),
            fmt2(self.precision),
            fmt2(self.recall),
            format!("{:.2}", self.collision_rate * 100.0),
            format!("{:.2}", self.duplicate_rate * 100.0),
        ];
        let widths: Vec<usize> = headers.iter().zip(&values).map(|(h, v)| h.len().max(v.len())).collect();
        let mut out = String::new();
        let line = |cells: &[String], out: &mut String| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", padded.join(" | ").trim_end());
        };
        line(&headers.map(String::from), &mut out);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        let _ = writeln!(out, "{}", rule.join("-+-"));
        line(&values, &mut out);
        if let Some(o) = self.original_auc {
            let _ = writeln!(out, "\nOriginal (train on real): {o:.2}");
        }
        let _ = writeln!(
            out,
            "real train {} / test {}, synthetic {} raw / {} after collision removal, k = {}, runs = {}",
            self.n_real, self.n_real_test, self.n_synth_raw, self.n_synth_clean, self.k, self.runs
        );
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}
