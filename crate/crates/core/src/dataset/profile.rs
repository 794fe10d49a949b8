use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::table::{Cell, FeatureKind, Table, ValueType};
use super::DatasetError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryFrequency {
    /// Canonical text of the value.
    pub value: String,
    pub frequency: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary {
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureStats {
    Categorical { values: Vec<CategoryFrequency> },
    Numerical(NumericSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureProfile {
    pub name: String,
    pub value_type: ValueType,
    pub is_target: bool,
    pub missing: usize,
    pub stats: FeatureStats,
}

impl FeatureProfile {
    pub fn kind(&self) -> FeatureKind {
        match self.stats {
            FeatureStats::Categorical { .. } => FeatureKind::Categorical,
            FeatureStats::Numerical(_) => FeatureKind::Numerical,
        }
    }

    pub fn categories(&self) -> Option<&[CategoryFrequency]> {
        match &self.stats {
            FeatureStats::Categorical { values } => Some(values),
            FeatureStats::Numerical(_) => None,
        }
    }

    pub fn numeric(&self) -> Option<&NumericSummary> {
        match &self.stats {
            FeatureStats::Numerical(s) => Some(s),
            FeatureStats::Categorical { .. } => None,
        }
    }
}

/// Per-feature statistics of a table, in schema order.
///
/// Categorical values are listed by decreasing count, ties broken by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub n_rows: usize,
    pub features: Vec<FeatureProfile>,
    pub class_shares: Vec<CategoryFrequency>,
}

impl DatasetProfile {
    pub fn feature(&self, name: &str) -> Option<&FeatureProfile> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn target(&self) -> &FeatureProfile {
        self.features
            .iter()
            .find(|f| f.is_target)
            .expect("profile built from a valid schema")
    }

    pub fn class_labels(&self) -> Vec<&str> {
        self.class_shares.iter().map(|c| c.value.as_str()).collect()
    }
}

pub fn profile(table: &Table) -> Result<DatasetProfile, DatasetError> {
    if table.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut features = Vec::with_capacity(table.schema().len());
    for (idx, spec) in table.schema().features().iter().enumerate() {
        let cells: Vec<&Cell> = table.column(idx).filter(|c| !c.is_missing()).collect();
        let missing = table.len() - cells.len();
        let stats = match spec.kind {
            FeatureKind::Categorical => FeatureStats::Categorical {
                values: category_frequencies(cells.iter().map(|c| c.canonical())),
            },
            FeatureKind::Numerical => {
                let values: Vec<f64> = cells.iter().filter_map(|c| c.as_f64()).collect();
                FeatureStats::Numerical(
                    summarize(&values).ok_or_else(|| DatasetError::NoValues(spec.name.clone()))?,
                )
            }
        };
        features.push(FeatureProfile {
            name: spec.name.clone(),
            value_type: spec.value_type,
            is_target: spec.is_target,
            missing,
            stats,
        });
    }
    let class_shares = features[table.schema().target_index()]
        .categories()
        .expect("target is categorical")
        .to_vec();
    Ok(DatasetProfile {
        n_rows: table.len(),
        features,
        class_shares,
    })
}

pub(crate) fn category_frequencies(values: impl Iterator<Item = String>) -> Vec<CategoryFrequency> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut total = 0usize;
    for v in values {
        *counts.entry(v).or_default() += 1;
        total += 1;
    }
    let mut out: Vec<CategoryFrequency> = counts
        .into_iter()
        .map(|(value, count)| CategoryFrequency {
            value,
            frequency: count as f64 / total as f64,
            count,
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.value.cmp(&b.value)));
    out
}

pub(crate) fn summarize(values: &[f64]) -> Option<NumericSummary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    };
    Some(NumericSummary {
        mean,
        median,
        std: var.sqrt(),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        count: values.len(),
    })
}
