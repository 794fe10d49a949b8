use std::collections::HashMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{roc_auc, Classifier, Encoder, EvalError};
use crate::dataset::{rng_for, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityMode {
    /// Train on synthetic rows only, test on real.
    Tstr,
    /// Train on equal counts of real and synthetic rows.
    Combined,
    /// Train on the real training rows (reference score).
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityScore {
    pub mean: f64,
    pub per_run: Vec<f64>,
}

/// The binary label mapping of a real training table: the least frequent
/// class is positive.
#[derive(Debug, Clone)]
pub(crate) struct Labels {
    pub positive: String,
    pub negative: String,
}

impl Labels {
    pub fn from_train(train: &Table) -> Result<Self, EvalError> {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for c in train.target_column().filter(|c| !c.is_missing()) {
            *counts.entry(c.canonical()).or_default() += 1;
        }
        if counts.len() > 2 {
            return Err(EvalError::MultiClass(counts.len()));
        }
        let mut classes: Vec<(String, usize)> = counts.into_iter().collect();
        classes.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        match classes.as_slice() {
            [(pos, _), (neg, _)] => Ok(Self { positive: pos.clone(), negative: neg.clone() }),
            _ => Err(EvalError::DegenerateLabels("real training data has a single class".into())),
        }
    }

    /// Indices of rows carrying one of the two known labels, with their label.
    fn labelled(&self, table: &Table) -> (Vec<usize>, Vec<bool>) {
        let mut idx = Vec::new();
        let mut y = Vec::new();
        for (i, c) in table.target_column().enumerate() {
            let label = c.canonical();
            if label == self.positive || label == self.negative {
                idx.push(i);
                y.push(label == self.positive);
            }
        }
        (idx, y)
    }

    pub fn check_present(&self, table: &Table) -> Result<(), String> {
        let labels: Vec<String> = table.target_column().map(Cell::canonical).collect();
        for l in [&self.positive, &self.negative] {
            if !labels.contains(l) {
                return Err(l.clone());
            }
        }
        Ok(())
    }
}

/// Mean test-set ROC AUC over `runs` seeded classifier fits.
///
/// In `Combined` mode each run draws `h = min(|real_train|, |synth|)` rows
/// without replacement from each side.
pub fn utility(
    real_train: &Table,
    real_test: &Table,
    synth: &Table,
    mode: UtilityMode,
    runs: usize,
    seed: u64,
    classifier: &dyn Classifier,
) -> Result<UtilityScore, EvalError> {
    if real_train.schema().names().ne(synth.schema().names())
        || real_train.schema().names().ne(real_test.schema().names())
    {
        return Err(EvalError::SchemaMismatch);
    }
    if runs == 0 {
        return Err(EvalError::ZeroRuns);
    }
    let labels = Labels::from_train(real_train)?;
    let encoder = Encoder::fit(real_train);
    let (test_idx, test_y) = labels.labelled(real_test);
    if !(test_y.contains(&true) && test_y.contains(&false)) {
        return Err(EvalError::DegenerateLabels("real test data must contain both classes".into()));
    }
    let test_x = encoder.transform(&real_test.select(&test_idx));

    let (real_idx, real_y) = labels.labelled(real_train);
    let real_x = encoder.transform(&real_train.select(&real_idx));
    let (synth_idx, synth_y) = labels.labelled(synth);
    let synth_x = encoder.transform(&synth.select(&synth_idx));
    if mode != UtilityMode::Original && synth_idx.is_empty() {
        return Err(EvalError::EmptyTraining);
    }

    let per_run = (0..runs as u64)
        .into_par_iter()
        .map(|run| {
            let run_seed = seed.wrapping_add(run.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let (x, y) = match mode {
                UtilityMode::Tstr => (synth_x.clone(), synth_y.clone()),
                UtilityMode::Original => (real_x.clone(), real_y.clone()),
                UtilityMode::Combined => {
                    let h = real_idx.len().min(synth_idx.len());
                    let mut rng = rng_for(run_seed, 1);
                    let r = sample(&mut rng, real_idx.len(), h).into_vec();
                    let s = sample(&mut rng, synth_idx.len(), h).into_vec();
                    let x = real_x.select(&r).stacked(&synth_x.select(&s));
                    let y = r.iter().map(|&i| real_y[i]).chain(s.iter().map(|&i| synth_y[i])).collect();
                    (x, y)
                }
            };
            if !(y.contains(&true) && y.contains(&false)) {
                return Err(EvalError::DegenerateLabels("training data must contain both classes".into()));
            }
            let scores = classifier.fit_predict(&x, &y, &test_x, run_seed);
            let pairs: Vec<(f64, bool)> = scores.into_iter().zip(test_y.iter().copied()).collect();
            roc_auc(&pairs)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let mean = per_run.iter().sum::<f64>() / per_run.len() as f64;
    Ok(UtilityScore { mean, per_run })
}
