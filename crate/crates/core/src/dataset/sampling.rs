use std::collections::HashMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::table::Table;
use super::DatasetError;

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Table,
    pub test: Table,
    /// Row indices into the original table, in the order they appear in `train`.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub train_fraction: f64,
}

/// How rows are assigned to the train and test sides.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    #[default]
    Shuffle,
    Stratified,
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn train_len(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n - 1)
}

/// Seeded, unstratified train/test partition. The train side gets
/// `round(train_fraction * n)` rows, clamped so both sides are non-empty.
pub fn split(table: &Table, seed: u64, train_fraction: f64) -> Result<Split, DatasetError> {
    split_with(table, seed, train_fraction, SplitMode::Shuffle)
}

pub fn split_with(
    table: &Table,
    seed: u64,
    train_fraction: f64,
    mode: SplitMode,
) -> Result<Split, DatasetError> {
    if table.is_empty() {
        return Err(DatasetError::Empty);
    }
    if table.len() < 2 {
        return Err(DatasetError::TooFewRows(table.len()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(train_fraction));
    }
    let mut rng = rng_for(seed, 0);
    let (mut train_indices, mut test_indices) = match mode {
        SplitMode::Shuffle => {
            let mut idx: Vec<usize> = (0..table.len()).collect();
            idx.shuffle(&mut rng);
            let cut = train_len(table.len(), train_fraction);
            let test = idx.split_off(cut);
            (idx, test)
        }
        SplitMode::Stratified => {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (_, mut members) in class_groups(table) {
                members.shuffle(&mut rng);
                let cut = if members.len() < 2 {
                    members.len()
                } else {
                    train_len(members.len(), train_fraction)
                };
                test.extend(members.split_off(cut));
                train.extend(members);
            }
            train.shuffle(&mut rng);
            test.shuffle(&mut rng);
            (train, test)
        }
    };
    if test_indices.is_empty() {
        // Only reachable in stratified mode when every class is a singleton.
        test_indices.push(train_indices.pop().expect("at least two rows"));
    }
    Ok(Split {
        train: table.select(&train_indices),
        test: table.select(&test_indices),
        train_indices,
        test_indices,
        seed,
        train_fraction,
    })
}

/// Row indices grouped by target class. Classes are ordered by decreasing
/// size, ties by label, which is also the order used by the profile.
pub fn class_groups(table: &Table) -> Vec<(String, Vec<usize>)> {
    let mut groups: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, cell) in table.target_column().enumerate() {
        groups.entry(cell.canonical()).or_default().push(i);
    }
    let mut out: Vec<_> = groups.into_iter().collect();
    out.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Draws `per_class` rows for each class, grouped contiguously by class.
///
/// Sampling is without replacement unless the class has fewer rows than
/// `per_class`. Each `round_index` selects an independent random stream.
pub fn sample_few_shots(
    table: &Table,
    per_class: usize,
    seed: u64,
    round_index: u64,
) -> Result<Table, DatasetError> {
    if per_class == 0 {
        return Err(DatasetError::InvalidShots);
    }
    if table.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut rng = rng_for(seed, round_index.wrapping_add(1));
    let mut picked = Vec::with_capacity(per_class * 2);
    for (_, members) in class_groups(table) {
        if members.len() >= per_class {
            picked.extend(members.choose_multiple(&mut rng, per_class).copied());
        } else {
            picked.extend((0..per_class).map(|_| members[rng.random_range(0..members.len())]));
        }
    }
    Ok(table.select(&picked))
}
