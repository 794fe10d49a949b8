//! Statistical baseline: every feature sampled independently from its
//! profiled marginal. Categorical features (the target included) draw from
//! the empirical value distribution; numerical features draw from a normal
//! with the profiled mean and standard deviation, clamped to the observed
//! range and rounded for int columns.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::Normal;

use crate::dataset::{rng_for, Cell, DatasetProfile, FeatureStats, Schema, Table, ValueType};

#[derive(Debug, thiserror::Error)]
pub enum StatgenError {
    #[error("profile has no entry for feature '{0}'")]
    MissingFeature(String),
    #[error("categorical feature '{0}' has no observed values")]
    NoValues(String),
    #[error("profile kind of feature '{0}' does not match the schema")]
    KindMismatch(String),
    #[error("profiled value '{value}' does not parse for feature '{feature}'")]
    BadValue { feature: String, value: String },
    #[error("row count must be at least 1")]
    ZeroRows,
}

enum Sampler {
    Categorical { values: Vec<Cell>, weights: WeightedIndex<usize> },
    Numerical { normal: Option<Normal<f64>>, mean: f64, min: f64, max: f64, int: bool },
}

pub struct BaselineModel {
    schema: Schema,
    samplers: Vec<Sampler>,
    seed: u64,
}

impl BaselineModel {
    pub fn new(profile: &DatasetProfile, schema: &Schema, seed: u64) -> Result<Self, StatgenError> {
        let mut samplers = Vec::with_capacity(schema.len());
        for spec in schema.features() {
            let fp = profile
                .feature(&spec.name)
                .ok_or_else(|| StatgenError::MissingFeature(spec.name.clone()))?;
            if fp.kind() != spec.kind {
                return Err(StatgenError::KindMismatch(spec.name.clone()));
            }
            let sampler = match &fp.stats {
                FeatureStats::Categorical { values } => {
                    if values.is_empty() {
                        return Err(StatgenError::NoValues(spec.name.clone()));
                    }
                    let cells = values
                        .iter()
                        .map(|c| {
                            spec.parse_cell(&c.value).ok_or_else(|| StatgenError::BadValue {
                                feature: spec.name.clone(),
                                value: c.value.clone(),
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let weights = WeightedIndex::new(values.iter().map(|c| c.count))
                        .map_err(|_| StatgenError::NoValues(spec.name.clone()))?;
                    Sampler::Categorical { values: cells, weights }
                }
                FeatureStats::Numerical(s) => Sampler::Numerical {
                    normal: (s.std > 0.0).then(|| Normal::new(s.mean, s.std).expect("finite positive std")),
                    mean: s.mean,
                    min: s.min,
                    max: s.max,
                    int: spec.value_type == ValueType::Int,
                },
            };
            samplers.push(sampler);
        }
        Ok(Self { schema: schema.clone(), samplers, seed })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn generate(&self, n: usize) -> Result<Table, StatgenError> {
        if n == 0 {
            return Err(StatgenError::ZeroRows);
        }
        let mut rng = rng_for(self.seed, 0);
        let mut table = Table::empty(self.schema.clone());
        for _ in 0..n {
            let row = self
                .samplers
                .iter()
                .map(|s| match s {
                    Sampler::Categorical { values, weights } => values[weights.sample(&mut rng)].clone(),
                    Sampler::Numerical { normal, mean, min, max, int } => {
                        let x = normal.map_or(*mean, |d| d.sample(&mut rng)).clamp(*min, *max);
                        if *int {
                            Cell::Int(x.round() as i64)
                        } else {
                            Cell::Float(x)
                        }
                    }
                })
                .collect();
            table.push_row(row).expect("sampled cells match the schema");
        }
        Ok(table)
    }
}

/// Profiles `table` and samples `n` rows from its independent marginals.
pub fn generate(profile: &DatasetProfile, schema: &Schema, seed: u64, n: usize) -> Result<Table, StatgenError> {
    BaselineModel::new(profile, schema, seed)?.generate(n)
}
