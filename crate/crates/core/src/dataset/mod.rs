//! Typed tables, CSV ingestion, seeded splits, profiling, and few-shot draws.
//!
//! Cells are stored typed ([`Cell`]) against an ordered [`Schema`] with exactly
//! one categorical target. Every serialization path uses the canonical cell
//! form from [`Cell::canonical`], so two rows are identical exactly when their
//! canonical strings match.

mod io;
mod profile;
mod sampling;
mod table;

pub use io::{load_csv, read_csv_str, write_csv, write_csv_string};
pub(crate) use io::format_row;
pub use profile::{profile, CategoryFrequency, DatasetProfile, FeatureProfile, FeatureStats, NumericSummary};
pub use sampling::{class_groups, sample_few_shots, split, split_with, Split, SplitMode, DEFAULT_TRAIN_FRACTION};
pub(crate) use sampling::rng_for;
pub use table::{format_float, Cell, FeatureKind, FeatureSpec, Row, Schema, Table, ValueType, MISSING_MARKER};
pub(crate) use table::{parse_float, parse_int, row_key};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("table is empty")]
    Empty,
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("duplicate feature name '{0}'")]
    DuplicateName(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("schema hint does not match the header")]
    SchemaMismatch,
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("line {line}: cannot parse '{value}' for feature '{feature}'")]
    ParseCell { line: u64, feature: String, value: String },
    #[error("row has {found} cells, schema has {expected}")]
    RowArity { expected: usize, found: usize },
    #[error("value '{value}' does not match the type of feature '{feature}'")]
    CellType { feature: String, value: String },
    #[error("numerical feature '{0}' has no non-missing values")]
    NoValues(String),
    #[error("need at least 2 rows to split, got {0}")]
    TooFewRows(usize),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("few-shot count per class must be at least 1")]
    InvalidShots,
}
