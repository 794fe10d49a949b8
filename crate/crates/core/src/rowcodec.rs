//! The few-shot CSV block placed in prompts, and recovery of rows from
//! free-form model output.
//!
//! Parsing never fails: every candidate line is either accepted as a
//! schema-valid row or recorded in [`ParseReport::rejected`] with a reason.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{
    format_row, parse_float, parse_int, Cell, DatasetProfile, FeatureKind, Schema, Table, ValueType,
    MISSING_MARKER,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerializedBlock {
    pub text: String,
    pub n_rows: usize,
    pub class_order: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("cannot serialize an empty table")]
    Empty,
}

/// Renders rows as a header line plus one CSV line per row, with rows grouped
/// by class in order of first appearance. No trailing newline.
pub fn serialize(rows: &Table) -> Result<SerializedBlock, CodecError> {
    if rows.is_empty() {
        return Err(CodecError::Empty);
    }
    let mut class_order: Vec<String> = Vec::new();
    let mut by_class: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, label) in rows.target_column().map(Cell::canonical).enumerate() {
        if !by_class.contains_key(&label) {
            class_order.push(label.clone());
        }
        by_class.entry(label).or_default().push(i);
    }
    let mut lines = vec![format_row(rows.schema().names().map(str::to_string))];
    for label in &class_order {
        for &i in &by_class[label] {
            lines.push(format_row(rows.rows()[i].iter().map(Cell::canonical)));
        }
    }
    Ok(SerializedBlock {
        text: lines.join("\n"),
        n_rows: rows.len(),
        class_order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    WrongArity,
    TypeMismatch,
    EmptyCell,
    DuplicateHeader,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::WrongArity => "wrong_arity",
            RejectReason::TypeMismatch => "type_mismatch",
            RejectReason::EmptyCell => "empty_cell",
            RejectReason::DuplicateHeader => "duplicate_header",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedLine {
    pub line: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone)]
pub struct ParseReport {
    pub accepted: Table,
    pub rejected: Vec<RejectedLine>,
    /// Categorical cells whose text was altered by whitespace or case
    /// normalization before acceptance.
    pub coerced_count: usize,
}

impl ParseReport {
    pub fn candidate_lines(&self) -> usize {
        self.accepted.len() + self.rejected.len()
    }
}

/// Parses model output against `schema` without a known vocabulary.
pub fn parse_llm_output(text: &str, schema: &Schema) -> ParseReport {
    RowParser::new(schema.clone()).parse(text)
}

/// Output parser with optional per-feature vocabularies used to map
/// case/whitespace variants back onto known categorical values.
#[derive(Debug, Clone)]
pub struct RowParser {
    schema: Schema,
    header: Vec<String>,
    vocab: Vec<Option<HashMap<String, String>>>,
}

impl RowParser {
    pub fn new(schema: Schema) -> Self {
        let header = schema.names().map(normalize).collect();
        let vocab = vec![None; schema.len()];
        Self { schema, header, vocab }
    }

    /// Registers the categorical values listed in `profile`.
    pub fn with_vocabulary(mut self, profile: &DatasetProfile) -> Self {
        for (slot, spec) in self.vocab.iter_mut().zip(self.schema.features()) {
            if spec.kind != FeatureKind::Categorical || spec.value_type != ValueType::String {
                continue;
            }
            if let Some(cats) = profile.feature(&spec.name).and_then(|f| f.categories()) {
                *slot = Some(
                    cats.iter()
                        .map(|c| (normalize(&c.value), c.value.clone()))
                        .collect(),
                );
            }
        }
        self
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn parse(&self, text: &str) -> ParseReport {
        let mut accepted = Table::empty(self.schema.clone());
        let mut rejected = Vec::new();
        let mut coerced_count = 0;
        let mut header_seen = false;

        for raw_line in text.lines() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with("```") {
                continue;
            }
            let Some(cells) = split_line(line) else {
                rejected.push(RejectedLine {
                    line: raw_line.to_string(),
                    reason: RejectReason::WrongArity,
                });
                continue;
            };
            if cells.len() < 2 && self.schema.len() > 1 {
                // prose
                continue;
            }
            if cells.len() == self.header.len()
                && cells.iter().zip(&self.header).all(|(c, h)| normalize(c) == *h)
            {
                if header_seen {
                    rejected.push(RejectedLine {
                        line: raw_line.to_string(),
                        reason: RejectReason::DuplicateHeader,
                    });
                }
                header_seen = true;
                continue;
            }
            match self.parse_cells(&cells) {
                Ok((row, coerced)) => {
                    coerced_count += coerced;
                    accepted.push_row(row).expect("cells checked against schema");
                }
                Err(reason) => rejected.push(RejectedLine {
                    line: raw_line.to_string(),
                    reason,
                }),
            }
        }
        ParseReport {
            accepted,
            rejected,
            coerced_count,
        }
    }

    fn parse_cells(&self, cells: &[String]) -> Result<(Vec<Cell>, usize), RejectReason> {
        if cells.len() != self.schema.len() {
            return Err(RejectReason::WrongArity);
        }
        let mut coerced = 0;
        let mut row = Vec::with_capacity(cells.len());
        for ((raw, spec), vocab) in cells.iter().zip(self.schema.features()).zip(&self.vocab) {
            let value = raw.trim();
            if value.is_empty() {
                return Err(RejectReason::EmptyCell);
            }
            if value == MISSING_MARKER {
                row.push(Cell::Missing);
                continue;
            }
            let cell = match spec.value_type {
                ValueType::Int => Cell::Int(parse_int(value).ok_or(RejectReason::TypeMismatch)?),
                ValueType::Float => Cell::Float(parse_float(value).ok_or(RejectReason::TypeMismatch)?),
                ValueType::String => {
                    let canonical = match vocab {
                        Some(known) if !known.values().any(|v| v == value) => known
                            .get(&normalize(value))
                            .cloned()
                            .unwrap_or_else(|| value.to_string()),
                        _ => value.to_string(),
                    };
                    if canonical != *raw {
                        coerced += 1;
                    }
                    Cell::Text(canonical)
                }
            };
            row.push(cell);
        }
        Ok((row, coerced))
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Splits one CSV line honoring double quotes. `None` for malformed quoting.
fn split_line(line: &str) -> Option<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(line.as_bytes());
    let mut record = csv::StringRecord::new();
    match reader.read_record(&mut record) {
        Ok(true) => {}
        _ => return None,
    }
    let mut tail = csv::StringRecord::new();
    if !matches!(reader.read_record(&mut tail), Ok(false)) {
        return None;
    }
    Some(record.iter().map(str::to_string).collect())
}
