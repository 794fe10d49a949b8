use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::table::{parses_as_strict_int, parse_float, Cell, FeatureSpec, Row, Schema, Table, ValueType};
use super::DatasetError;

/// Loads a CSV file with a header row.
///
/// Without a schema hint every column is typed by inference and the last
/// column becomes the target.
pub fn load_csv(path: impl AsRef<Path>, schema_hint: Option<&[FeatureSpec]>) -> Result<Table, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv_str(&text, schema_hint)
}

pub fn read_csv_str(text: &str, schema_hint: Option<&[FeatureSpec]>) -> Result<Table, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(DatasetError::Empty),
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    let mut seen = HashSet::new();
    for name in &names {
        if name.is_empty() {
            return Err(DatasetError::InvalidSchema("empty header name".into()));
        }
        if !seen.insert(name.as_str()) {
            return Err(DatasetError::DuplicateName(name.clone()));
        }
    }

    let mut raw_rows: Vec<(u64, Vec<String>)> = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != names.len() {
            return Err(DatasetError::RaggedRow {
                line,
                expected: names.len(),
                found: record.len(),
            });
        }
        raw_rows.push((line, record.iter().map(str::to_string).collect()));
    }

    let schema = match schema_hint {
        Some(hint) => {
            if hint.len() != names.len() || hint.iter().zip(&names).any(|(f, n)| &f.name != n) {
                return Err(DatasetError::SchemaMismatch);
            }
            Schema::new(hint.to_vec())?
        }
        None => infer_schema(&names, &raw_rows)?,
    };

    let mut rows = Vec::with_capacity(raw_rows.len());
    for (line, raw) in raw_rows {
        let row: Row = raw
            .iter()
            .zip(schema.features())
            .map(|(value, spec)| {
                spec.parse_cell(value).ok_or_else(|| DatasetError::ParseCell {
                    line,
                    feature: spec.name.clone(),
                    value: value.clone(),
                })
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Table::new(schema, rows)
}

fn infer_schema(names: &[String], rows: &[(u64, Vec<String>)]) -> Result<Schema, DatasetError> {
    let last = names.len() - 1;
    let features = names
        .iter()
        .enumerate()
        .map(|(col, name)| {
            let values = rows
                .iter()
                .map(|(_, r)| r[col].as_str())
                .filter(|v| !v.is_empty() && *v != super::MISSING_MARKER);
            let mut any = false;
            let mut all_int = true;
            let mut all_num = true;
            for v in values {
                any = true;
                if !parses_as_strict_int(v) {
                    all_int = false;
                    if parse_float(v).is_none() {
                        all_num = false;
                        break;
                    }
                }
            }
            let value_type = match (any, all_int, all_num) {
                (true, true, _) => ValueType::Int,
                (true, false, true) => ValueType::Float,
                _ => ValueType::String,
            };
            let spec = if col == last || value_type == ValueType::String {
                FeatureSpec::categorical(name.clone(), value_type)
            } else {
                FeatureSpec::numerical(name.clone(), value_type)
            };
            if col == last {
                spec.target()
            } else {
                spec
            }
        })
        .collect();
    Schema::new(features)
}

fn csv_error(e: csv::Error) -> DatasetError {
    DatasetError::Csv(e.to_string())
}

/// Quotes a cell when it contains a delimiter, quote, or line break.
pub(crate) fn quote_cell(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub(crate) fn format_row(names_or_cells: impl IntoIterator<Item = String>) -> String {
    names_or_cells
        .into_iter()
        .map(|c| quote_cell(&c))
        .collect::<Vec<_>>()
        .join(",")
}

/// Canonical CSV text: header, one line per row, trailing newline.
pub fn write_csv_string(table: &Table) -> String {
    let mut out = format_row(table.schema().names().map(str::to_string));
    out.push('\n');
    for row in table.rows() {
        out.push_str(&format_row(row.iter().map(Cell::canonical)));
        out.push('\n');
    }
    out
}

pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    fs::write(path, write_csv_string(table)).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}
