use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DatasetError;

/// Whether a feature is treated as a set of discrete values or as a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Categorical,
    Numerical,
}

/// Physical type of the values stored in a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Int,
    Float,
    String,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Int => "int",
            ValueType::Float => "float",
            ValueType::String => "string",
        })
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Categorical => "categorical",
            FeatureKind::Numerical => "numerical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    pub value_type: ValueType,
    #[serde(default)]
    pub is_target: bool,
}

impl FeatureSpec {
    pub fn categorical(name: impl Into<String>, value_type: ValueType) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical,
            value_type,
            is_target: false,
        }
    }

    pub fn numerical(name: impl Into<String>, value_type: ValueType) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numerical,
            value_type,
            is_target: false,
        }
    }

    pub fn target(mut self) -> Self {
        self.is_target = true;
        self
    }

    /// Parses one raw cell. `""` and `"?"` become [`Cell::Missing`].
    ///
    /// Integers written as integral floats (`39.0`) are accepted in int columns.
    pub fn parse_cell(&self, raw: &str) -> Option<Cell> {
        let raw = raw.trim();
        if raw.is_empty() || raw == MISSING_MARKER {
            return Some(Cell::Missing);
        }
        match self.value_type {
            ValueType::Int => parse_int(raw).map(Cell::Int),
            ValueType::Float => parse_float(raw).map(Cell::Float),
            ValueType::String => Some(Cell::Text(raw.to_string())),
        }
    }

    pub fn accepts(&self, cell: &Cell) -> bool {
        matches!(
            (self.value_type, cell),
            (_, Cell::Missing)
                | (ValueType::Int, Cell::Int(_))
                | (ValueType::Float, Cell::Float(_))
                | (ValueType::String, Cell::Text(_))
        )
    }
}

/// Marker used for missing cells in every serialization.
pub const MISSING_MARKER: &str = "?";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }

    /// Canonical text form: ints without a decimal point, floats with at most
    /// six significant digits and no trailing zeros, `?` for missing.
    pub fn canonical(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Missing => MISSING_MARKER.to_string(),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Formats a float with up to 6 significant digits, trimming trailing zeros.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..15).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_fraction(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Removes digit-grouping separators (`1,234,567` or `1_234`) when the grouping
/// is well formed; otherwise returns the input unchanged.
fn strip_grouping(raw: &str) -> std::borrow::Cow<'_, str> {
    if !raw.contains([',', '_']) {
        return raw.into();
    }
    let sep = if raw.contains(',') { ',' } else { '_' };
    let (int_part, frac) = match raw.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (raw, None),
    };
    let unsigned = int_part.strip_prefix(['-', '+']).unwrap_or(int_part);
    let mut groups = unsigned.split(sep);
    let first = groups.next().unwrap_or_default();
    let first_ok = (1..=3).contains(&first.len()) && first.bytes().all(|b| b.is_ascii_digit());
    let rest_ok = groups.all(|g| g.len() == 3 && g.bytes().all(|b| b.is_ascii_digit()));
    if !(first_ok && rest_ok) || frac.is_some_and(|f| f.contains(sep)) {
        return raw.into();
    }
    raw.replace(sep, "").into()
}

pub(crate) fn parse_int(raw: &str) -> Option<i64> {
    let cleaned = strip_grouping(raw.trim());
    if let Ok(v) = cleaned.parse::<i64>() {
        return Some(v);
    }
    let v = cleaned.parse::<f64>().ok()?;
    (v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
}

pub(crate) fn parse_float(raw: &str) -> Option<f64> {
    let cleaned = strip_grouping(raw.trim());
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub(crate) fn parses_as_strict_int(raw: &str) -> bool {
    strip_grouping(raw.trim()).parse::<i64>().is_ok()
}

pub type Row = Vec<Cell>;

/// Ordered list of features with exactly one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FeatureSpec>", into = "Vec<FeatureSpec>")]
pub struct Schema {
    features: Vec<FeatureSpec>,
    target: usize,
}

impl Schema {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for f in &features {
            if f.name.trim().is_empty() {
                return Err(DatasetError::InvalidSchema("empty feature name".into()));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(DatasetError::DuplicateName(f.name.clone()));
            }
            if f.kind == FeatureKind::Numerical && f.value_type == ValueType::String {
                return Err(DatasetError::InvalidSchema(format!(
                    "numerical feature '{}' must be int or float",
                    f.name
                )));
            }
        }
        let targets: Vec<usize> = features
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.is_target.then_some(i))
            .collect();
        let target = match targets.as_slice() {
            [t] => *t,
            [] => return Err(DatasetError::InvalidSchema("no target feature".into())),
            _ => {
                return Err(DatasetError::InvalidSchema(
                    "more than one target feature".into(),
                ))
            }
        };
        if features[target].kind != FeatureKind::Categorical {
            return Err(DatasetError::InvalidSchema(format!(
                "target '{}' must be categorical",
                features[target].name
            )));
        }
        Ok(Self { features, target })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &FeatureSpec {
        &self.features[self.target]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    /// Same schema with the target moved to `name`.
    pub fn with_target(&self, name: &str) -> Result<Self, DatasetError> {
        let idx = self
            .index_of(name)
            .ok_or_else(|| DatasetError::UnknownFeature(name.to_string()))?;
        let features = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let mut f = f.clone();
                f.is_target = i == idx;
                if f.is_target {
                    f.kind = FeatureKind::Categorical;
                }
                f
            })
            .collect();
        Self::new(features)
    }

    /// Schema with columns permuted so that column `j` is old column `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let features: Vec<_> = order.iter().map(|&i| self.features[i].clone()).collect();
        Self::new(features).expect("permutation keeps schema valid")
    }
}

impl TryFrom<Vec<FeatureSpec>> for Schema {
    type Error = DatasetError;

    fn try_from(features: Vec<FeatureSpec>) -> Result<Self, Self::Error> {
        Schema::new(features)
    }
}

impl From<Schema> for Vec<FeatureSpec> {
    fn from(s: Schema) -> Self {
        s.features
    }
}

/// Schema plus rows; every row has one cell per feature, type-compatible with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    rows: Vec<Row>,
}

impl Table {
    pub fn new(schema: Schema, rows: Vec<Row>) -> Result<Self, DatasetError> {
        let mut table = Self::empty(schema);
        for row in rows {
            table.push_row(row)?;
        }
        Ok(table)
    }

    pub fn empty(schema: Schema) -> Self {
        Self {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Row) -> Result<(), DatasetError> {
        self.check_row(&row)?;
        self.rows.push(row);
        Ok(())
    }

    fn check_row(&self, row: &[Cell]) -> Result<(), DatasetError> {
        if row.len() != self.schema.len() {
            return Err(DatasetError::RowArity {
                expected: self.schema.len(),
                found: row.len(),
            });
        }
        for (cell, spec) in row.iter().zip(self.schema.features()) {
            if !spec.accepts(cell) {
                return Err(DatasetError::CellType {
                    feature: spec.name.clone(),
                    value: cell.canonical(),
                });
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, idx: usize) -> impl Iterator<Item = &Cell> + '_ {
        self.rows.iter().map(move |r| &r[idx])
    }

    pub fn target_column(&self) -> impl Iterator<Item = &Cell> + '_ {
        self.column(self.schema.target_index())
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn extend(&mut self, other: &Table) -> Result<(), DatasetError> {
        if other.schema.names().ne(self.schema.names()) {
            return Err(DatasetError::SchemaMismatch);
        }
        for row in other.rows() {
            self.push_row(row.clone())?;
        }
        Ok(())
    }

    pub fn truncate(&mut self, len: usize) {
        self.rows.truncate(len);
    }

    /// Table with columns permuted like [`Schema::permuted`].
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            schema: self.schema.permuted(order),
            rows: self
                .rows
                .iter()
                .map(|r| order.iter().map(|&i| r[i].clone()).collect())
                .collect(),
        }
    }

    pub fn with_target(&self, name: &str) -> Result<Self, DatasetError> {
        Table::new(self.schema.with_target(name)?, self.rows.clone())
    }

    /// Canonical identity of a row, used for collision and duplicate checks.
    pub fn row_key(&self, idx: usize) -> String {
        row_key(&self.rows[idx])
    }
}

pub(crate) fn row_key(row: &[Cell]) -> String {
    let mut key = String::new();
    for (i, cell) in row.iter().enumerate() {
        if i > 0 {
            key.push('\u{1f}');
        }
        key.push_str(&cell.canonical());
    }
    key
}
