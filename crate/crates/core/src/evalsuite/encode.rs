use std::collections::HashMap;

use serde::Serialize;

use crate::dataset::{Cell, FeatureKind, Table};

/// Dense row-major matrix of encoded points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodedMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
    column_map: Vec<ColumnBlock>,
}

/// Columns `start..start + width` of the matrix encode `feature`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnBlock {
    pub feature: String,
    pub start: usize,
    pub width: usize,
}

impl EncodedMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == d), "ragged rows");
        Self {
            n: rows.len(),
            d,
            data: rows.iter().flatten().copied().collect(),
            column_map: (0..d)
                .map(|i| ColumnBlock { feature: format!("x{i}"), start: i, width: 1 })
                .collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn column_map(&self) -> &[ColumnBlock] {
        &self.column_map
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { n: indices.len(), d: self.d, data, column_map: self.column_map.clone() }
    }

    /// Rows of `self` followed by rows of `other`; both must share columns.
    pub fn stacked(&self, other: &EncodedMatrix) -> Self {
        assert_eq!(self.d, other.d, "column count mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self { n: self.n + other.n, d: self.d, data, column_map: self.column_map.clone() }
    }
}

#[derive(Debug, Clone)]
enum Block {
    OneHot { col: usize, index: HashMap<String, usize> },
    ZScore { col: usize, mean: f64, std: f64 },
}

/// One-hot for categorical features, z-score for numerical ones, with all
/// statistics taken from the table it was fitted on.
///
/// Unseen categories encode as an all-zero block; missing cells encode as
/// zeros too (the mean, for numerical columns).
#[derive(Debug, Clone)]
pub struct Encoder {
    blocks: Vec<Block>,
    column_map: Vec<ColumnBlock>,
    width: usize,
}

impl Encoder {
    /// Fits on `real`. The target column is never encoded.
    pub fn fit(real: &Table) -> Self {
        let schema = real.schema();
        let mut blocks = Vec::new();
        let mut column_map = Vec::new();
        let mut start = 0;
        for (col, spec) in schema.features().iter().enumerate() {
            if spec.is_target {
                continue;
            }
            let (block, width) = match spec.kind {
                FeatureKind::Categorical => {
                    let mut vocab: Vec<String> = real
                        .column(col)
                        .filter(|c| !c.is_missing())
                        .map(Cell::canonical)
                        .collect();
                    vocab.sort();
                    vocab.dedup();
                    let width = vocab.len();
                    let index = vocab.into_iter().enumerate().map(|(i, v)| (v, i)).collect();
                    (Block::OneHot { col, index }, width)
                }
                FeatureKind::Numerical => {
                    let values: Vec<f64> = real.column(col).filter_map(Cell::as_f64).collect();
                    let n = values.len().max(1) as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                    (Block::ZScore { col, mean, std: var.sqrt() }, 1)
                }
            };
            blocks.push(block);
            column_map.push(ColumnBlock { feature: spec.name.clone(), start, width });
            start += width;
        }
        Self { blocks, column_map, width: start }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn transform(&self, table: &Table) -> EncodedMatrix {
        let mut data = vec![0.0; table.len() * self.width];
        for (r, row) in table.rows().iter().enumerate() {
            let out = &mut data[r * self.width..(r + 1) * self.width];
            for (block, map) in self.blocks.iter().zip(&self.column_map) {
                match block {
                    Block::OneHot { col, index } => {
                        if let Some(&i) = index.get(&row[*col].canonical()) {
                            out[map.start + i] = 1.0;
                        }
                    }
                    Block::ZScore { col, mean, std } => {
                        out[map.start] = match row[*col].as_f64() {
                            Some(v) if *std > 0.0 => (v - mean) / std,
                            _ => 0.0,
                        };
                    }
                }
            }
        }
        EncodedMatrix { n: table.len(), d: self.width, data, column_map: self.column_map.clone() }
    }
}

/// Encodes both tables with an encoder fitted on `real`, target excluded.
pub fn encode(real: &Table, synth: &Table) -> (EncodedMatrix, EncodedMatrix) {
    let encoder = Encoder::fit(real);
    (encoder.transform(real), encoder.transform(synth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::read_csv_str;

    #[test]
    fn width_counts_categories_plus_numericals() {
        let real = read_csv_str("c,x,y\nA,1,p\nB,3,q\nA,5,p\n", None).unwrap();
        let (a, b) = encode(&real, &real);
        assert_eq!(a.n_cols(), 3);
        assert_eq!(a, b);
        assert_eq!(a.row(0)[..2], [1.0, 0.0]);
        let std = (8.0f64 / 3.0).sqrt();
        assert!((a.get(0, 2) - (1.0 - 3.0) / std).abs() < 1e-12);
        assert_eq!(a.column_map()[1], ColumnBlock { feature: "x".into(), start: 2, width: 1 });
    }

    #[test]
    fn unseen_category_is_zero_block() {
        let real = read_csv_str("c,x,y\nA,1,p\nB,3,q\n", None).unwrap();
        let synth = read_csv_str("c,x,y\nC,1,p\n", None).unwrap();
        let (_, s) = encode(&real, &synth);
        assert_eq!(s.row(0)[..2], [0.0, 0.0]);
    }

    #[test]
    fn constant_numerical_maps_to_zero() {
        let real = read_csv_str("x,y\n4,p\n4,q\n", None).unwrap();
        let synth = read_csv_str("x,y\n9,p\n", None).unwrap();
        let (r, s) = encode(&real, &synth);
        assert_eq!(r.row(0), [0.0]);
        assert_eq!(s.row(0), [0.0]);
    }
}
