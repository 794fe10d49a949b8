use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{format_float, DatasetProfile, FeatureKind, FeatureSpec, FeatureStats};

/// Column ordering used both for the feature description and for the rows
/// shown to the models.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureOrder {
    #[default]
    Original,
    CatFirst,
    NumFirst,
}

impl FeatureOrder {
    /// Stable permutation of column indices: entry `j` is the original index
    /// of the column shown at position `j`.
    pub fn arrange(self, kinds: &[FeatureKind]) -> Vec<usize> {
        let first = match self {
            FeatureOrder::Original => return (0..kinds.len()).collect(),
            FeatureOrder::CatFirst => FeatureKind::Categorical,
            FeatureOrder::NumFirst => FeatureKind::Numerical,
        };
        let (mut head, tail): (Vec<usize>, Vec<usize>) =
            (0..kinds.len()).partition(|&i| kinds[i] == first);
        head.extend(tail);
        head
    }

    pub fn arrange_schema(self, features: &[FeatureSpec]) -> Vec<usize> {
        self.arrange(&features.iter().map(|f| f.kind).collect::<Vec<_>>())
    }
}

/// Describes every feature: name, type, kind, and its distribution.
pub fn feature_info_block(profile: &DatasetProfile, order: FeatureOrder) -> String {
    let kinds: Vec<FeatureKind> = profile.features.iter().map(|f| f.kind()).collect();
    let mut out = String::from("Information about the features of the original dataset (name, type, kind):\n");
    for idx in order.arrange(&kinds) {
        let f = &profile.features[idx];
        let target = if f.is_target { ", target" } else { "" };
        let _ = write!(out, "- {} ({}, {}{target}): ", f.name, f.value_type, f.kind());
        match &f.stats {
            FeatureStats::Categorical { values } => {
                let listed: Vec<String> = values
                    .iter()
                    .map(|c| format!("{} {:.2}%", c.value, c.frequency * 100.0))
                    .collect();
                let _ = write!(out, "possible values {}", listed.join(", "));
            }
            FeatureStats::Numerical(s) => {
                let _ = write!(
                    out,
                    "mean {}, median {}, standard deviation {}",
                    format_float(s.mean),
                    format_float(s.median),
                    format_float(s.std)
                );
            }
        }
        out.push('\n');
    }
    out.pop();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{profile, read_csv_str};

    #[test]
    fn arrange_is_stable_partition() {
        use FeatureKind::*;
        let kinds = [Numerical, Categorical, Numerical, Categorical];
        assert_eq!(FeatureOrder::Original.arrange(&kinds), vec![0, 1, 2, 3]);
        assert_eq!(FeatureOrder::CatFirst.arrange(&kinds), vec![1, 3, 0, 2]);
        assert_eq!(FeatureOrder::NumFirst.arrange(&kinds), vec![0, 2, 1, 3]);
    }

    #[test]
    fn block_lists_values_and_moments() {
        let t = read_csv_str("n,c,y\n1,a,p\n2,a,q\n3,b,p\n", None).unwrap();
        let p = profile(&t).unwrap();
        let text = feature_info_block(&p, FeatureOrder::Original);
        assert!(text.contains("- n (int, numerical): mean 2, median 2, standard deviation 0.816497"), "{text}");
        assert!(text.contains("- c (string, categorical): possible values a 66.67%, b 33.33%"));
        assert!(text.contains("- y (string, categorical, target): possible values p 66.67%, q 33.33%"));
        let cat_first = feature_info_block(&p, FeatureOrder::CatFirst);
        assert!(cat_first.find("- c (").unwrap() < cat_first.find("- n (").unwrap());
    }
}
