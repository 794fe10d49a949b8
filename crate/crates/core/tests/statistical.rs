//! Seeded statistical checks of the baseline sampler and the utility harness.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tagal::dataset::{profile, read_csv_str, split, Table};
use tagal::evalsuite::{utility, BaggedTrees, UtilityMode};
use tagal::statgen::BaselineModel;

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// `u` drives the label: positive when `u > 0.2`, a clean threshold.
fn threshold_data(rng: &mut ChaCha8Rng, n: usize) -> Table {
    let mut csv = String::from("u,v,y\n");
    for _ in 0..n {
        let (u, v): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        csv.push_str(&format!("{u:.4},{v:.4},{}\n", if u > 0.2 { "p" } else { "n" }));
    }
    read_csv_str(&csv, None).unwrap()
}

#[test]
fn baseline_breaks_feature_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut csv = String::from("a,b,y\n");
    for _ in 0..2000 {
        let a: f64 = rng.random_range(0.0..10.0);
        let b = 2.0 * a + rng.random_range(-1.0..1.0);
        csv.push_str(&format!("{a:.3},{b:.3},{}\n", if a > 5.0 { "hi" } else { "lo" }));
    }
    let source = read_csv_str(&csv, None).unwrap();
    let col = |t: &Table, j: usize| -> Vec<f64> { t.column(j).map(|c| c.as_f64().unwrap()).collect() };
    assert!(pearson(&col(&source, 0), &col(&source, 1)) > 0.95);

    let synth = BaselineModel::new(&profile(&source).unwrap(), source.schema(), 21).unwrap().generate(50_000).unwrap();
    let r = pearson(&col(&synth, 0), &col(&synth, 1));
    assert!(r.abs() < 0.05, "r = {r}");
}

#[test]
fn train_copy_matches_original_utility() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let data = threshold_data(&mut rng, 1500);
    let s = split(&data, 22, 0.8).unwrap();
    let forest = BaggedTrees::default();
    let copy = utility(&s.train, &s.test, &s.train, UtilityMode::Tstr, 5, 22, &forest).unwrap();
    let original = utility(&s.train, &s.test, &s.train, UtilityMode::Original, 5, 22, &forest).unwrap();
    assert!((copy.mean - original.mean).abs() <= 0.02, "{} vs {}", copy.mean, original.mean);
    assert!(original.mean > 0.95);
}

#[test]
fn shuffled_labels_have_no_utility() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let data = threshold_data(&mut rng, 10_000);
    let s = split(&data, 23, 0.8).unwrap();

    let mut rows = s.train.rows().to_vec();
    let mut labels: Vec<_> = rows.iter().map(|r| r[2].clone()).collect();
    labels.shuffle(&mut rng);
    for (row, label) in rows.iter_mut().zip(labels) {
        row[2] = label;
    }
    let shuffled = Table::new(s.train.schema().clone(), rows).unwrap();
    let auc = utility(&s.train, &s.test, &shuffled, UtilityMode::Tstr, 5, 23, &BaggedTrees::default()).unwrap().mean;
    assert!((auc - 0.5).abs() <= 0.05, "auc = {auc}");
}
