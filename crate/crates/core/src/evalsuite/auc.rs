use super::EvalError;

/// Area under the ROC curve as the normalized Mann-Whitney statistic:
/// `P(score+ > score-) + P(score+ == score-) / 2`.
///
/// The count of winning and tied pairs is accumulated exactly in integers
/// and divided once.
pub fn roc_auc(scores: &[(f64, bool)]) -> Result<f64, EvalError> {
    if scores.iter().any(|(s, _)| s.is_nan()) {
        return Err(EvalError::NanScore);
    }
    let n_pos = scores.iter().filter(|(_, y)| *y).count() as u128;
    let n_neg = scores.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // twice the Mann-Whitney U: 2 * wins + ties
    let mut doubled: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u128, 0u128);
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        doubled += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    Ok(doubled as f64 / (2 * n_pos * n_neg) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_enumerated_case() {
        // pairs (.9,.6) (.9,.1) (.4,.1) win, (.4,.6) loses: 3/4
        let s = [(0.9, true), (0.4, true), (0.6, false), (0.1, false)];
        assert_eq!(roc_auc(&s).unwrap(), 0.75);
    }

    #[test]
    fn perfect_and_tied() {
        assert_eq!(roc_auc(&[(0.8, true), (0.9, true), (0.1, false)]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[(0.5, true), (0.5, false), (0.5, false)]).unwrap(), 0.5);
        assert_eq!(roc_auc(&[(0.1, true), (0.9, false)]).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(roc_auc(&[(0.1, true)]), Err(EvalError::SingleClass)));
        assert!(matches!(roc_auc(&[]), Err(EvalError::SingleClass)));
        assert!(matches!(roc_auc(&[(f64::NAN, true), (0.1, false)]), Err(EvalError::NanScore)));
    }
}
