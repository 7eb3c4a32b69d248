use crate::error::{Error, Result};

/// Inverse-class-frequency sample weights: class `c` gets `n / (2 * n_c)`, so both
/// classes carry equal total weight.
pub fn class_weights(labels: &[u8]) -> Result<Vec<f64>> {
    let n = labels.len();
    let n1 = labels.iter().filter(|&&y| y == 1).count();
    let n0 = labels.iter().filter(|&&y| y == 0).count();
    if n0 + n1 != n {
        return Err(Error::InvalidInput("labels must be 0 or 1".into()));
    }
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass);
    }
    let w0 = n as f64 / (2.0 * n0 as f64);
    let w1 = n as f64 / (2.0 * n1 as f64);
    Ok(labels.iter().map(|&y| if y == 1 { w1 } else { w0 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eighty_percent_negatives() {
        let labels: Vec<u8> = (0..10).map(|i| u8::from(i < 2)).collect();
        let w = class_weights(&labels).unwrap();
        assert_eq!(w[0], 2.5);
        assert_eq!(w[9], 0.625);
    }

    #[test]
    fn balanced_is_unit() {
        assert_eq!(class_weights(&[0, 1, 1, 0]).unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(class_weights(&[1, 1, 1]), Err(Error::SingleClass)));
    }

    proptest! {
        #[test]
        fn weighted_class_totals_are_equal(labels in proptest::collection::vec(0u8..2, 2..300)) {
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let w = class_weights(&labels).unwrap();
            let pos: f64 = w.iter().zip(&labels).filter(|(_, &y)| y == 1).map(|(w, _)| w).sum();
            let neg: f64 = w.iter().zip(&labels).filter(|(_, &y)| y == 0).map(|(w, _)| w).sum();
            prop_assert!((pos - neg).abs() < 1e-9 * labels.len() as f64);
            prop_assert!((pos + neg - labels.len() as f64).abs() < 1e-9 * labels.len() as f64);
        }
    }
}
