use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equal-width histograms over `[0, 1]` of predicted probabilities, split by
/// the actual outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityHistogram {
    pub edges: Vec<f64>,
    pub dropout: Vec<u64>,
    pub non_dropout: Vec<u64>,
}

fn bin_index(p: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let t = ((p - lo) / (hi - lo) * bins as f64).floor();
    if t < 0.0 {
        0
    } else {
        (t as usize).min(bins - 1)
    }
}

/// Counts of `values` in `bins` equal-width bins spanning `[lo, hi]`; values
/// outside the range go to the end bins.
pub fn histogram_counts(values: &[f64], lo: f64, hi: f64, bins: usize) -> (Vec<f64>, Vec<u64>) {
    let bins = bins.max(1);
    let edges = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
    let mut counts = vec![0; bins];
    if hi > lo {
        for &v in values {
            counts[bin_index(v, lo, hi, bins)] += 1;
        }
    } else {
        counts[0] = values.len() as u64;
    }
    (edges, counts)
}

pub fn probability_histogram(probs: &[f64], labels: &[u8], bins: usize) -> Result<ProbabilityHistogram> {
    if bins < 2 {
        return Err(Error::InvalidInput("histogram needs at least 2 bins".into()));
    }
    if probs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: probs.len(),
            right: labels.len(),
        });
    }
    let pos: Vec<f64> = probs.iter().zip(labels).filter(|(_, &y)| y != 0).map(|(&p, _)| p).collect();
    let neg: Vec<f64> = probs.iter().zip(labels).filter(|(_, &y)| y == 0).map(|(&p, _)| p).collect();
    let (edges, dropout) = histogram_counts(&pos, 0.0, 1.0, bins);
    let (_, non_dropout) = histogram_counts(&neg, 0.0, 1.0, bins);
    Ok(ProbabilityHistogram {
        edges,
        dropout,
        non_dropout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn single_bin_for_constant_probability() {
        let h = probability_histogram(&[0.5; 7], &[1, 0, 1, 0, 0, 0, 1], 10).unwrap();
        assert_eq!(h.dropout.iter().filter(|&&c| c > 0).count(), 1);
        let idx = h.dropout.iter().position(|&c| c > 0).unwrap();
        assert!(h.edges[idx] <= 0.5 && 0.5 < h.edges[idx + 1]);
        assert_eq!(h.dropout.iter().sum::<u64>(), 3);
        assert_eq!(h.non_dropout.iter().sum::<u64>(), 4);
    }

    #[test]
    fn uniform_probabilities_are_flat() {
        let mut rng = crate::rng::sub_stream(3, "hist");
        let p: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
        let h = probability_histogram(&p, &vec![0; p.len()], 10).unwrap();
        for c in h.non_dropout {
            assert!((c as f64 - 1000.0).abs() < 120.0, "{c}");
        }
    }

    #[test]
    fn endpoint_and_bin_validation() {
        let h = probability_histogram(&[0.0, 1.0], &[0, 0], 4).unwrap();
        assert_eq!(h.non_dropout, vec![1, 0, 0, 1]);
        assert!(probability_histogram(&[0.1], &[0], 1).is_err());
    }
}
