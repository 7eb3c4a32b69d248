use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::tests::StatTestResult;
use crate::cohort::{Design, ProtectedAttribute};
use crate::error::{Error, Result};
use crate::learners::{train_lr, LrParams, TrainStatus};

/// Ridge strength used by the auxiliary regressions so empty or separated
/// cells keep finite coefficients.
pub const PENALTY_FLOOR: f64 = 1e-6;

/// Adjusted McFadden R²: `1 - (model_ll - k) / null_ll`.
pub fn mcfadden_adj_r2(model_ll: f64, null_ll: f64, k: f64) -> Result<f64> {
    let tol = 1e-9 * null_ll.abs().max(1.0);
    if !(null_ll < 0.0) || !model_ll.is_finite() || model_ll < null_ll - tol {
        return Err(Error::InvalidLikelihoods { model_ll, null_ll });
    }
    Ok(1.0 - (model_ll - k) / null_ll)
}

/// Log-likelihood of the intercept-only model.
pub fn null_log_likelihood(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let n1: f64 = y.iter().sum();
    let n0 = n - n1;
    let term = |c: f64| if c > 0.0 { c * (c / n).ln() } else { 0.0 };
    term(n1) + term(n0)
}

/// Full factorial expansion of the four protected flags: 4 main effects,
/// 6 two-way, 4 three-way and 1 four-way product.
pub fn interaction_terms(groups: &[[bool; 4]]) -> Design {
    let mut subsets: Vec<Vec<usize>> = (1u32..16).map(|m| (0..4).filter(|b| m >> b & 1 == 1).collect()).collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let names = subsets
        .iter()
        .map(|s| {
            s.iter()
                .map(|&i| ProtectedAttribute::ALL[i].column())
                .collect::<Vec<_>>()
                .join("*")
        })
        .collect();
    let mut data = Vec::with_capacity(groups.len() * subsets.len());
    for g in groups {
        for s in &subsets {
            data.push(if s.iter().all(|&i| g[i]) { 1.0 } else { 0.0 });
        }
    }
    Design {
        names,
        n_rows: groups.len(),
        n_cols: subsets.len(),
        data,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionTestResult {
    pub model_ll: f64,
    pub null_ll: f64,
    pub k: f64,
    pub adj_r2: f64,
    /// Likelihood-ratio test of the 15 terms against the intercept-only model.
    pub test: StatTestResult,
    pub status: TrainStatus,
}

fn fit_ll(x: &Design, y: &[f64]) -> Result<(f64, TrainStatus)> {
    let w = vec![1.0; y.len()];
    let params = LrParams {
        l2: PENALTY_FLOOR,
        max_iter: 200,
        tol: 1e-8,
    };
    let model = train_lr(x, y, &w, &params)?;
    Ok((model.log_likelihood(x, y)?, model.meta.status))
}

fn parameter_count(n_features: usize, count_intercept: bool) -> f64 {
    (n_features + usize::from(count_intercept)) as f64
}

/// Saturated logistic model of dropout on the protected attributes.
pub fn protected_interaction_test(groups: &[[bool; 4]], dropout: &[u8], count_intercept: bool) -> Result<InteractionTestResult> {
    if groups.len() != dropout.len() {
        return Err(Error::LengthMismatch {
            left: groups.len(),
            right: dropout.len(),
        });
    }
    let y: Vec<f64> = dropout.iter().map(|&v| f64::from(v)).collect();
    let x = interaction_terms(groups);
    let (model_ll, status) = fit_ll(&x, &y)?;
    let null_ll = null_log_likelihood(&y);
    let k = parameter_count(x.n_cols, count_intercept);
    let adj_r2 = mcfadden_adj_r2(model_ll, null_ll, k)?;
    let stat = (2.0 * (model_ll - null_ll)).max(0.0);
    let df = x.n_cols as f64;
    let chi = ChiSquared::new(df).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(InteractionTestResult {
        model_ll,
        null_ll,
        k,
        adj_r2,
        test: StatTestResult {
            statistic: stat,
            df: Some(df),
            p_value: chi.sf(stat).clamp(0.0, 1.0),
            effect_size: Some(adj_r2),
        },
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingResult {
    pub attribute: ProtectedAttribute,
    pub model_ll: f64,
    pub null_ll: f64,
    pub k: f64,
    pub adj_r2: f64,
    pub status: TrainStatus,
}

/// How well the BLIND features predict each protected attribute.
pub fn encoding_test(blind: &Design, groups: &[[bool; 4]], count_intercept: bool) -> Result<Vec<EncodingResult>> {
    if groups.len() != blind.n_rows {
        return Err(Error::LengthMismatch {
            left: groups.len(),
            right: blind.n_rows,
        });
    }
    let k = parameter_count(blind.n_cols, count_intercept);
    ProtectedAttribute::ALL
        .iter()
        .map(|&attribute| {
            let y: Vec<f64> = groups.iter().map(|g| f64::from(u8::from(g[attribute.index()]))).collect();
            let null_ll = null_log_likelihood(&y);
            let (model_ll, status) = fit_ll(blind, &y)?;
            Ok(EncodingResult {
                attribute,
                model_ll,
                null_ll,
                k,
                adj_r2: mcfadden_adj_r2(model_ll, null_ll, k)?,
                status,
            })
        })
        .collect()
}
