//! Two-sample hypothesis tests and effect sizes. All p-values are two-sided.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub statistic: f64,
    pub df: Option<f64>,
    pub p_value: f64,
    pub effect_size: Option<f64>,
}

pub(crate) fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Pooled two-proportion z-test of `p1` (over `n1`) against `p2` (over `n2`).
pub fn two_proportion_ztest(p1: f64, n1: u64, p2: f64, n2: u64) -> Result<StatTestResult> {
    if n1 == 0 || n2 == 0 || !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) {
        return Err(Error::InvalidInput("proportions need positive counts and values in [0, 1]".into()));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (p1 * n1f + p2 * n2f) / (n1f + n2f);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Err(Error::DegenerateCounts(pooled));
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    let z = (p1 - p2) / se;
    Ok(StatTestResult {
        statistic: z,
        df: None,
        p_value: normal_two_sided(z),
        effect_size: None,
    })
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn check_sample(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(Error::DegenerateVariance);
    }
    let (m, v) = mean_var(x);
    if !(v > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    Ok((m, v))
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of freedom.
/// The effect size field carries Cohen's d.
pub fn welch_ttest(a: &[f64], b: &[f64]) -> Result<StatTestResult> {
    let (ma, va) = check_sample(a)?;
    let (mb, vb) = check_sample(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(StatTestResult {
        statistic: t,
        df: Some(df),
        p_value: p,
        effect_size: Some(cohens_d(a, b)?),
    })
}

/// Standardized mean difference `(mean_a - mean_b) / pooled_sd`.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    let (ma, va) = check_sample(a)?;
    let (mb, vb) = check_sample(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0)).sqrt();
    Ok((ma - mb) / pooled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_proportions() {
        let r = two_proportion_ztest(0.4, 100, 0.4, 250).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn degenerate_pooled_proportion() {
        assert!(matches!(two_proportion_ztest(0.0, 10, 0.0, 10), Err(Error::DegenerateCounts(_))));
        assert!(matches!(two_proportion_ztest(1.0, 10, 1.0, 10), Err(Error::DegenerateCounts(_))));
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 4.0, 8.0];
        let r = welch_ttest(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(cohens_d(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_variance() {
        assert!(matches!(welch_ttest(&[1.0], &[1.0, 2.0]), Err(Error::DegenerateVariance)));
        assert!(matches!(cohens_d(&[3.0, 3.0], &[1.0, 2.0]), Err(Error::DegenerateVariance)));
    }

    proptest! {
        #[test]
        fn swapping_negates_statistic(a in proptest::collection::vec(-10.0f64..10.0, 3..20), b in proptest::collection::vec(-10.0f64..10.0, 3..20)) {
            let f = welch_ttest(&a, &b);
            prop_assume!(f.is_ok());
            let (f, r) = (f.unwrap(), welch_ttest(&b, &a).unwrap());
            prop_assert!((f.statistic + r.statistic).abs() < 1e-12);
            prop_assert!((f.p_value - r.p_value).abs() < 1e-12);
        }

        #[test]
        fn ztest_symmetric(p1 in 0.01f64..0.99, p2 in 0.01f64..0.99, n1 in 1u64..5000, n2 in 1u64..5000) {
            let f = two_proportion_ztest(p1, n1, p2, n2).unwrap();
            let r = two_proportion_ztest(p2, n2, p1, n1).unwrap();
            prop_assert!((f.statistic + r.statistic).abs() < 1e-9);
            prop_assert!((f.p_value - r.p_value).abs() < 1e-12);
        }

        #[test]
        fn cohens_d_affine_invariant(a in proptest::collection::vec(-10.0f64..10.0, 3..20), b in proptest::collection::vec(-10.0f64..10.0, 3..20), scale in 0.1f64..10.0, shift in -50.0f64..50.0) {
            let d = cohens_d(&a, &b);
            prop_assume!(d.is_ok());
            let t = |x: &[f64]| x.iter().map(|v| v * scale + shift).collect::<Vec<_>>();
            let d2 = cohens_d(&t(&a), &t(&b)).unwrap();
            prop_assert!((d.unwrap() - d2).abs() < 1e-8);
        }
    }
}
