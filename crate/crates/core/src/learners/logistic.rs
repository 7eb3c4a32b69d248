//! Weighted L2-regularized logistic regression, fitted by damped Newton iterations
//! from a zero start.

use serde::{Deserialize, Serialize};

use super::{
    check_inputs, class_weight_summary, normalize_weights, sigmoid, Hyper, ModelKind, ModelParams,
    TrainStatus, TrainedModel, TrainingMeta, MODEL_VERSION,
};
use crate::cohort::Design;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    /// Strength of the `(l2 / 2) * ||w||^2` penalty; the intercept is not penalized.
    pub l2: f64,
    pub max_iter: usize,
    /// Convergence tolerance on the Euclidean gradient norm.
    pub tol: f64,
}

impl Default for LrParams {
    fn default() -> Self {
        Self {
            l2: 1.0,
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

impl LrParams {
    pub fn with_l2(l2: f64) -> Self {
        Self {
            l2,
            ..Self::default()
        }
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Penalized weighted negative log-likelihood and its gradient at
/// `theta = [intercept, coefficients...]`.
pub fn lr_loss_grad(x: &Design, y: &[f64], w: &[f64], l2: f64, theta: &[f64]) -> (f64, Vec<f64>) {
    let d = x.n_cols;
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for i in 0..x.n_rows {
        let row = x.row(i);
        let z = theta[0] + row.iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
        loss += w[i] * (softplus(z) - y[i] * z);
        let r = w[i] * (sigmoid(z) - y[i]);
        grad[0] += r;
        for (g, &v) in grad[1..].iter_mut().zip(row) {
            *g += r * v;
        }
    }
    for j in 1..=d {
        loss += 0.5 * l2 * theta[j] * theta[j];
        grad[j] += l2 * theta[j];
    }
    (loss, grad)
}

fn hessian(x: &Design, w: &[f64], l2: f64, theta: &[f64]) -> Vec<f64> {
    let m = x.n_cols + 1;
    let mut h = vec![0.0; m * m];
    let mut xt = vec![0.0; m];
    xt[0] = 1.0;
    for i in 0..x.n_rows {
        let row = x.row(i);
        xt[1..].copy_from_slice(row);
        let z = theta[0] + row.iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
        let p = sigmoid(z);
        let s = w[i] * p * (1.0 - p);
        if s == 0.0 {
            continue;
        }
        for a in 0..m {
            let sa = s * xt[a];
            if sa == 0.0 {
                continue;
            }
            let hrow = &mut h[a * m..a * m + m];
            for b in a..m {
                hrow[b] += sa * xt[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            h[a * m + b] = h[b * m + a];
        }
    }
    for j in 1..m {
        h[j * m + j] += l2;
    }
    h
}

/// Solves `h * x = b` for symmetric positive definite `h`, adding diagonal jitter
/// when the factorization breaks down.
fn solve_spd(h: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let scale = (0..m).map(|i| h[i * m + i].abs()).fold(0.0, f64::max).max(1e-300);
    for jitter in [0.0, 1e-12, 1e-9, 1e-6] {
        let mut l = vec![0.0; m * m];
        let mut ok = true;
        'outer: for i in 0..m {
            for j in 0..=i {
                let mut s = h[i * m + j];
                if i == j {
                    s += jitter * scale;
                }
                for k in 0..j {
                    s -= l[i * m + k] * l[j * m + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        ok = false;
                        break 'outer;
                    }
                    l[i * m + i] = s.sqrt();
                } else {
                    l[i * m + j] = s / l[j * m + j];
                }
            }
        }
        if !ok {
            continue;
        }
        let mut z = b.to_vec();
        for i in 0..m {
            let mut s = z[i];
            for k in 0..i {
                s -= l[i * m + k] * z[k];
            }
            z[i] = s / l[i * m + i];
        }
        for i in (0..m).rev() {
            let mut s = z[i];
            for k in i + 1..m {
                s -= l[k * m + i] * z[k];
            }
            z[i] = s / l[i * m + i];
        }
        return Some(z);
    }
    None
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fits weighted logistic regression minimizing NLL + `(l2/2)·||w||²`.
///
/// Weights are rescaled to mean 1 before fitting. Reaching `max_iter` yields
/// [`TrainStatus::Unconverged`] rather than an error.
pub fn train_lr(x: &Design, y: &[f64], weights: &[f64], params: &LrParams) -> Result<TrainedModel> {
    check_inputs(x, y, weights)?;
    if x.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logistic regression input contains NaN or infinity".into()));
    }
    let w = normalize_weights(weights);
    let total_w: f64 = w.iter().sum();
    let m = x.n_cols + 1;
    let mut theta = vec![0.0; m];
    let (mut loss, mut grad) = lr_loss_grad(x, y, &w, params.l2, &theta);
    let mut trace = vec![loss / total_w];
    let mut status = TrainStatus::Unconverged;
    let mut iterations = 0;

    while iterations < params.max_iter {
        if norm(&grad) <= params.tol {
            status = TrainStatus::Converged;
            break;
        }
        iterations += 1;
        let h = hessian(x, &w, params.l2, &theta);
        let dir = match solve_spd(&h, &grad) {
            Some(d) => d,
            None => grad.clone(),
        };
        let slope: f64 = -grad.iter().zip(&dir).map(|(g, d)| g * d).sum::<f64>();
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t - step * d).collect();
            let (l, g) = lr_loss_grad(x, y, &w, params.l2, &cand);
            if !l.is_finite() {
                return Err(Error::NonFinite("logistic loss diverged".into()));
            }
            // near the optimum the decrease drops below the rounding noise of the
            // summed loss; fall back to requiring a smaller gradient
            let within_noise = (l - loss).abs() <= 1e-12 * loss.abs().max(1.0);
            if l <= loss + 1e-4 * step * slope || (within_noise && norm(&g) < norm(&grad)) {
                theta = cand;
                loss = l;
                grad = g;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        trace.push(loss / total_w);
        if !accepted {
            // no further decrease is representable; accept the current point
            if norm(&grad) <= params.tol.max(1e-9 * total_w) {
                status = TrainStatus::Converged;
            }
            break;
        }
    }
    if iterations == params.max_iter && norm(&grad) <= params.tol {
        status = TrainStatus::Converged;
    }

    Ok(TrainedModel {
        version: MODEL_VERSION,
        kind: ModelKind::Lr,
        hyper: Hyper::Lr(*params),
        params: ModelParams::Lr {
            intercept: theta[0],
            coefficients: theta[1..].to_vec(),
        },
        feature_names: x.names.clone(),
        meta: TrainingMeta {
            class_weights: class_weight_summary(y, &w),
            seed: 0,
            cv_score: None,
            status,
            iterations,
            loss_trace: trace,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lr_coefs(m: &TrainedModel) -> (f64, Vec<f64>) {
        match &m.params {
            ModelParams::Lr { intercept, coefficients } => (*intercept, coefficients.clone()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn intercept_only_recovers_log_odds() {
        let x = Design::new(vec![], 8, vec![]).unwrap();
        let y = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let m = train_lr(&x, &y, &[1.0; 8], &LrParams::with_l2(0.0)).unwrap();
        let (b, _) = lr_coefs(&m);
        assert!((b - (1.0f64 / 3.0).ln()).abs() < 1e-6);
        assert_eq!(m.meta.status, TrainStatus::Converged);
    }

    #[test]
    fn separable_points_are_classified() {
        let rows = vec![
            vec![-2.0, -1.0],
            vec![-1.5, -2.0],
            vec![-1.0, -0.5],
            vec![1.0, 0.5],
            vec![1.5, 2.0],
            vec![2.0, 1.0],
        ];
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let x = Design::from_rows(&rows);
        let m = train_lr(&x, &y, &[1.0; 6], &LrParams::with_l2(0.01)).unwrap();
        let p = m.predict_proba(&x).unwrap();
        for (pi, yi) in p.iter().zip(&y) {
            assert_eq!(*pi >= 0.5, *yi == 1.0);
        }
    }

    #[test]
    fn final_loss_below_zero_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let y: Vec<f64> = (0..60).map(|_| f64::from(u8::from(rng.gen_bool(0.4)))).collect();
            let w: Vec<f64> = (0..60).map(|_| rng.gen_range(0.5..2.0)).collect();
            let x = Design::from_rows(&rows);
            let m = train_lr(&x, &y, &w, &LrParams::with_l2(0.1)).unwrap();
            assert!(m.meta.loss_trace.last().unwrap() <= &m.meta.loss_trace[0]);
        }
    }

    #[test]
    fn weight_doubling_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..50).map(|i| f64::from(u8::from(i % 3 == 0))).collect();
        let w: Vec<f64> = (0..50).map(|_| rng.gen_range(0.5..2.0)).collect();
        let w2: Vec<f64> = w.iter().map(|v| v * 2.0).collect();
        let x = Design::from_rows(&rows);
        let a = train_lr(&x, &y, &w, &LrParams::with_l2(1.0)).unwrap();
        let b = train_lr(&x, &y, &w2, &LrParams::with_l2(1.0)).unwrap();
        assert_eq!(a.predict_proba(&x).unwrap(), b.predict_proba(&x).unwrap());
    }

    #[test]
    fn rejects_nan_input() {
        let x = Design::from_rows(&[vec![f64::NAN], vec![1.0]]);
        assert!(matches!(
            train_lr(&x, &[0.0, 1.0], &[1.0, 1.0], &LrParams::default()),
            Err(Error::NonFinite(_))
        ));
    }
}
