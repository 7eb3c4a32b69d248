//! Stratified k-fold cross-validation and grid search by validation AUC.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gbt::{train_gbt_binned, Binned, GbtParams};
use super::logistic::{train_lr, LrParams};
use super::{Hyper, ModelKind};
use crate::cohort::Design;
use crate::error::{Error, Result};
use crate::rng::sub_stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub lr_l2: Vec<f64>,
    pub gbt_trees: Vec<usize>,
    pub gbt_depth: Vec<usize>,
    pub gbt_learning_rate: Vec<f64>,
    pub gbt_min_child_weight: Vec<f64>,
    #[serde(default = "default_bins")]
    pub gbt_max_bins: usize,
}

fn default_bins() -> usize {
    64
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            lr_l2: vec![0.001, 0.01, 0.1, 1.0, 10.0],
            gbt_trees: vec![100, 300],
            gbt_depth: vec![2, 3, 4, 6],
            gbt_learning_rate: vec![0.05, 0.1, 0.3],
            gbt_min_child_weight: vec![1.0, 10.0],
            gbt_max_bins: default_bins(),
        }
    }
}

impl HyperGrid {
    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        let empty = match kind {
            ModelKind::Lr => self.lr_l2.is_empty(),
            ModelKind::Gbt => {
                self.gbt_trees.is_empty()
                    || self.gbt_depth.is_empty()
                    || self.gbt_learning_rate.is_empty()
                    || self.gbt_min_child_weight.is_empty()
            }
        };
        if empty {
            return Err(Error::Config(format!("{kind} hyperparameter grid has an empty list")));
        }
        if kind == ModelKind::Gbt && !(2..=255).contains(&self.gbt_max_bins) {
            return Err(Error::Config("gbt_max_bins must be in 2..=255".into()));
        }
        Ok(())
    }

    /// Candidate configurations in declared order (earlier lists vary slowest).
    pub fn configs(&self, kind: ModelKind) -> Vec<Hyper> {
        match kind {
            ModelKind::Lr => self.lr_l2.iter().map(|&l2| Hyper::Lr(LrParams::with_l2(l2))).collect(),
            ModelKind::Gbt => {
                let mut out = Vec::new();
                for &trees in &self.gbt_trees {
                    for &max_depth in &self.gbt_depth {
                        for &learning_rate in &self.gbt_learning_rate {
                            for &min_child_weight in &self.gbt_min_child_weight {
                                out.push(Hyper::Gbt(GbtParams {
                                    trees,
                                    max_depth,
                                    learning_rate,
                                    min_child_weight,
                                    lambda: 1.0,
                                    max_bins: self.gbt_max_bins,
                                }));
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

/// Assigns each row a fold in `0..k`, shuffling within each class so every fold
/// holds the class counts to within one row.
pub fn stratified_folds(y: &[f64], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = sub_stream(seed, "cv-folds");
    let mut folds = vec![0; y.len()];
    for class in [0.0, 1.0] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            folds[i] = pos % k;
        }
    }
    folds
}

/// Area under the ROC curve via the rank-sum statistic, ties averaged.
/// `None` when either class is absent.
pub fn auc(scores: &[f64], y: &[f64]) -> Option<f64> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    let n1 = y.iter().filter(|&&v| v == 1.0).count() as f64;
    let n0 = n as f64 - n1;
    if n1 == 0.0 || n0 == 0.0 {
        return None;
    }
    let r1: f64 = ranks.iter().zip(y).filter(|(_, &v)| v == 1.0).map(|(r, _)| r).sum();
    Some((r1 - n1 * (n1 + 1.0) / 2.0) / (n1 * n0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub hyper: Hyper,
    pub fold_auc: Vec<f64>,
    pub mean_auc: Option<f64>,
    /// Set when any fold failed; the configuration is then disqualified.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best: Hyper,
    pub best_auc: f64,
    pub table: Vec<CvRow>,
}

struct FoldData {
    train_x: Design,
    train_y: Vec<f64>,
    train_w: Vec<f64>,
    val_x: Design,
    val_y: Vec<f64>,
}

fn fold_data(x: &Design, y: &[f64], w: &[f64], folds: &[usize], k: usize) -> Vec<FoldData> {
    (0..k)
        .map(|f| {
            let tr: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != f).collect();
            let va: Vec<usize> = (0..y.len()).filter(|&i| folds[i] == f).collect();
            FoldData {
                train_x: x.select_rows(&tr),
                train_y: tr.iter().map(|&i| y[i]).collect(),
                train_w: tr.iter().map(|&i| w[i]).collect(),
                val_x: x.select_rows(&va),
                val_y: va.iter().map(|&i| y[i]).collect(),
            }
        })
        .collect()
}

/// Selects hyperparameters by mean validation AUC over stratified folds.
///
/// Ties go to the first configuration in declared grid order. For boosted trees,
/// configurations differing only in tree count share one fit per fold and are
/// scored on the staged predictions. Results do not depend on thread scheduling.
pub fn grid_search_cv(
    x: &Design,
    y: &[f64],
    weights: &[f64],
    kind: ModelKind,
    grid: &HyperGrid,
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    if k < 2 {
        return Err(Error::Config("cross-validation needs k >= 2".into()));
    }
    grid.validate(kind)?;
    let configs = grid.configs(kind);
    let folds = stratified_folds(y, k, seed);
    let data = fold_data(x, y, weights, &folds, k);
    let gbt_seed = crate::rng::derive_seed(seed, "gbt");

    // One task per (fit group, fold). A fit group is a config for LR, or a
    // (depth, eta, min child weight) triple trained to the largest tree count for GBT.
    let groups: Vec<(Hyper, Vec<usize>)> = match kind {
        ModelKind::Lr => configs.iter().enumerate().map(|(i, h)| (*h, vec![i])).collect(),
        ModelKind::Gbt => {
            let mut groups: Vec<(Hyper, Vec<usize>)> = Vec::new();
            let max_trees = grid.gbt_trees.iter().copied().max().unwrap_or(0);
            for (i, h) in configs.iter().enumerate() {
                let Hyper::Gbt(p) = h else { unreachable!() };
                let key = GbtParams { trees: max_trees, ..*p };
                match groups.iter_mut().find(|(g, _)| *g == Hyper::Gbt(key)) {
                    Some((_, members)) => members.push(i),
                    None => groups.push((Hyper::Gbt(key), vec![i])),
                }
            }
            groups
        }
    };
    let binned: Vec<Option<Binned>> = match kind {
        ModelKind::Lr => (0..k).map(|_| None).collect(),
        ModelKind::Gbt => data
            .par_iter()
            .map(|d| Some(Binned::new(&d.train_x, grid.gbt_max_bins)))
            .collect(),
    };
    let tasks: Vec<(usize, usize)> = (0..groups.len()).flat_map(|g| (0..k).map(move |f| (g, f))).collect();
    let results: Vec<Result<Vec<Option<f64>>>> = tasks
        .par_iter()
        .map(|&(g, f)| {
            let (hyper, members) = &groups[g];
            let d = &data[f];
            let model = match hyper {
                Hyper::Lr(p) => train_lr(&d.train_x, &d.train_y, &d.train_w, p)?,
                Hyper::Gbt(p) => train_gbt_binned(&d.train_x, binned[f].as_ref(), &d.train_y, &d.train_w, p, gbt_seed)?,
            };
            let checkpoints: Vec<usize> = members
                .iter()
                .map(|&i| match configs[i] {
                    Hyper::Gbt(p) => p.trees,
                    Hyper::Lr(_) => 0,
                })
                .collect();
            let staged = model.staged_margins(&d.val_x, &checkpoints)?;
            Ok(staged.iter().map(|m| auc(m, &d.val_y)).collect())
        })
        .collect();

    let mut fold_auc: Vec<Vec<f64>> = vec![Vec::with_capacity(k); configs.len()];
    let mut errors: Vec<Option<String>> = vec![None; configs.len()];
    for (&(g, _), res) in tasks.iter().zip(results) {
        let members = &groups[g].1;
        match res {
            Ok(aucs) => {
                for (&i, a) in members.iter().zip(aucs) {
                    match a {
                        Some(v) => fold_auc[i].push(v),
                        None => {
                            errors[i].get_or_insert_with(|| "validation fold has a single class".into());
                        }
                    }
                }
            }
            Err(e) => {
                for &i in members {
                    errors[i].get_or_insert_with(|| e.to_string());
                }
            }
        }
    }

    let table: Vec<CvRow> = configs
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let mean = errors[i]
                .is_none()
                .then(|| fold_auc[i].iter().sum::<f64>() / fold_auc[i].len() as f64);
            CvRow {
                hyper: *h,
                fold_auc: fold_auc[i].clone(),
                mean_auc: mean,
                error: errors[i].clone(),
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, row) in table.iter().enumerate() {
        if let Some(m) = row.mean_auc {
            if best.map_or(true, |(_, b)| m > b) {
                best = Some((i, m));
            }
        }
    }
    let (bi, best_auc) = best.ok_or_else(|| {
        Error::InvalidInput(format!(
            "every configuration failed cross-validation: {}",
            table.iter().filter_map(|r| r.error.as_deref()).next().unwrap_or("unknown")
        ))
    })?;
    Ok(CvResult {
        best: table[bi].hyper,
        best_auc,
        table,
    })
}
