//! Second-order gradient boosting on logistic loss with histogram split finding.
//!
//! Feature values are bucketed by rank into at most `max_bins` bins computed from
//! the training rows. Missing values (NaN) occupy a separate slot and are routed
//! by a learned default direction at every split.

use serde::{Deserialize, Serialize};

use super::{
    check_inputs, class_weight_summary, logit, normalize_weights, sigmoid, Hyper, ModelKind,
    ModelParams, TrainStatus, TrainedModel, TrainingMeta, MODEL_VERSION, PROB_CLIP,
};
use crate::cohort::Design;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Minimum hessian sum (on mean-1 weights) in each child of a split.
    pub min_child_weight: f64,
    /// L2 regularization on leaf values.
    pub lambda: f64,
    pub max_bins: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_child_weight: 1.0,
            lambda: 1.0,
            max_bins: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        /// Rows with `x <= threshold` go left.
        threshold: f64,
        default_left: bool,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    let v = row[*feature];
                    let go_left = if v.is_nan() { *default_left } else { v <= *threshold };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }
}

/// Midpoint strictly below `b`, so `a` bins left and `b` bins right.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    if m >= b {
        a
    } else {
        m
    }
}

/// Bin edges from the sorted non-missing values of one feature, chosen by rank.
pub fn bin_edges(sorted: &[f64], max_bins: usize) -> Vec<f64> {
    let mut distinct: Vec<f64> = sorted.to_vec();
    distinct.dedup();
    if distinct.len() <= 1 {
        return Vec::new();
    }
    if distinct.len() <= max_bins {
        return distinct.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    }
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::with_capacity(max_bins - 1);
    for q in 1..max_bins {
        let v = sorted[q * n / max_bins];
        let j = distinct.partition_point(|d| *d < v);
        if j == 0 {
            continue;
        }
        let e = midpoint(distinct[j - 1], distinct[j]);
        if edges.last().map_or(true, |&last| e > last) {
            edges.push(e);
        }
    }
    edges
}

/// Training rows bucketed per feature; slot `n_bins(f)` holds missing values.
/// Histogram slot: gradient sum, hessian sum, row count.
type Slot = [f64; 3];

pub(crate) struct Binned {
    n_cols: usize,
    bins: Vec<u8>,
    edges: Vec<Vec<f64>>,
    offsets: Vec<usize>,
    slots: usize,
    /// Most frequent slot of each feature; its totals are derived from the node totals.
    default_slot: Vec<usize>,
    /// CSR list of each row's slots that differ from the feature default.
    row_ptr: Vec<usize>,
    entries: Entries,
}

enum Entries {
    Narrow(Vec<u16>),
    Wide(Vec<u32>),
}

fn accumulate<T: Copy>(entries: &[T], row_ptr: &[usize], gh: &[[f64; 2]], rows: &[u32], out: &mut [Slot], idx: impl Fn(T) -> usize) {
    for &r in rows {
        let r = r as usize;
        let [g, h] = gh[r];
        for &s in &entries[row_ptr[r]..row_ptr[r + 1]] {
            let s = &mut out[idx(s)];
            s[0] += g;
            s[1] += h;
            s[2] += 1.0;
        }
    }
}

impl Binned {
    pub(crate) fn new(x: &Design, max_bins: usize) -> Self {
        let (n, d) = (x.n_rows, x.n_cols);
        let mut edges = Vec::with_capacity(d);
        for j in 0..d {
            let mut v: Vec<f64> = (0..n).map(|i| x.get(i, j)).filter(|v| !v.is_nan()).collect();
            v.sort_by(f64::total_cmp);
            edges.push(bin_edges(&v, max_bins));
        }
        let mut offsets = Vec::with_capacity(d);
        let mut slots = 0;
        for e in &edges {
            offsets.push(slots);
            slots += e.len() + 2;
        }
        let mut bins = vec![0u8; n * d];
        let mut freq = vec![0usize; slots];
        for i in 0..n {
            for j in 0..d {
                let v = x.get(i, j);
                let e = &edges[j];
                let b = if v.is_nan() { e.len() + 1 } else { e.partition_point(|t| *t < v) };
                bins[i * d + j] = b as u8;
                freq[offsets[j] + b] += 1;
            }
        }
        let default_slot: Vec<usize> = (0..d)
            .map(|j| {
                let range = offsets[j]..offsets[j] + edges[j].len() + 2;
                let mut best = range.start;
                for s in range {
                    if freq[s] > freq[best] {
                        best = s;
                    }
                }
                best
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut entries = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..d {
                let s = offsets[j] + bins[i * d + j] as usize;
                if s != default_slot[j] {
                    entries.push(s as u32);
                }
            }
            row_ptr.push(entries.len());
        }
        let entries = if slots <= usize::from(u16::MAX) + 1 {
            Entries::Narrow(entries.iter().map(|&s| s as u16).collect())
        } else {
            Entries::Wide(entries)
        };
        Self {
            n_cols: d,
            bins,
            edges,
            offsets,
            slots,
            default_slot,
            row_ptr,
            entries,
        }
    }

    fn n_bins(&self, f: usize) -> usize {
        self.edges[f].len() + 1
    }

    fn build_hist(&self, gh: &[[f64; 2]], rows: &[u32], total: Slot, out: &mut [Slot]) {
        out.fill([0.0; 3]);
        match &self.entries {
            Entries::Narrow(e) => accumulate(e, &self.row_ptr, gh, rows, out, usize::from),
            Entries::Wide(e) => accumulate(e, &self.row_ptr, gh, rows, out, |s| s as usize),
        }
        for f in 0..self.n_cols {
            let base = self.offsets[f];
            let def = self.default_slot[f];
            let mut rest = [0.0; 3];
            for s in &out[base..base + self.n_bins(f) + 1] {
                rest[0] += s[0];
                rest[1] += s[1];
                rest[2] += s[2];
            }
            let n = total[2] - rest[2];
            out[def] = if n == 0.0 {
                [0.0; 3]
            } else {
                [total[0] - rest[0], total[1] - rest[1], n]
            };
        }
    }
}

fn node_total(gh: &[[f64; 2]], rows: &[u32]) -> Slot {
    rows.iter().fold([0.0; 3], |a, &r| {
        let [g, h] = gh[r as usize];
        [a[0] + g, a[1] + h, a[2] + 1.0]
    })
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    feature: usize,
    bin: usize,
    default_left: bool,
}

fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

/// Gain of splitting a node with totals (g, h) into (gl, hl) and the remainder.
pub fn split_gain(gl: f64, hl: f64, g: f64, h: f64, lambda: f64) -> f64 {
    let (gr, hr) = (g - gl, h - hl);
    gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)
}

/// True when `gain` beats `best` by more than rounding noise; near-ties keep the
/// earlier candidate (lower feature index, then lower threshold).
pub fn improves(gain: f64, best: f64) -> bool {
    gain > best + 1e-12 * best.abs().max(1.0)
}

fn best_split(binned: &Binned, hist: &[Slot], total: Slot, p: &GbtParams) -> Option<SplitChoice> {
    let [g, h, n] = total;
    let mut best: Option<SplitChoice> = None;
    let mut best_gain = 0.0;
    for f in 0..binned.n_cols {
        let nb = binned.n_bins(f);
        let base = binned.offsets[f];
        let [gm, hm, nm] = hist[base + nb];
        let has_missing = nm > 0.0;
        let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0.0);
        for b in 0..nb - 1 {
            gl += hist[base + b][0];
            hl += hist[base + b][1];
            nl += hist[base + b][2];
            // missing to the right
            if nl > 0.0 && n - nl > 0.0 && hl >= p.min_child_weight && h - hl >= p.min_child_weight {
                let gain = split_gain(gl, hl, g, h, p.lambda);
                if improves(gain, best_gain) {
                    best_gain = gain;
                    let default_left = !has_missing && hl >= h - hl;
                    best = Some(SplitChoice {
                        feature: f,
                        bin: b,
                        default_left,
                    });
                }
            }
            if has_missing {
                let (gl2, hl2, nl2) = (gl + gm, hl + hm, nl + nm);
                if n - nl2 > 0.0 && hl2 >= p.min_child_weight && h - hl2 >= p.min_child_weight {
                    let gain = split_gain(gl2, hl2, g, h, p.lambda);
                    if improves(gain, best_gain) {
                        best_gain = gain;
                        best = Some(SplitChoice {
                            feature: f,
                            bin: b,
                            default_left: true,
                        });
                    }
                }
            }
        }
    }
    best
}

struct Pending {
    node: usize,
    rows: Vec<u32>,
    hist: Vec<Slot>,
    depth: usize,
    total: Slot,
}

/// Grows one tree; returns it with the leaf value assigned to each training row.
fn grow_tree(binned: &Binned, gh: &[[f64; 2]], p: &GbtParams, row_delta: &mut [f64]) -> Tree {
    let n = gh.len();
    let rows: Vec<u32> = (0..n as u32).collect();
    let total = node_total(gh, &rows);
    let mut hist = vec![[0.0; 3]; binned.slots];
    binned.build_hist(gh, &rows, total, &mut hist);
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut stack = vec![Pending {
        node: 0,
        rows,
        hist,
        depth: 0,
        total,
    }];
    let d = binned.n_cols;
    while let Some(cur) = stack.pop() {
        let split = if cur.depth < p.max_depth && cur.rows.len() >= 2 {
            best_split(binned, &cur.hist, cur.total, p)
        } else {
            None
        };
        let Some(s) = split else {
            let value = p.learning_rate * leaf_weight(cur.total[0], cur.total[1], p.lambda);
            nodes[cur.node] = Node::Leaf { value };
            for &r in &cur.rows {
                row_delta[r as usize] = value;
            }
            continue;
        };
        let missing_bin = binned.n_bins(s.feature) as u8;
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = cur.rows.iter().partition(|&&r| {
            let b = binned.bins[r as usize * d + s.feature];
            if b == missing_bin {
                s.default_left
            } else {
                (b as usize) <= s.bin
            }
        });
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[cur.node] = Node::Split {
            feature: s.feature,
            threshold: binned.edges[s.feature][s.bin],
            default_left: s.default_left,
            left,
            right: left + 1,
        };
        let depth = cur.depth + 1;
        // children at max depth are leaves and need no histogram; otherwise build
        // the smaller child and derive the larger by subtraction
        let (lh, rh) = if depth >= p.max_depth {
            (Vec::new(), Vec::new())
        } else {
            let left_small = left_rows.len() <= right_rows.len();
            let small_rows = if left_small { &left_rows } else { &right_rows };
            let small_total = node_total(gh, small_rows);
            let mut small = vec![[0.0; 3]; binned.slots];
            binned.build_hist(gh, small_rows, small_total, &mut small);
            let mut large = cur.hist;
            for (l, s) in large.iter_mut().zip(&small) {
                *l = if l[2] == s[2] {
                    [0.0; 3]
                } else {
                    [l[0] - s[0], l[1] - s[1], l[2] - s[2]]
                };
            }
            if left_small {
                (small, large)
            } else {
                (large, small)
            }
        };
        stack.push(Pending {
            node: left + 1,
            total: node_total(gh, &right_rows),
            rows: right_rows,
            hist: rh,
            depth,
        });
        stack.push(Pending {
            node: left,
            total: node_total(gh, &left_rows),
            rows: left_rows,
            hist: lh,
            depth,
        });
    }
    Tree { nodes }
}

fn row_loss(pr: f64, y: f64) -> f64 {
    let p = pr.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    let mut l = 0.0;
    if y != 0.0 {
        l += y * p.ln();
    }
    if y != 1.0 {
        l += (1.0 - y) * (1.0 - p).ln();
    }
    l
}

/// Fills gradients and hessians at `margin`; returns the mean weighted log loss there.
fn gradients(margin: &[f64], y: &[f64], w: &[f64], total_w: f64, gh: &mut [[f64; 2]]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        let pr = sigmoid(margin[i]);
        gh[i] = [w[i] * (pr - y[i]), w[i] * pr * (1.0 - pr)];
        s -= w[i] * row_loss(pr, y[i]);
    }
    s / total_w
}

/// Trains boosted trees. NaN cells are treated as missing.
///
/// Constant labels produce a tree-less model predicting the (clipped) base rate,
/// flagged [`TrainStatus::Degenerate`].
pub fn train_gbt(x: &Design, y: &[f64], weights: &[f64], p: &GbtParams, seed: u64) -> Result<TrainedModel> {
    train_gbt_binned(x, None, y, weights, p, seed)
}

/// [`train_gbt`] reusing a binning of `x` built with `p.max_bins`.
pub(crate) fn train_gbt_binned(
    x: &Design,
    binned: Option<&Binned>,
    y: &[f64],
    weights: &[f64],
    p: &GbtParams,
    seed: u64,
) -> Result<TrainedModel> {
    check_inputs(x, y, weights)?;
    if p.max_bins < 2 || p.max_bins > 255 {
        return Err(Error::InvalidInput("max_bins must be in 2..=255".into()));
    }
    if !(p.learning_rate > 0.0) || p.lambda < 0.0 || p.min_child_weight < 0.0 {
        return Err(Error::InvalidInput("invalid boosting parameters".into()));
    }
    if x.data.iter().any(|v| v.is_infinite()) {
        return Err(Error::NonFinite("boosting input contains infinity".into()));
    }
    let w = normalize_weights(weights);
    let total_w: f64 = w.iter().sum();
    let base_rate = (y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / total_w).clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    let base_score = logit(base_rate);
    let degenerate = y.iter().all(|&v| v == y[0]);

    let n = x.n_rows;
    let mut margin = vec![base_score; n];
    let mut gh = vec![[0.0; 2]; n];
    let mut trace = vec![gradients(&margin, y, &w, total_w, &mut gh)];
    let mut trees = Vec::new();
    if !degenerate && n > 0 {
        let own;
        let binned = match binned {
            Some(b) => b,
            None => {
                own = Binned::new(x, p.max_bins);
                &own
            }
        };
        let mut delta = vec![0.0; n];
        for _ in 0..p.trees {
            let tree = grow_tree(binned, &gh, p, &mut delta);
            for (m, d) in margin.iter_mut().zip(&delta) {
                *m += d;
            }
            trees.push(tree);
            trace.push(gradients(&margin, y, &w, total_w, &mut gh));
        }
    }
    if trees.iter().flat_map(|t| &t.nodes).any(|n| matches!(n, Node::Leaf { value } if !value.is_finite())) {
        return Err(Error::NonFinite("leaf value".into()));
    }

    Ok(TrainedModel {
        version: MODEL_VERSION,
        kind: ModelKind::Gbt,
        hyper: Hyper::Gbt(*p),
        params: ModelParams::Gbt { base_score, trees },
        feature_names: x.names.clone(),
        meta: TrainingMeta {
            class_weights: class_weight_summary(y, &w),
            seed,
            cv_score: None,
            status: if degenerate { TrainStatus::Degenerate } else { TrainStatus::Converged },
            iterations: p.trees,
            loss_trace: trace,
        },
    })
}

impl TrainedModel {
    /// Boosted margins after the first `k` trees, for each `k` in `checkpoints`.
    /// For LR models every checkpoint returns the full margin.
    pub fn staged_margins(&self, x: &Design, checkpoints: &[usize]) -> Result<Vec<Vec<f64>>> {
        let ModelParams::Gbt { base_score, trees } = &self.params else {
            let m = self.predict_margin(x)?;
            return Ok(checkpoints.iter().map(|_| m.clone()).collect());
        };
        if x.names != self.feature_names {
            return Err(Error::SchemaMismatch {
                expected: self.feature_names.len(),
                found: x.n_cols,
            });
        }
        let mut order: Vec<usize> = (0..checkpoints.len()).collect();
        order.sort_by_key(|&i| checkpoints[i]);
        let mut out = vec![Vec::new(); checkpoints.len()];
        let mut margin = vec![*base_score; x.n_rows];
        let mut done = 0;
        for &ci in &order {
            let upto = checkpoints[ci].min(trees.len());
            for t in &trees[done..upto.max(done)] {
                for (i, m) in margin.iter_mut().enumerate() {
                    *m += t.predict_row(x.row(i));
                }
            }
            done = done.max(upto);
            out[ci] = margin.clone();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(seed: u64, n: usize, d: usize) -> (Design, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let y = rows
            .iter()
            .map(|r| f64::from(u8::from(r[0] + 0.5 * r[1] * r[1] + rng.gen_range(-1.0..1.0) > 1.0)))
            .collect();
        (Design::from_rows(&rows), y)
    }

    #[test]
    fn constant_labels_saturate() {
        let x = Design::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let m = train_gbt(&x, &[1.0; 3], &[1.0; 3], &GbtParams::default(), 1).unwrap();
        assert_eq!(m.meta.status, TrainStatus::Degenerate);
        for p in m.predict_proba(&x).unwrap() {
            assert!(p > 1.0 - 1e-9);
        }
    }

    #[test]
    fn zero_trees_predict_base_rate() {
        let (x, y) = random_data(1, 50, 2);
        let p = GbtParams { trees: 0, ..GbtParams::default() };
        let m = train_gbt(&x, &y, &vec![1.0; 50], &p, 0).unwrap();
        let rate = y.iter().sum::<f64>() / 50.0;
        for pr in m.predict_proba(&x).unwrap() {
            assert!((pr - rate).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_split_on_feature_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|_| (0..5).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r[3] > 0.5))).collect();
        let x = Design::from_rows(&rows);
        let p = GbtParams { trees: 1, max_depth: 1, max_bins: 255, ..GbtParams::default() };
        let m = train_gbt(&x, &y, &vec![1.0; 120], &p, 0).unwrap();
        let ModelParams::Gbt { trees, .. } = &m.params else { unreachable!() };
        let Node::Split { feature, threshold, .. } = trees[0].root() else { panic!("no split") };
        assert_eq!(*feature, 3);
        let below = rows.iter().map(|r| r[3]).filter(|v| *v <= 0.5).fold(f64::MIN, f64::max);
        let above = rows.iter().map(|r| r[3]).filter(|v| *v > 0.5).fold(f64::MAX, f64::min);
        assert!(*threshold >= below && *threshold < above);
    }

    #[test]
    fn missing_values_follow_learned_direction() {
        // missing rows are all positives; the split should send them with the positives
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            rows.push(vec![i as f64]);
            y.push(f64::from(u8::from(i >= 20)));
        }
        for _ in 0..20 {
            rows.push(vec![f64::NAN]);
            y.push(1.0);
        }
        let x = Design::from_rows(&rows);
        let p = GbtParams { trees: 1, max_depth: 1, ..GbtParams::default() };
        let m = train_gbt(&x, &y, &vec![1.0; 60], &p, 0).unwrap();
        let ModelParams::Gbt { trees, .. } = &m.params else { unreachable!() };
        let Node::Split { default_left, .. } = trees[0].root() else { panic!() };
        assert!(!default_left);
        let pr = m.predict_proba(&Design::from_rows(&[vec![f64::NAN], vec![0.0]])).unwrap();
        assert!(pr[0] > pr[1]);
    }

    #[test]
    fn loss_is_non_increasing_for_small_steps() {
        let (x, y) = random_data(2, 300, 4);
        let p = GbtParams { trees: 40, learning_rate: 0.1, max_depth: 3, ..GbtParams::default() };
        let m = train_gbt(&x, &y, &vec![1.0; 300], &p, 0).unwrap();
        for w in m.meta.loss_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn deterministic_and_weight_scale_invariant() {
        let (x, y) = random_data(3, 200, 3);
        let w: Vec<f64> = (0..200).map(|i| 1.0 + (i % 3) as f64).collect();
        let w2: Vec<f64> = w.iter().map(|v| v * 2.0).collect();
        let p = GbtParams { trees: 10, ..GbtParams::default() };
        let a = train_gbt(&x, &y, &w, &p, 5).unwrap();
        let b = train_gbt(&x, &y, &w, &p, 5).unwrap();
        let c = train_gbt(&x, &y, &w2, &p, 5).unwrap();
        let pa = a.predict_proba(&x).unwrap();
        assert_eq!(pa, b.predict_proba(&x).unwrap());
        assert_eq!(pa, c.predict_proba(&x).unwrap());
    }

    #[test]
    fn monotone_transform_keeps_predictions() {
        let (x, y) = random_data(6, 150, 3);
        let mut xt = x.clone();
        for i in 0..x.n_rows {
            xt.data[i * 3 + 1] = x.get(i, 1).exp();
        }
        let p = GbtParams { trees: 5, max_depth: 2, max_bins: 16, ..GbtParams::default() };
        let a = train_gbt(&x, &y, &vec![1.0; 150], &p, 0).unwrap();
        let b = train_gbt(&xt, &y, &vec![1.0; 150], &p, 0).unwrap();
        let (pa, pb) = (a.predict_proba(&x).unwrap(), b.predict_proba(&xt).unwrap());
        for (u, v) in pa.iter().zip(&pb) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn staged_margins_match_truncated_model() {
        let (x, y) = random_data(8, 100, 2);
        let p = GbtParams { trees: 12, ..GbtParams::default() };
        let m = train_gbt(&x, &y, &vec![1.0; 100], &p, 0).unwrap();
        let staged = m.staged_margins(&x, &[12, 4]).unwrap();
        assert_eq!(staged[0], m.predict_margin(&x).unwrap());
        let mut short = m.clone();
        if let ModelParams::Gbt { trees, .. } = &mut short.params {
            trees.truncate(4);
        }
        assert_eq!(staged[1], short.predict_margin(&x).unwrap());
    }

    #[test]
    fn edges_by_rank_when_many_values() {
        let v: Vec<f64> = (0..1000).map(f64::from).collect();
        let e = bin_edges(&v, 64);
        assert!(e.len() <= 63 && e.len() > 50);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(bin_edges(&[2.0, 2.0], 64), Vec::<f64>::new());
        assert_eq!(bin_edges(&[0.0, 1.0], 64), vec![0.5]);
    }
}
