#![allow(dead_code)]

use fairdrop_core::audit::{AuditConfig, DataSource};
use fairdrop_core::learners::HyperGrid;
use fairdrop_core::{Format, ModelKind};

pub fn reduced_grid() -> HyperGrid {
    HyperGrid {
        lr_l2: vec![1.0],
        gbt_trees: vec![100],
        gbt_depth: vec![3],
        gbt_learning_rate: vec![0.1],
        gbt_min_child_weight: vec![1.0],
        gbt_max_bins: 64,
    }
}

/// Both formats and algorithms on a small synthetic cohort with a one-point grid.
pub fn small_config(seed: u64, n: usize) -> AuditConfig {
    let mut cfg = AuditConfig::synthetic(seed, vec![Format::Online, Format::Residential], vec![ModelKind::Gbt, ModelKind::Lr]);
    cfg.data = DataSource::Synth {
        n: Some(n),
        online: None,
        residential: None,
    };
    cfg.grid = reduced_grid();
    cfg.cv_folds = 3;
    cfg
}
