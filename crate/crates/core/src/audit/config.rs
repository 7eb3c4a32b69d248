use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cohort::{FeatureConfig, Format};
use crate::error::{Error, Result};
use crate::learners::{HyperGrid, ModelKind};
use crate::synth::{default_profile, PopulationProfile};

/// Where student and course records come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DataSource {
    /// Generated cohorts. `online` / `residential` tables override fields of
    /// the default profile of that format.
    Synth {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        online: Option<toml::Table>,
        #[serde(default)]
        residential: Option<toml::Table>,
    },
    /// CSV files holding students of every requested format.
    Csv { students: PathBuf, courses: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub seed: u64,
    pub formats: Vec<Format>,
    pub algorithms: Vec<ModelKind>,
    pub data: DataSource,
    /// Held-out cohort; the latest cohort of each format when absent.
    #[serde(default)]
    pub test_cohort: Option<i32>,
    #[serde(default)]
    pub grid: HyperGrid,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_bins")]
    pub ranking_bins: usize,
    /// Algorithm whose models feed the group-fairness and ranking-change
    /// tables; GBT when it is run, otherwise the first algorithm.
    #[serde(default)]
    pub fairness_algorithm: Option<ModelKind>,
    /// Whether the adjusted McFadden parameter count includes the intercept.
    #[serde(default = "default_true")]
    pub r2_count_intercept: bool,
    #[serde(default)]
    pub write_predictions: bool,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_folds() -> usize {
    5
}

fn default_bins() -> usize {
    20
}

fn default_true() -> bool {
    true
}

impl AuditConfig {
    /// Synthetic-data config with default grids.
    pub fn synthetic(seed: u64, formats: Vec<Format>, algorithms: Vec<ModelKind>) -> Self {
        Self {
            seed,
            formats,
            algorithms,
            data: DataSource::Synth {
                n: None,
                online: None,
                residential: None,
            },
            test_cohort: None,
            grid: HyperGrid::default(),
            cv_folds: default_folds(),
            histogram_bins: default_bins(),
            ranking_bins: default_bins(),
            fairness_algorithm: None,
            r2_count_intercept: true,
            write_predictions: false,
            features: FeatureConfig::default(),
            output_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: AuditConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config. Relative data and output paths resolve against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DataSource::Csv { students, courses } = &mut cfg.data {
            resolve(students);
            resolve(courses);
        }
        if let Some(out) = &mut cfg.output_dir {
            resolve(out);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.formats.is_empty() {
            return Err(Error::Config("at least one format is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        for (i, f) in self.formats.iter().enumerate() {
            if self.formats[..i].contains(f) {
                return Err(Error::Config(format!("format {f} listed twice")));
            }
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(Error::Config(format!("algorithm {a} listed twice")));
            }
            self.grid.validate(*a)?;
        }
        if self.grid.gbt_max_bins < 2 || self.grid.gbt_max_bins > 255 {
            return Err(Error::Config("gbt_max_bins must lie in 2..=255".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self.histogram_bins < 2 || self.ranking_bins < 2 {
            return Err(Error::Config("histogram bins must be at least 2".into()));
        }
        if let Some(a) = self.fairness_algorithm {
            if !self.algorithms.contains(&a) {
                return Err(Error::Config(format!("fairness_algorithm {a} is not among the algorithms")));
            }
        }
        if let DataSource::Synth { .. } = self.data {
            for &f in &self.formats {
                let p = self.profile(f)?;
                p.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn fairness_algorithm(&self) -> ModelKind {
        self.fairness_algorithm.unwrap_or_else(|| {
            if self.algorithms.contains(&ModelKind::Gbt) {
                ModelKind::Gbt
            } else {
                self.algorithms[0]
            }
        })
    }

    /// Synthetic population profile for `format` with overrides applied and the
    /// generator seed derived from the config seed.
    pub fn profile(&self, format: Format) -> Result<PopulationProfile> {
        let DataSource::Synth { n, online, residential } = &self.data else {
            return Err(Error::Config("data source is not synthetic".into()));
        };
        let mut profile = default_profile(format);
        let patch = match format {
            Format::Online => online,
            Format::Residential => residential,
        };
        if let Some(patch) = patch {
            let mut base = toml::Table::try_from(&profile).map_err(|e| Error::Config(e.to_string()))?;
            merge(&mut base, patch);
            profile = toml::Value::Table(base)
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(format!("{format} profile: {e}")))?;
        }
        if let Some(n) = n {
            profile.n = *n;
        }
        profile.format = format;
        profile.seed = crate::rng::derive_seed(self.seed, &format!("synth-{format}"));
        Ok(profile)
    }
}

fn merge(base: &mut toml::Table, patch: &toml::Table) {
    for (k, v) in patch {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(p)) => merge(b, p),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
formats = ["online"]
algorithms = ["GBT", "LR"]

[data]
source = "synth"
n = 2000

[data.online]
feature_effect = 1.5
protected_effect = { gender = 0.0, first_gen = 0.0, urm = 0.0, high_need = 0.0 }
"#;

    #[test]
    fn parses_and_patches_profile() {
        let cfg = AuditConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.cv_folds, 5);
        assert_eq!(cfg.grid, HyperGrid::default());
        let p = cfg.profile(Format::Online).unwrap();
        assert_eq!(p.n, 2000);
        assert_eq!(p.feature_effect, 1.5);
        assert_eq!(p.protected_effect.gender, 0.0);
        assert_eq!(p.mean_age, 27.1);
        assert_eq!(cfg.fairness_algorithm(), ModelKind::Gbt);
    }

    #[test]
    fn rejects_bad_configs() {
        let no_seed = MINIMAL.replace("seed = 7", "");
        assert!(AuditConfig::from_toml(&no_seed).unwrap_err().is_config());
        let no_alg = MINIMAL.replace(r#"["GBT", "LR"]"#, "[]");
        assert!(AuditConfig::from_toml(&no_alg).unwrap_err().is_config());
        let bad_profile = MINIMAL.replace("feature_effect = 1.5", "mean_age = \"old\"");
        assert!(AuditConfig::from_toml(&bad_profile).unwrap_err().is_config());
        let unknown = format!("{MINIMAL}\n");
        let unknown = unknown.replacen("seed = 7", "seed = 7\ncolour = 1", 1);
        assert!(AuditConfig::from_toml(&unknown).is_err());
    }

    #[test]
    fn generator_seed_is_derived() {
        let a = AuditConfig::from_toml(MINIMAL).unwrap();
        let b = AuditConfig::from_toml(&MINIMAL.replace("seed = 7", "seed = 8")).unwrap();
        assert_ne!(a.profile(Format::Online).unwrap().seed, b.profile(Format::Online).unwrap().seed);
    }
}
