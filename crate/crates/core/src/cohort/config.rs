use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::records::LetterGrade;

/// Maps logical column names to the headers used in an input CSV.
/// Columns absent from the map use their logical name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnMap(pub BTreeMap<String, String>);

impl ColumnMap {
    pub fn header<'a>(&'a self, logical: &'a str) -> &'a str {
        self.0.get(logical).map(String::as_str).unwrap_or(logical)
    }
}

fn default_top_k() -> usize {
    10
}

fn default_grade_map() -> BTreeMap<String, f64> {
    [
        ("A+", 4.33),
        ("A", 4.0),
        ("A-", 3.67),
        ("B+", 3.33),
        ("B", 3.0),
        ("B-", 2.67),
        ("C+", 2.33),
        ("C", 2.0),
        ("C-", 1.67),
        ("D+", 1.33),
        ("D", 1.0),
        ("D-", 0.67),
        ("F", 0.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Feature-engineering settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Number of most frequent majors (and minors) given their own one-hot column.
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Letter grade to grade points. Withdrawals are never mapped.
    #[serde(default = "default_grade_map")]
    pub grade_map: BTreeMap<String, f64>,
    #[serde(default)]
    pub student_columns: ColumnMap,
    #[serde(default)]
    pub course_columns: ColumnMap,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            top_k: default_top_k(),
            grade_map: default_grade_map(),
            student_columns: ColumnMap::default(),
            course_columns: ColumnMap::default(),
        }
    }
}

impl FeatureConfig {
    pub fn points(&self, grade: LetterGrade) -> Option<f64> {
        if grade.is_withdrawal() {
            return None;
        }
        self.grade_map.get(grade.as_str()).copied()
    }

    /// Grade points of the nearest mapped letter, used when only points are known.
    pub fn nearest_letter(&self, points: f64) -> Option<LetterGrade> {
        LetterGrade::ALL
            .into_iter()
            .filter_map(|g| self.points(g).map(|p| (g, (p - points).abs())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(g, _)| g)
    }
}
