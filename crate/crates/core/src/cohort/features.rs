//! Feature engineering from raw records into a numeric design matrix.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::FeatureConfig;
use super::records::{
    CourseRecord, Format, ProtectedAttribute, StudentRecord, SESSIONS,
};
use super::schema::{reference_schema, Category, ColumnKind, Expansion, MissingFamily};
use crate::error::{Error, Result};

/// Value stored in a cell whose source value is missing.
pub const MISSING_SENTINEL: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureSet {
    Aware,
    Blind,
}

impl FeatureSet {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Aware => "AWARE",
            FeatureSet::Blind => "BLIND",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub category: Category,
    /// Indicator column flagging missingness for this column, if any.
    pub missing_indicator: Option<String>,
}

/// Major and minor codes that receive their own one-hot column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryVocab {
    pub majors: Vec<String>,
    pub minors: Vec<String>,
}

fn top_k<'a>(codes: impl Iterator<Item = &'a str>, k: usize) -> Vec<String> {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for c in codes {
        *freq.entry(c).or_default() += 1;
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
    // frequency descending, code ascending on ties
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.into_iter().take(k).map(|(c, _)| c.to_string()).collect()
}

impl CategoryVocab {
    /// Fits the top-`k` majors and minors by frequency in `students`.
    pub fn fit(students: &[StudentRecord], k: usize) -> Self {
        Self {
            majors: top_k(students.iter().filter_map(|s| s.major.as_deref()), k),
            minors: top_k(students.iter().filter_map(|s| s.minor.as_deref()), k),
        }
    }
}

/// Row-major numeric matrix handed to the learners. Missing cells hold either the
/// sentinel or NaN, depending on how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
}

impl Design {
    pub fn new(names: Vec<String>, n_rows: usize, data: Vec<f64>) -> Result<Self> {
        let n_cols = names.len();
        if data.len() != n_rows * n_cols {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: n_rows * n_cols,
            });
        }
        Ok(Self {
            names,
            n_rows,
            n_cols,
            data,
        })
    }

    /// Builds a design with generated column names `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let names = (0..n_cols).map(|j| format!("x{j}")).collect();
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self {
            names,
            n_rows: rows.len(),
            n_cols,
            data,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn select_rows(&self, rows: &[usize]) -> Design {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Design {
            names: self.names.clone(),
            n_rows: rows.len(),
            n_cols: self.n_cols,
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub row_ids: Vec<String>,
    pub columns: Vec<ColumnSpec>,
    pub values: Vec<f64>,
    pub missing_mask: Vec<bool>,
    pub feature_set: FeatureSet,
    pub format: Format,
    pub labels: Vec<u8>,
    pub cohorts: Vec<i32>,
    /// Protected-attribute flags per row, kept as metadata even for BLIND matrices.
    pub groups: Vec<[bool; 4]>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing_mask[row * self.n_cols() + col]
    }

    pub fn group_flags(&self, attr: ProtectedAttribute) -> Vec<bool> {
        self.groups.iter().map(|g| g[attr.index()]).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let d = self.n_cols();
        let mut values = Vec::with_capacity(rows.len() * d);
        let mut missing_mask = Vec::with_capacity(rows.len() * d);
        for &i in rows {
            values.extend_from_slice(&self.values[i * d..(i + 1) * d]);
            missing_mask.extend_from_slice(&self.missing_mask[i * d..(i + 1) * d]);
        }
        FeatureMatrix {
            row_ids: rows.iter().map(|&i| self.row_ids[i].clone()).collect(),
            columns: self.columns.clone(),
            values,
            missing_mask,
            feature_set: self.feature_set,
            format: self.format,
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            cohorts: rows.iter().map(|&i| self.cohorts[i]).collect(),
            groups: rows.iter().map(|&i| self.groups[i]).collect(),
        }
    }

    fn select_columns(&self, keep: &[usize], feature_set: FeatureSet) -> FeatureMatrix {
        let d = self.n_cols();
        let n = self.n_rows();
        let mut values = Vec::with_capacity(n * keep.len());
        let mut missing_mask = Vec::with_capacity(n * keep.len());
        for i in 0..n {
            for &j in keep {
                values.push(self.values[i * d + j]);
                missing_mask.push(self.missing_mask[i * d + j]);
            }
        }
        FeatureMatrix {
            row_ids: self.row_ids.clone(),
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            values,
            missing_mask,
            feature_set,
            format: self.format,
            labels: self.labels.clone(),
            cohorts: self.cohorts.clone(),
            groups: self.groups.clone(),
        }
    }

    /// Drops the four protected-attribute columns. Other columns are copied verbatim.
    pub fn to_blind(&self) -> FeatureMatrix {
        let keep: Vec<usize> = (0..self.n_cols())
            .filter(|&j| self.columns[j].category != Category::Protected)
            .collect();
        self.select_columns(&keep, FeatureSet::Blind)
    }

    /// Numeric design for the learners; missing cells become NaN when `missing_as_nan`.
    pub fn design(&self, missing_as_nan: bool) -> Design {
        let data = self
            .values
            .iter()
            .zip(&self.missing_mask)
            .map(|(&v, &m)| if m && missing_as_nan { f64::NAN } else { v })
            .collect();
        Design {
            names: self.column_names(),
            n_rows: self.n_rows(),
            n_cols: self.n_cols(),
            data,
        }
    }

    pub fn labels_f64(&self) -> Vec<f64> {
        self.labels.iter().map(|&y| f64::from(y)).collect()
    }

    pub fn schema(&self) -> MatrixSchema {
        MatrixSchema {
            version: 1,
            feature_set: self.feature_set,
            format: self.format,
            n_rows: self.n_rows(),
            columns: self.columns.clone(),
        }
    }

    /// Writes the matrix as CSV: `row_id, cohort, dropout, group_*` metadata columns,
    /// then one column per feature. Missing cells are written empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["row_id".to_string(), "cohort".into(), "dropout".into()];
        header.extend(ProtectedAttribute::ALL.iter().map(|a| format!("group_{}", a.column())));
        header.extend(self.column_names());
        w.write_record(&header)?;
        let d = self.n_cols();
        for i in 0..self.n_rows() {
            let mut rec = vec![
                self.row_ids[i].clone(),
                self.cohorts[i].to_string(),
                self.labels[i].to_string(),
            ];
            rec.extend(self.groups[i].iter().map(|&g| u8::from(g).to_string()));
            for j in 0..d {
                let k = i * d + j;
                rec.push(if self.missing_mask[k] {
                    String::new()
                } else {
                    self.values[k].to_string()
                });
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<matrix>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, schema: &MatrixSchema) -> Result<FeatureMatrix> {
        let mut rdr = csv::Reader::from_reader(reader);
        let d = schema.columns.len();
        let meta = 3 + ProtectedAttribute::ALL.len();
        let headers = rdr.headers()?.clone();
        if headers.len() != meta + d {
            return Err(Error::SchemaMismatch {
                expected: meta + d,
                found: headers.len().saturating_sub(meta),
            });
        }
        let mut m = FeatureMatrix {
            row_ids: Vec::new(),
            columns: schema.columns.clone(),
            values: Vec::new(),
            missing_mask: Vec::new(),
            feature_set: schema.feature_set,
            format: schema.format,
            labels: Vec::new(),
            cohorts: Vec::new(),
            groups: Vec::new(),
        };
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |col: usize| Error::BadValue {
                row: i + 1,
                column: headers.get(col).unwrap_or_default().to_string(),
                value: rec.get(col).unwrap_or_default().to_string(),
            };
            m.row_ids.push(rec[0].to_string());
            m.cohorts.push(rec[1].parse().map_err(|_| bad(1))?);
            m.labels.push(rec[2].parse().map_err(|_| bad(2))?);
            let mut g = [false; 4];
            for (k, flag) in g.iter_mut().enumerate() {
                *flag = &rec[3 + k] == "1";
            }
            m.groups.push(g);
            for j in 0..d {
                let cell = &rec[meta + j];
                if cell.is_empty() {
                    m.values.push(MISSING_SENTINEL);
                    m.missing_mask.push(true);
                } else {
                    m.values.push(cell.parse().map_err(|_| bad(meta + j))?);
                    m.missing_mask.push(false);
                }
            }
        }
        Ok(m)
    }
}

/// Sidecar schema descriptor written next to a matrix CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSchema {
    pub version: u32,
    pub feature_set: FeatureSet,
    pub format: Format,
    pub n_rows: usize,
    pub columns: Vec<ColumnSpec>,
}

/// Per-student course aggregates, `None` where undefined.
struct CourseAggregates {
    values: Vec<Option<f64>>,
}

fn mean_var(points: &[f64]) -> Option<(f64, f64)> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<f64>() / n;
    let var = points.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var))
}

fn course_aggregates(courses: &[&CourseRecord], config: &FeatureConfig) -> CourseAggregates {
    let total = courses.len() as f64;
    let total_units: f64 = courses.iter().map(|c| c.units).sum();
    let n_required = courses.iter().filter(|c| c.required_for_major).count() as f64;
    let units_required: f64 = courses.iter().filter(|c| c.required_for_major).map(|c| c.units).sum();

    let points = |c: &CourseRecord| -> Option<f64> {
        match c.letter_grade {
            Some(g) if g.is_withdrawal() => None,
            Some(g) => config.points(g).or(c.grade_points),
            None => c.grade_points,
        }
    };
    let units_earned: f64 = courses
        .iter()
        .filter(|c| points(c).is_some_and(|p| p > 0.0))
        .map(|c| c.units)
        .sum();

    let mut units_type = [0.0; 4];
    let mut courses_type = [0.0; 4];
    let mut units_level = [0.0; 4];
    let mut courses_level = [0.0; 4];
    for c in courses {
        units_type[c.course_type.index()] += c.units;
        courses_type[c.course_type.index()] += 1.0;
        units_level[c.course_level.index()] += c.units;
        courses_level[c.course_level.index()] += 1.0;
    }

    let graded: Vec<(f64, f64)> = courses.iter().filter_map(|c| points(c).map(|p| (p, c.units))).collect();
    let graded_units: f64 = graded.iter().map(|g| g.1).sum();
    let term_gpa = (graded_units > 0.0).then(|| graded.iter().map(|(p, u)| p * u).sum::<f64>() / graded_units);

    let mut v: Vec<Option<f64>> = Vec::with_capacity(43);
    v.push(Some(total));
    v.push(Some(total_units));
    v.push((total > 0.0).then(|| n_required / total));
    v.push(Some(units_required));
    v.push(Some(units_earned));
    v.extend(units_type.map(Some));
    v.extend(courses_type.map(Some));
    v.extend(units_level.map(Some));
    v.extend(courses_level.map(Some));
    v.push(term_gpa);
    for k in 1..=SESSIONS {
        let pts: Vec<f64> = courses
            .iter()
            .filter(|c| usize::from(c.session) == k)
            .filter_map(|c| points(c))
            .collect();
        match mean_var(&pts) {
            Some((m, s2)) => {
                v.push(Some(m));
                v.push(Some(s2));
            }
            None => {
                v.push(None);
                v.push(None);
            }
        }
    }
    let mut letters = [0.0; 14];
    let mut no_letter = 0.0;
    for c in courses {
        let letter = c
            .letter_grade
            .or_else(|| c.grade_points.and_then(|p| config.nearest_letter(p)));
        match letter {
            Some(g) => letters[g.index()] += 1.0,
            None => no_letter += 1.0,
        }
    }
    for count in letters {
        v.push((total > 0.0).then(|| count / total));
    }
    v.push((total > 0.0).then(|| no_letter / total));
    CourseAggregates { values: v }
}

/// Engineers the feature matrix for one enrollment format.
///
/// Majors and minors outside `vocab` fall into an `other` bucket. Pass `None` to fit
/// the vocabulary on every supplied student.
pub fn engineer_features(
    students: &[StudentRecord],
    courses: &[CourseRecord],
    feature_set: FeatureSet,
    config: &FeatureConfig,
    vocab: Option<&CategoryVocab>,
) -> Result<FeatureMatrix> {
    let format = students
        .first()
        .map(|s| s.format)
        .ok_or_else(|| Error::InvalidInput("no students".into()))?;
    if students.iter().any(|s| s.format != format) {
        return Err(Error::InvalidInput(
            "students from different enrollment formats; engineer each format separately".into(),
        ));
    }
    let fitted;
    let vocab = match vocab {
        Some(v) => v,
        None => {
            fitted = CategoryVocab::fit(students, config.top_k);
            &fitted
        }
    };

    let mut by_student: HashMap<&str, Vec<&CourseRecord>> =
        students.iter().map(|s| (s.student_id.as_str(), Vec::new())).collect();
    for c in courses {
        match by_student.get_mut(c.student_id.as_str()) {
            Some(list) => list.push(c),
            None => return Err(Error::OrphanCourseRecord(c.student_id.clone())),
        }
    }

    // Column layout.
    let schema = reference_schema();
    let mut columns = Vec::new();
    for f in &schema {
        let indicator = f.missing.map(|m| m.indicator_column().to_string());
        match f.expansion {
            Expansion::Single => columns.push(ColumnSpec {
                name: f.name.clone(),
                kind: f.kind,
                category: f.category,
                missing_indicator: indicator,
            }),
            Expansion::OneHot => {
                let codes = if f.name == "major" { &vocab.majors } else { &vocab.minors };
                for code in codes.iter().map(String::as_str).chain(["other"]) {
                    columns.push(ColumnSpec {
                        name: format!("{}_{}", f.name, code),
                        kind: ColumnKind::Binary,
                        category: f.category,
                        missing_indicator: indicator.clone(),
                    });
                }
            }
        }
    }
    for fam in MissingFamily::ALL {
        columns.push(ColumnSpec {
            name: fam.indicator_column().to_string(),
            kind: ColumnKind::Binary,
            category: Category::Indicator,
            missing_indicator: None,
        });
    }
    let d = columns.len();
    let fam_offset = d - MissingFamily::ALL.len();

    let n = students.len();
    let mut values = Vec::with_capacity(n * d);
    let mut mask = Vec::with_capacity(n * d);
    let flag = |b: bool| if b { 1.0 } else { 0.0 };

    for s in students {
        let row_start = values.len();
        let mut family_missing = [false; 9];
        let mut push = |v: Option<f64>, fam: Option<MissingFamily>, fm: &mut [bool; 9]| match v {
            Some(x) => {
                values.push(x);
                mask.push(false);
            }
            None => {
                values.push(MISSING_SENTINEL);
                mask.push(true);
                if let Some(f) = fam {
                    fm[f as usize] = true;
                }
            }
        };

        for attr in ProtectedAttribute::ALL {
            push(Some(flag(s.protected(attr))), None, &mut family_missing);
        }
        push(Some(s.age), None, &mut family_missing);
        push(s.hs_gpa, Some(MissingFamily::HsGpa), &mut family_missing);
        // test scores are missing as a family when either is absent
        let sat_family = Some(MissingFamily::TestScores);
        push(s.sat_math, sat_family, &mut family_missing);
        push(s.sat_verbal, sat_family, &mut family_missing);
        push(Some(flag(s.transfer)), None, &mut family_missing);
        let credits = if s.transfer { s.transfer_credits } else { Some(s.transfer_credits.unwrap_or(0.0)) };
        push(credits, Some(MissingFamily::Transfer), &mut family_missing);
        push(s.transfer_gpa, Some(MissingFamily::Transfer), &mut family_missing);

        push(Some(flag(s.part_time)), None, &mut family_missing);
        for (code, codes, fam) in [
            (&s.major, &vocab.majors, MissingFamily::Major),
            (&s.minor, &vocab.minors, MissingFamily::Minor),
        ] {
            match code {
                Some(c) => {
                    let hit = codes.iter().position(|k| k == c);
                    for j in 0..codes.len() {
                        push(Some(flag(hit == Some(j))), None, &mut family_missing);
                    }
                    push(Some(flag(hit.is_none())), None, &mut family_missing);
                }
                None => {
                    for _ in 0..=codes.len() {
                        push(None, Some(fam), &mut family_missing);
                    }
                }
            }
        }
        push(Some(flag(s.stem_major)), None, &mut family_missing);

        let list = &by_student[s.student_id.as_str()];
        let agg = course_aggregates(list, config);
        let course_features = schema.iter().filter(|f| f.category == Category::Course);
        for (v, f) in agg.values.into_iter().zip(course_features) {
            push(v, f.missing, &mut family_missing);
        }
        debug_assert_eq!(values.len() - row_start, fam_offset);
        for fm in family_missing {
            values.push(flag(fm));
            mask.push(false);
        }
    }

    let aware = FeatureMatrix {
        row_ids: students.iter().map(|s| s.student_id.clone()).collect(),
        columns,
        values,
        missing_mask: mask,
        feature_set: FeatureSet::Aware,
        format,
        labels: students.iter().map(|s| u8::from(s.dropout)).collect(),
        cohorts: students.iter().map(|s| s.cohort).collect(),
        groups: students.iter().map(StudentRecord::protected_flags).collect(),
    };
    Ok(match feature_set {
        FeatureSet::Aware => aware,
        FeatureSet::Blind => aware.to_blind(),
    })
}
