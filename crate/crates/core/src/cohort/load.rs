//! CSV ingestion and export of student and course tables.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::StringRecord;

use super::config::{ColumnMap, FeatureConfig};
use super::records::{
    CourseLevel, CourseRecord, CourseType, Format, LetterGrade, StudentRecord, SESSIONS,
};
use crate::error::{Error, Result};

pub const STUDENT_COLUMNS: [&str; 19] = [
    "student_id",
    "cohort",
    "format",
    "gender",
    "first_gen",
    "urm",
    "high_need",
    "age",
    "hs_gpa",
    "sat_math",
    "sat_verbal",
    "transfer",
    "transfer_credits",
    "transfer_gpa",
    "part_time",
    "major",
    "minor",
    "stem_major",
    "dropout",
];

pub const COURSE_COLUMNS: [&str; 9] = [
    "student_id",
    "course_id",
    "letter_grade",
    "grade_points",
    "units",
    "required_for_major",
    "course_type",
    "course_level",
    "session",
];

struct Row<'a> {
    record: &'a StringRecord,
    index: &'a HashMap<&'static str, usize>,
    row: usize,
}

impl Row<'_> {
    fn raw(&self, col: &str) -> Option<&str> {
        let i = self.index.get(col)?;
        self.record.get(*i).map(str::trim)
    }

    fn bad(&self, col: &str) -> Error {
        Error::BadValue {
            row: self.row,
            column: col.to_string(),
            value: self.raw(col).unwrap_or_default().to_string(),
        }
    }

    fn required_str(&self, col: &str) -> Result<String> {
        match self.raw(col) {
            Some(s) if !s.is_empty() => Ok(s.to_string()),
            _ => Err(self.bad(col)),
        }
    }

    fn optional_str(&self, col: &str) -> Option<String> {
        self.raw(col).filter(|s| !s.is_empty()).map(str::to_string)
    }

    fn required_f64(&self, col: &str) -> Result<f64> {
        self.raw(col)
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.bad(col))
    }

    /// Unparseable or out-of-range values become missing.
    fn optional_f64(&self, col: &str, lo: f64, hi: f64) -> Option<f64> {
        self.raw(col)
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v >= lo && *v <= hi)
    }

    fn required_flag(&self, col: &str) -> Result<bool> {
        self.raw(col).and_then(parse_flag).ok_or_else(|| self.bad(col))
    }
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" => Some(false),
        _ => None,
    }
}

fn parse_gender(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "f" | "female" => Some(true),
        "m" | "male" => Some(false),
        other => parse_flag(other),
    }
}

fn header_index(
    headers: &StringRecord,
    columns: &[&'static str],
    required: &[&'static str],
    map: &ColumnMap,
) -> Result<HashMap<&'static str, usize>> {
    let mut index = HashMap::new();
    for &col in columns {
        let name = map.header(col);
        if let Some(i) = headers.iter().position(|h| h.trim() == name) {
            index.insert(col, i);
        } else if required.contains(&col) {
            return Err(Error::MissingColumn(name.to_string()));
        }
    }
    Ok(index)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub fn load_students(path: impl AsRef<Path>, map: &ColumnMap) -> Result<Vec<StudentRecord>> {
    read_students(open(path.as_ref())?, map)
}

pub fn read_students<R: Read>(reader: R, map: &ColumnMap) -> Result<Vec<StudentRecord>> {
    const REQUIRED: [&str; 12] = [
        "student_id",
        "cohort",
        "format",
        "gender",
        "first_gen",
        "urm",
        "high_need",
        "age",
        "transfer",
        "part_time",
        "stem_major",
        "dropout",
    ];
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index = header_index(&headers, &STUDENT_COLUMNS, &REQUIRED, map)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let record = rec?;
        let row = Row {
            record: &record,
            index: &index,
            row: i + 1,
        };
        let cohort = row
            .raw("cohort")
            .and_then(|s| s.parse::<i32>().ok())
            .ok_or_else(|| row.bad("cohort"))?;
        let format = row
            .raw("format")
            .and_then(|s| s.parse::<Format>().ok())
            .ok_or_else(|| row.bad("format"))?;
        let female = row
            .raw("gender")
            .and_then(parse_gender)
            .ok_or_else(|| row.bad("gender"))?;
        let age = row.required_f64("age")?;
        if age <= 0.0 {
            return Err(row.bad("age"));
        }
        out.push(StudentRecord {
            student_id: row.required_str("student_id")?,
            cohort,
            format,
            female,
            first_gen: row.required_flag("first_gen")?,
            urm: row.required_flag("urm")?,
            high_need: row.required_flag("high_need")?,
            age,
            hs_gpa: row.optional_f64("hs_gpa", 0.0, 4.0),
            sat_math: row.optional_f64("sat_math", 0.0, f64::MAX),
            sat_verbal: row.optional_f64("sat_verbal", 0.0, f64::MAX),
            transfer: row.required_flag("transfer")?,
            transfer_credits: row.optional_f64("transfer_credits", 0.0, f64::MAX),
            transfer_gpa: row.optional_f64("transfer_gpa", 0.0, 4.0),
            part_time: row.required_flag("part_time")?,
            major: row.optional_str("major"),
            minor: row.optional_str("minor"),
            stem_major: row.required_flag("stem_major")?,
            dropout: row.required_flag("dropout")?,
        });
    }
    Ok(out)
}

pub fn load_courses(path: impl AsRef<Path>, config: &FeatureConfig) -> Result<Vec<CourseRecord>> {
    read_courses(open(path.as_ref())?, config)
}

/// Reads course rows. A grade-points value must agree with the letter grade's mapped
/// points (within 0.01) when both are present; points alone are kept as given.
pub fn read_courses<R: Read>(reader: R, config: &FeatureConfig) -> Result<Vec<CourseRecord>> {
    const REQUIRED: [&str; 7] = [
        "student_id",
        "course_id",
        "units",
        "required_for_major",
        "course_type",
        "course_level",
        "session",
    ];
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index = header_index(&headers, &COURSE_COLUMNS, &REQUIRED, &config.course_columns)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let record = rec?;
        let row = Row {
            record: &record,
            index: &index,
            row: i + 1,
        };
        let letter_grade = row.raw("letter_grade").and_then(|s| s.parse::<LetterGrade>().ok());
        let mut grade_points = row.optional_f64("grade_points", 0.0, 4.33);
        if let (Some(g), Some(p)) = (letter_grade, grade_points) {
            match config.points(g) {
                Some(mapped) if (mapped - p).abs() > 0.01 => return Err(row.bad("grade_points")),
                None => grade_points = None,
                _ => {}
            }
        }
        let units = row.required_f64("units")?;
        if units <= 0.0 {
            return Err(row.bad("units"));
        }
        let course_type = row
            .raw("course_type")
            .and_then(|s| s.parse::<CourseType>().ok())
            .ok_or_else(|| row.bad("course_type"))?;
        let course_level = row
            .raw("course_level")
            .and_then(|s| s.parse::<u32>().ok())
            .and_then(CourseLevel::from_number)
            .ok_or_else(|| row.bad("course_level"))?;
        let session = row
            .raw("session")
            .and_then(|s| s.parse::<u8>().ok())
            .filter(|s| (1..=SESSIONS as u8).contains(s))
            .ok_or_else(|| row.bad("session"))?;
        out.push(CourseRecord {
            student_id: row.required_str("student_id")?,
            course_id: row.required_str("course_id")?,
            letter_grade,
            grade_points,
            units,
            required_for_major: row.required_flag("required_for_major")?,
            course_type,
            course_level,
            session,
        });
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_students<W: Write>(writer: W, students: &[StudentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STUDENT_COLUMNS)?;
    for s in students {
        w.write_record([
            s.student_id.clone(),
            s.cohort.to_string(),
            s.format.to_string(),
            flag(s.female).into(),
            flag(s.first_gen).into(),
            flag(s.urm).into(),
            flag(s.high_need).into(),
            s.age.to_string(),
            opt(s.hs_gpa),
            opt(s.sat_math),
            opt(s.sat_verbal),
            flag(s.transfer).into(),
            opt(s.transfer_credits),
            opt(s.transfer_gpa),
            flag(s.part_time).into(),
            s.major.clone().unwrap_or_default(),
            s.minor.clone().unwrap_or_default(),
            flag(s.stem_major).into(),
            flag(s.dropout).into(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<students>", e))?;
    Ok(())
}

pub fn write_courses<W: Write>(writer: W, courses: &[CourseRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COURSE_COLUMNS)?;
    for c in courses {
        w.write_record([
            c.student_id.clone(),
            c.course_id.clone(),
            c.letter_grade.map(|g| g.to_string()).unwrap_or_default(),
            opt(c.grade_points),
            c.units.to_string(),
            flag(c.required_for_major).into(),
            c.course_type.as_str().into(),
            c.course_level.number().to_string(),
            c.session.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<courses>", e))?;
    Ok(())
}
