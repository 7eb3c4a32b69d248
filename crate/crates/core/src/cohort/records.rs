//! Raw student and course rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Online,
    Residential,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Online => "online",
            Format::Residential => "residential",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "online" => Ok(Format::Online),
            "residential" => Ok(Format::Residential),
            other => Err(Error::InvalidInput(format!("unknown format `{other}`"))),
        }
    }
}

/// The four protected attributes, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtectedAttribute {
    Gender,
    FirstGen,
    Urm,
    HighNeed,
}

impl ProtectedAttribute {
    pub const ALL: [ProtectedAttribute; 4] = [
        ProtectedAttribute::Gender,
        ProtectedAttribute::FirstGen,
        ProtectedAttribute::Urm,
        ProtectedAttribute::HighNeed,
    ];

    pub fn column(self) -> &'static str {
        match self {
            ProtectedAttribute::Gender => "gender",
            ProtectedAttribute::FirstGen => "first_gen",
            ProtectedAttribute::Urm => "urm",
            ProtectedAttribute::HighNeed => "high_need",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Display names of the flagged group (flag = 1) and its complement (flag = 0).
    pub fn group_names(self) -> (&'static str, &'static str) {
        match self {
            ProtectedAttribute::Gender => ("Female", "Male"),
            ProtectedAttribute::FirstGen => ("First-gen", "Continuing-gen"),
            ProtectedAttribute::Urm => ("URM", "Non-URM"),
            ProtectedAttribute::HighNeed => ("High need", "Low need"),
        }
    }
}

impl fmt::Display for ProtectedAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// One row per student. `female` carries the binary gender flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub student_id: String,
    pub cohort: i32,
    pub format: Format,
    pub female: bool,
    pub first_gen: bool,
    pub urm: bool,
    pub high_need: bool,
    pub age: f64,
    pub hs_gpa: Option<f64>,
    pub sat_math: Option<f64>,
    pub sat_verbal: Option<f64>,
    pub transfer: bool,
    pub transfer_credits: Option<f64>,
    pub transfer_gpa: Option<f64>,
    pub part_time: bool,
    pub major: Option<String>,
    pub minor: Option<String>,
    pub stem_major: bool,
    pub dropout: bool,
}

impl StudentRecord {
    pub fn protected(&self, attr: ProtectedAttribute) -> bool {
        match attr {
            ProtectedAttribute::Gender => self.female,
            ProtectedAttribute::FirstGen => self.first_gen,
            ProtectedAttribute::Urm => self.urm,
            ProtectedAttribute::HighNeed => self.high_need,
        }
    }

    pub fn protected_flags(&self) -> [bool; 4] {
        ProtectedAttribute::ALL.map(|a| self.protected(a))
    }
}

/// Letter grades in descending order, followed by withdrawal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LetterGrade {
    APlus,
    A,
    AMinus,
    BPlus,
    B,
    BMinus,
    CPlus,
    C,
    CMinus,
    DPlus,
    D,
    DMinus,
    F,
    W,
}

impl LetterGrade {
    pub const ALL: [LetterGrade; 14] = [
        LetterGrade::APlus,
        LetterGrade::A,
        LetterGrade::AMinus,
        LetterGrade::BPlus,
        LetterGrade::B,
        LetterGrade::BMinus,
        LetterGrade::CPlus,
        LetterGrade::C,
        LetterGrade::CMinus,
        LetterGrade::DPlus,
        LetterGrade::D,
        LetterGrade::DMinus,
        LetterGrade::F,
        LetterGrade::W,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LetterGrade::APlus => "A+",
            LetterGrade::A => "A",
            LetterGrade::AMinus => "A-",
            LetterGrade::BPlus => "B+",
            LetterGrade::B => "B",
            LetterGrade::BMinus => "B-",
            LetterGrade::CPlus => "C+",
            LetterGrade::C => "C",
            LetterGrade::CMinus => "C-",
            LetterGrade::DPlus => "D+",
            LetterGrade::D => "D",
            LetterGrade::DMinus => "D-",
            LetterGrade::F => "F",
            LetterGrade::W => "W",
        }
    }

    /// Column-safe suffix, e.g. `a_plus`.
    pub fn slug(self) -> &'static str {
        match self {
            LetterGrade::APlus => "a_plus",
            LetterGrade::A => "a",
            LetterGrade::AMinus => "a_minus",
            LetterGrade::BPlus => "b_plus",
            LetterGrade::B => "b",
            LetterGrade::BMinus => "b_minus",
            LetterGrade::CPlus => "c_plus",
            LetterGrade::C => "c",
            LetterGrade::CMinus => "c_minus",
            LetterGrade::DPlus => "d_plus",
            LetterGrade::D => "d",
            LetterGrade::DMinus => "d_minus",
            LetterGrade::F => "f",
            LetterGrade::W => "w",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_withdrawal(self) -> bool {
        self == LetterGrade::W
    }
}

impl fmt::Display for LetterGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LetterGrade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        LetterGrade::ALL
            .into_iter()
            .find(|g| g.as_str() == t)
            .ok_or_else(|| Error::InvalidInput(format!("unknown letter grade `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CourseType {
    Lecture,
    Seminar,
    Lab,
    Other,
}

impl CourseType {
    pub const ALL: [CourseType; 4] = [
        CourseType::Lecture,
        CourseType::Seminar,
        CourseType::Lab,
        CourseType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CourseType::Lecture => "lecture",
            CourseType::Seminar => "seminar",
            CourseType::Lab => "lab",
            CourseType::Other => "other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for CourseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        CourseType::ALL
            .into_iter()
            .find(|c| c.as_str() == t)
            .ok_or_else(|| Error::InvalidInput(format!("unknown course type `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CourseLevel {
    L100,
    L200,
    L300,
    L400,
}

impl CourseLevel {
    pub const ALL: [CourseLevel; 4] = [
        CourseLevel::L100,
        CourseLevel::L200,
        CourseLevel::L300,
        CourseLevel::L400,
    ];

    pub fn number(self) -> u32 {
        match self {
            CourseLevel::L100 => 100,
            CourseLevel::L200 => 200,
            CourseLevel::L300 => 300,
            CourseLevel::L400 => 400,
        }
    }

    pub fn from_number(n: u32) -> Option<Self> {
        CourseLevel::ALL.into_iter().find(|l| l.number() == n)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Number of sub-term sessions in a Fall term (two half-term sessions and the full term).
pub const SESSIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseRecord {
    pub student_id: String,
    pub course_id: String,
    pub letter_grade: Option<LetterGrade>,
    pub grade_points: Option<f64>,
    pub units: f64,
    pub required_for_major: bool,
    pub course_type: CourseType,
    pub course_level: CourseLevel,
    /// 1-based session index, `1..=SESSIONS`.
    pub session: u8,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_enums() {
        assert_eq!("a-".parse::<LetterGrade>().unwrap(), LetterGrade::AMinus);
        assert_eq!("W".parse::<LetterGrade>().unwrap(), LetterGrade::W);
        assert!("E".parse::<LetterGrade>().is_err());
        assert_eq!("Online".parse::<Format>().unwrap(), Format::Online);
        assert_eq!("lab".parse::<CourseType>().unwrap(), CourseType::Lab);
        assert_eq!(CourseLevel::from_number(300), Some(CourseLevel::L300));
        assert_eq!(CourseLevel::from_number(500), None);
    }
}
