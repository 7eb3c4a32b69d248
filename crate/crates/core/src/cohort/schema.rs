//! The reference feature schema: 58 logical features in four categories.
//!
//! Logical features map onto matrix columns one-to-one, except `major` and
//! `minor`, which expand into one-hot buckets. Missing-value indicator columns
//! are appended after all logical features, one per [`MissingFamily`].
//!
//! Course credits by type and by level are reported both as units and as
//! course tallies. Withdrawals count toward `total_courses`.

use serde::{Deserialize, Serialize};

use super::records::{CourseLevel, CourseType, LetterGrade, SESSIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Protected,
    Incoming,
    Program,
    Course,
    Indicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    /// 0/1 columns; passed through scaling untouched.
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingFamily {
    HsGpa,
    TestScores,
    Transfer,
    Major,
    Minor,
    TermGrades,
    Session1Grades,
    Session2Grades,
    Session3Grades,
}

impl MissingFamily {
    pub const ALL: [MissingFamily; 9] = [
        MissingFamily::HsGpa,
        MissingFamily::TestScores,
        MissingFamily::Transfer,
        MissingFamily::Major,
        MissingFamily::Minor,
        MissingFamily::TermGrades,
        MissingFamily::Session1Grades,
        MissingFamily::Session2Grades,
        MissingFamily::Session3Grades,
    ];

    pub fn session(k: usize) -> MissingFamily {
        match k {
            1 => MissingFamily::Session1Grades,
            2 => MissingFamily::Session2Grades,
            3 => MissingFamily::Session3Grades,
            _ => panic!("session index {k} out of range"),
        }
    }

    pub fn indicator_column(self) -> &'static str {
        match self {
            MissingFamily::HsGpa => "missing_hs_gpa",
            MissingFamily::TestScores => "missing_test_scores",
            MissingFamily::Transfer => "missing_transfer",
            MissingFamily::Major => "missing_major",
            MissingFamily::Minor => "missing_minor",
            MissingFamily::TermGrades => "missing_term_grades",
            MissingFamily::Session1Grades => "missing_session1_grades",
            MissingFamily::Session2Grades => "missing_session2_grades",
            MissingFamily::Session3Grades => "missing_session3_grades",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    Single,
    OneHot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalFeature {
    pub name: String,
    pub category: Category,
    pub kind: ColumnKind,
    pub expansion: Expansion,
    pub missing: Option<MissingFamily>,
}

fn feature(
    name: impl Into<String>,
    category: Category,
    kind: ColumnKind,
    missing: Option<MissingFamily>,
) -> LogicalFeature {
    LogicalFeature {
        name: name.into(),
        category,
        kind,
        expansion: Expansion::Single,
        missing,
    }
}

/// The 58 logical AWARE features in column order.
pub fn reference_schema() -> Vec<LogicalFeature> {
    use Category::*;
    use ColumnKind::*;
    let mut s = Vec::with_capacity(58);
    for name in ["gender", "first_gen", "urm", "high_need"] {
        s.push(feature(name, Protected, Binary, None));
    }

    s.push(feature("age", Incoming, Continuous, None));
    s.push(feature("hs_gpa", Incoming, Continuous, Some(MissingFamily::HsGpa)));
    s.push(feature("sat_math", Incoming, Continuous, Some(MissingFamily::TestScores)));
    s.push(feature("sat_verbal", Incoming, Continuous, Some(MissingFamily::TestScores)));
    s.push(feature("transfer", Incoming, Binary, None));
    s.push(feature("transfer_credits", Incoming, Continuous, Some(MissingFamily::Transfer)));
    s.push(feature("transfer_gpa", Incoming, Continuous, Some(MissingFamily::Transfer)));

    s.push(feature("part_time", Program, Binary, None));
    for (name, fam) in [("major", MissingFamily::Major), ("minor", MissingFamily::Minor)] {
        s.push(LogicalFeature {
            name: name.into(),
            category: Program,
            kind: Binary,
            expansion: Expansion::OneHot,
            missing: Some(fam),
        });
    }
    s.push(feature("stem_major", Program, Binary, None));

    for name in ["total_courses", "total_units", "pct_required", "units_required", "units_earned"] {
        let missing = (name == "pct_required").then_some(MissingFamily::TermGrades);
        s.push(feature(name, Course, Continuous, missing));
    }
    for t in CourseType::ALL {
        s.push(feature(format!("units_{}", t.as_str()), Course, Continuous, None));
    }
    for t in CourseType::ALL {
        s.push(feature(format!("courses_{}", t.as_str()), Course, Continuous, None));
    }
    for l in CourseLevel::ALL {
        s.push(feature(format!("units_level_{}", l.number()), Course, Continuous, None));
    }
    for l in CourseLevel::ALL {
        s.push(feature(format!("courses_level_{}", l.number()), Course, Continuous, None));
    }
    s.push(feature("term_gpa", Course, Continuous, Some(MissingFamily::TermGrades)));
    for k in 1..=SESSIONS {
        let fam = Some(MissingFamily::session(k));
        s.push(feature(format!("session{k}_grade_mean"), Course, Continuous, fam));
        s.push(feature(format!("session{k}_grade_var"), Course, Continuous, fam));
    }
    for g in LetterGrade::ALL {
        s.push(feature(
            format!("pct_grade_{}", g.slug()),
            Course,
            Continuous,
            Some(MissingFamily::TermGrades),
        ));
    }
    s.push(feature(
        "pct_grade_missing",
        Course,
        Continuous,
        Some(MissingFamily::TermGrades),
    ));
    s
}
