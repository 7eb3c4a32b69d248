//! Student/course data model, CSV ingestion, feature engineering, scaling and
//! cohort splitting.

pub mod config;
pub mod features;
pub mod load;
pub mod records;
pub mod scaler;
pub mod schema;
pub mod split;

pub use config::{ColumnMap, FeatureConfig};
pub use features::{
    engineer_features, CategoryVocab, ColumnSpec, Design, FeatureMatrix, FeatureSet, MatrixSchema,
    MISSING_SENTINEL,
};
pub use load::{load_courses, load_students, read_courses, read_students, write_courses, write_students};
pub use records::{
    CourseLevel, CourseRecord, CourseType, Format, LetterGrade, ProtectedAttribute, StudentRecord,
};
pub use scaler::RobustScaler;
pub use schema::{reference_schema, Category, ColumnKind, MissingFamily};
pub use split::{last_cohort, split_by_cohort};
