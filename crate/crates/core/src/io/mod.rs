//! CSV ingestion and CSV/JSON report emission.
//!
//! Input errors carry the file, the 1-based line and the offending value.
//! CSV output shows four decimals; the JSON output keeps full precision and
//! parses back to the same values.

mod input;
mod output;

pub use input::{
    parse_assessments, parse_history, parse_reliability_overrides, read_assessments, read_history,
    read_reliability_overrides, AssessmentSet, ReliabilityOverrides, ANY_PROJECT,
};
pub use output::{
    calibration_csv, fmt4, reliability_csv, to_json, CriterionCalibration, CriterionResult, Report,
    ReportRow, RunMetadata, TopKEntry,
};
