use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::aggregation::Assessment;
use crate::calibration::HistoryRecord;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};

const HISTORY_COLUMNS: [&str; 5] = [
    "project_id",
    "expert_id",
    "criterion_id",
    "grade",
    "outcome",
];
const ASSESSMENT_COLUMNS: [&str; 4] = ["project_id", "expert_id", "criterion_id", "grade"];
const RELIABILITY_COLUMNS: [&str; 3] = ["project_id", "expert_id", "reliability"];

/// `project_id` value that applies an override to every project.
pub const ANY_PROJECT: &str = "*";

/// Data rows with the 1-based line they came from, and the index of each
/// requested column.
struct Table {
    columns: BTreeMap<String, usize>,
    rows: Vec<(u64, StringRecord)>,
}

impl Table {
    fn read<R: Read>(reader: R, source: &Path, required: &[&str]) -> Result<Self> {
        let mut csv = ReaderBuilder::new().trim(Trim::All).from_reader(reader);
        let headers = csv
            .headers()
            .map_err(|e| Error::parse(source, 1, e.to_string()))?
            .clone();
        let columns: BTreeMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_ascii_lowercase(), i))
            .collect();
        for col in required {
            if !columns.contains_key(*col) {
                return Err(Error::parse(source, 1, format!("missing column `{col}`")));
            }
        }
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::parse(source, line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            rows.push((line, record));
        }
        if rows.is_empty() {
            return Err(Error::parse(source, 1, "file has no data rows"));
        }
        Ok(Table { columns, rows })
    }

    fn open(path: &Path, required: &[&str]) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file, path, required)
    }

    fn field<'r>(&self, record: &'r StringRecord, column: &str) -> Option<&'r str> {
        self.columns.get(column).and_then(|&i| record.get(i))
    }

    fn get<'r>(
        &self,
        source: &Path,
        line: u64,
        record: &'r StringRecord,
        column: &str,
    ) -> Result<&'r str> {
        match self.field(record, column) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(Error::parse(source, line, format!("empty `{column}`"))),
        }
    }
}

/// Historical records, with grades and outcomes canonicalised.
pub fn parse_history(path: &Path, config: &PipelineConfig) -> Result<Vec<HistoryRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_history(file, path, config)
}

pub fn read_history<R: Read>(
    reader: R,
    source: &Path,
    config: &PipelineConfig,
) -> Result<Vec<HistoryRecord>> {
    let table = Table::read(reader, source, &HISTORY_COLUMNS)?;
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            let line = *line;
            let criterion_id = table.get(source, line, rec, "criterion_id")?;
            let scale = config.scale(criterion_id).map_err(|_| {
                Error::parse(source, line, format!("unknown criterion `{criterion_id}`"))
            })?;
            let grade = table.get(source, line, rec, "grade")?;
            let grade = scale.canonical(grade).map_err(|_| {
                Error::parse(
                    source,
                    line,
                    format!("unknown grade `{grade}` for criterion `{criterion_id}`"),
                )
            })?;
            let outcome = table.get(source, line, rec, "outcome")?;
            let outcome = config
                .frame
                .index_of(outcome)
                .map(|i| config.frame.label(i))
                .ok_or_else(|| {
                    Error::parse(source, line, format!("unknown outcome `{outcome}`"))
                })?;
            Ok(HistoryRecord {
                project_id: table.get(source, line, rec, "project_id")?.to_string(),
                expert_id: table.get(source, line, rec, "expert_id")?.to_string(),
                criterion_id: scale.criterion_id().to_string(),
                grade: grade.to_string(),
                outcome: outcome.to_string(),
            })
        })
        .collect()
}

/// Assessments to evaluate, plus actual outcomes from an optional
/// `outcome` column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssessmentSet {
    pub assessments: Vec<Assessment>,
    pub outcomes: BTreeMap<String, String>,
}

pub fn parse_assessments(path: &Path, config: &PipelineConfig) -> Result<AssessmentSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_assessments(file, path, config)
}

pub fn read_assessments<R: Read>(
    reader: R,
    source: &Path,
    config: &PipelineConfig,
) -> Result<AssessmentSet> {
    let table = Table::read(reader, source, &ASSESSMENT_COLUMNS)?;
    let mut set = AssessmentSet::default();
    let mut seen = BTreeMap::new();
    for (line, rec) in &table.rows {
        let line = *line;
        let project_id = table.get(source, line, rec, "project_id")?;
        let expert_id = table.get(source, line, rec, "expert_id")?;
        let criterion_id = table.get(source, line, rec, "criterion_id")?;
        let scale = config.scale(criterion_id).map_err(|_| {
            Error::parse(source, line, format!("unknown criterion `{criterion_id}`"))
        })?;
        let grade = table.get(source, line, rec, "grade")?;
        let grade = scale.canonical(grade).map_err(|_| {
            Error::parse(
                source,
                line,
                format!("unknown grade `{grade}` for criterion `{criterion_id}`"),
            )
        })?;
        let key = (
            project_id.to_string(),
            expert_id.to_string(),
            scale.criterion_id().to_string(),
        );
        if let Some(first) = seen.insert(key, line) {
            return Err(Error::parse(
                source,
                line,
                format!(
                    "duplicate assessment `{project_id},{expert_id},{criterion_id}` (first on line {first})"
                ),
            ));
        }
        if let Some(outcome) = table.field(rec, "outcome").filter(|o| !o.is_empty()) {
            let outcome = config
                .frame
                .index_of(outcome)
                .map(|i| config.frame.label(i).to_string())
                .ok_or_else(|| {
                    Error::parse(source, line, format!("unknown outcome `{outcome}`"))
                })?;
            match set.outcomes.get(project_id) {
                Some(prev) if *prev != outcome => {
                    return Err(Error::parse(
                        source,
                        line,
                        format!(
                            "outcome `{outcome}` contradicts `{prev}` for project `{project_id}`"
                        ),
                    ))
                }
                _ => {
                    set.outcomes.insert(project_id.to_string(), outcome);
                }
            }
        }
        set.assessments.push(Assessment {
            project_id: project_id.to_string(),
            expert_id: expert_id.to_string(),
            criterion_id: scale.criterion_id().to_string(),
            grade: grade.to_string(),
        });
    }
    Ok(set)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReliabilityOverrides {
    pub per_project: BTreeMap<(String, String), f64>,
    /// Rows whose `project_id` is `*`.
    pub per_expert: BTreeMap<String, f64>,
}

pub fn parse_reliability_overrides(path: &Path) -> Result<ReliabilityOverrides> {
    let table = Table::open(path, &RELIABILITY_COLUMNS)?;
    reliability_rows(&table, path)
}

pub fn read_reliability_overrides<R: Read>(
    reader: R,
    source: &Path,
) -> Result<ReliabilityOverrides> {
    let table = Table::read(reader, source, &RELIABILITY_COLUMNS)?;
    reliability_rows(&table, source)
}

fn reliability_rows(table: &Table, source: &Path) -> Result<ReliabilityOverrides> {
    let mut out = ReliabilityOverrides::default();
    for (line, rec) in &table.rows {
        let line = *line;
        let project_id = table.get(source, line, rec, "project_id")?;
        let expert_id = table.get(source, line, rec, "expert_id")?;
        let raw = table.get(source, line, rec, "reliability")?;
        let r: f64 = raw.parse().map_err(|_| {
            Error::parse(source, line, format!("reliability `{raw}` is not a number"))
        })?;
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::parse(
                source,
                line,
                format!("reliability `{raw}` is outside [0, 1]"),
            ));
        }
        let duplicate = if project_id == ANY_PROJECT {
            out.per_expert.insert(expert_id.to_string(), r).is_some()
        } else {
            out.per_project
                .insert((project_id.to_string(), expert_id.to_string()), r)
                .is_some()
        };
        if duplicate {
            return Err(Error::parse(
                source,
                line,
                format!("duplicate reliability for `{project_id},{expert_id}`"),
            ));
        }
    }
    Ok(out)
}
