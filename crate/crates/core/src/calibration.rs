//! Likelihood and belief matrices built from historical assessments.
//!
//! Every record pairs one expert's grade on one criterion with the eventual
//! outcome of the project. Counting records per (outcome, grade) gives the
//! likelihood `c[i][j] = P(grade j | hypothesis i)`; normalising each grade's
//! column of likelihoods gives the belief `p[i][j]` that grade `j` points to
//! hypothesis `i`. Histories of all experts are pooled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{BeliefDistribution, Frame};

/// One expert's grade on one criterion of a project with a known outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub project_id: String,
    pub expert_id: String,
    pub criterion_id: String,
    pub grade: String,
    pub outcome: String,
}

/// Ordered grade vocabulary of a criterion, lowest grade first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeScale {
    criterion_id: String,
    grades: Vec<String>,
}

impl GradeScale {
    pub fn new<I, S>(criterion_id: impl Into<String>, grades: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let criterion_id = criterion_id.into();
        let grades: Vec<String> = grades.into_iter().map(Into::into).collect();
        if grades.is_empty() {
            return Err(Error::InvalidInput(format!(
                "criterion `{criterion_id}` has an empty grade vocabulary"
            )));
        }
        for (i, g) in grades.iter().enumerate() {
            if g.trim().is_empty() {
                return Err(Error::EmptyLabel);
            }
            if grades[..i]
                .iter()
                .any(|h| h.trim().eq_ignore_ascii_case(g.trim()))
            {
                return Err(Error::DuplicateLabel(g.clone()));
            }
        }
        Ok(GradeScale {
            criterion_id,
            grades,
        })
    }

    pub fn criterion_id(&self) -> &str {
        &self.criterion_id
    }

    pub fn grades(&self) -> &[String] {
        &self.grades
    }

    /// Position of a grade, ignoring surrounding whitespace and ASCII case.
    pub fn index_of(&self, grade: &str) -> Option<usize> {
        let grade = grade.trim();
        self.grades
            .iter()
            .position(|g| g.trim().eq_ignore_ascii_case(grade))
    }

    pub fn resolve(&self, grade: &str) -> Result<usize> {
        self.index_of(grade).ok_or_else(|| Error::UnknownGrade {
            criterion: self.criterion_id.clone(),
            grade: grade.to_string(),
        })
    }

    /// Configured spelling of a grade.
    pub fn canonical(&self, grade: &str) -> Result<&str> {
        self.resolve(grade).map(|j| self.grades[j].as_str())
    }
}

/// Assessment counts per (hypothesis, grade) for one criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub criterion_id: String,
    pub frame: Frame,
    pub grades: Vec<String>,
    /// `counts[i][j]`: records with outcome `i` and grade `j`.
    pub counts: Vec<Vec<u64>>,
}

impl CountTable {
    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn column_totals(&self) -> Vec<u64> {
        (0..self.grades.len())
            .map(|j| self.counts.iter().map(|row| row[j]).sum())
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.row_totals().iter().sum()
    }
}

/// Count the records of `scale`'s criterion by outcome and grade.
pub fn tally(records: &[HistoryRecord], scale: &GradeScale, frame: &Frame) -> Result<CountTable> {
    let mut counts = vec![vec![0u64; scale.grades().len()]; frame.len()];
    for r in records
        .iter()
        .filter(|r| r.criterion_id.trim() == scale.criterion_id())
    {
        let i = frame
            .index_of(&r.outcome)
            .ok_or_else(|| Error::UnknownOutcome(r.outcome.clone()))?;
        let j = scale.resolve(&r.grade)?;
        counts[i][j] += 1;
    }
    let table = CountTable {
        criterion_id: scale.criterion_id().to_string(),
        frame: frame.clone(),
        grades: scale.grades().to_vec(),
        counts,
    };
    if let Some(i) = table.row_totals().iter().position(|&t| t == 0) {
        return Err(Error::EmptyHypothesisRow {
            criterion: table.criterion_id,
            hypothesis: frame.label(i).to_string(),
        });
    }
    Ok(table)
}

/// `entries[i][j]` is `P(grade j | hypothesis i)`; rows are stochastic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodMatrix {
    pub criterion_id: String,
    pub frame: Frame,
    pub grades: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl LikelihoodMatrix {
    pub fn column(&self, grade: usize) -> Vec<f64> {
        self.entries.iter().map(|row| row[grade]).collect()
    }
}

pub fn likelihoods(table: &CountTable) -> Result<LikelihoodMatrix> {
    let totals = table.row_totals();
    let entries = table
        .counts
        .iter()
        .zip(&totals)
        .enumerate()
        .map(|(i, (row, &total))| {
            if total == 0 {
                return Err(Error::EmptyHypothesisRow {
                    criterion: table.criterion_id.clone(),
                    hypothesis: table.frame.label(i).to_string(),
                });
            }
            Ok(row.iter().map(|&c| c as f64 / total as f64).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(LikelihoodMatrix {
        criterion_id: table.criterion_id.clone(),
        frame: table.frame.clone(),
        grades: table.grades.clone(),
        entries,
    })
}

/// Presentation rounding applied to belief matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Rounding {
    #[default]
    #[serde(rename = "none")]
    None,
    /// Four decimal places, columns kept summing to exactly one.
    #[serde(rename = "4dp")]
    FourDecimals,
}

/// `entries[i][j]` is the belief that grade `j` points to hypothesis `i`;
/// columns are stochastic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefMatrix {
    pub criterion_id: String,
    pub frame: Frame,
    pub grades: Vec<String>,
    pub entries: Vec<Vec<f64>>,
    pub rounding: Rounding,
}

impl BeliefMatrix {
    pub fn scale(&self) -> Result<GradeScale> {
        GradeScale::new(self.criterion_id.clone(), self.grades.clone())
    }

    pub fn column(&self, grade: usize) -> Vec<f64> {
        self.entries.iter().map(|row| row[grade]).collect()
    }

    /// Belief distribution carried by a grade.
    pub fn grade_to_bd(&self, grade: &str) -> Result<BeliefDistribution> {
        let grade = self.scale()?.resolve(grade)?;
        BeliefDistribution::from_singletons(self.frame.clone(), &self.column(grade))
    }
}

pub fn beliefs_from_likelihoods(c: &LikelihoodMatrix, rounding: Rounding) -> Result<BeliefMatrix> {
    let n = c.frame.len();
    let mut entries = vec![vec![0.0; c.grades.len()]; n];
    for (j, grade) in c.grades.iter().enumerate() {
        let mut column = c.column(j);
        let total: f64 = column.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::UnobservedGrade {
                criterion: c.criterion_id.clone(),
                grade: grade.clone(),
            });
        }
        column.iter_mut().for_each(|p| *p /= total);
        if rounding == Rounding::FourDecimals {
            round_column(&mut column);
        }
        for (row, p) in entries.iter_mut().zip(column) {
            row[j] = p;
        }
    }
    Ok(BeliefMatrix {
        criterion_id: c.criterion_id.clone(),
        frame: c.frame.clone(),
        grades: c.grades.clone(),
        entries,
        rounding,
    })
}

const DECIMAL_UNITS: i64 = 10_000;

/// Round half-up to four decimals. If the rounded column no longer sums to
/// one, the entries with the largest rounding error absorb the difference.
fn round_column(column: &mut [f64]) {
    let scaled: Vec<f64> = column.iter().map(|p| p * DECIMAL_UNITS as f64).collect();
    let mut units: Vec<i64> = scaled.iter().map(|s| (s + 0.5).floor() as i64).collect();
    let mut surplus: i64 = units.iter().sum::<i64>() - DECIMAL_UNITS;
    while surplus != 0 {
        let err = |k: usize| scaled[k] - units[k] as f64;
        let k = if surplus > 0 {
            (0..units.len())
                .filter(|&k| units[k] > 0)
                .min_by(|&a, &b| err(a).total_cmp(&err(b)))
        } else {
            (0..units.len()).max_by(|&a, &b| err(a).total_cmp(&err(b)))
        }
        .expect("non-empty column");
        units[k] -= surplus.signum();
        surplus -= surplus.signum();
    }
    for (p, u) in column.iter_mut().zip(units) {
        *p = u as f64 / DECIMAL_UNITS as f64;
    }
}
