//! Pipeline configuration and the bundled `nsfc-case-study` preset.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::{AggregationConfig, ExpertWeightMode};
use crate::calibration::{GradeScale, Rounding};
use crate::error::{Error, Result};
use crate::evidence::Frame;
use crate::ranking::GradeScores;
use crate::reliability::{DefaultReliability, RecommendationRule};

pub const CASE_STUDY_PRESET: &str = "nsfc-case-study";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Grade vocabulary, lowest first.
    pub grades: Vec<String>,
    pub weight: f64,
    /// Baseline score of each grade; empty when the criterion is not scored.
    #[serde(default)]
    pub scores: Vec<f64>,
    /// Present only on the recommendation criterion: grades counted as a
    /// "fund" recommendation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fund_grades: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Outcome hypotheses; the first one is "funded".
    pub frame: Frame,
    pub criteria: Vec<CriterionConfig>,
    #[serde(default)]
    pub expert_weight_mode: ExpertWeightMode,
    #[serde(default)]
    pub calibration_rounding: Rounding,
    #[serde(default)]
    pub default_reliability: DefaultReliability,
}

impl PipelineConfig {
    /// Two criteria with NSFC grades, weights 2:1 and baseline scores
    /// 1..4 and 0..2.
    pub fn nsfc_case_study() -> Self {
        let strings = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        PipelineConfig {
            frame: Frame::new(["Funded", "Unfunded"]).expect("static frame"),
            criteria: vec![
                CriterionConfig {
                    id: "C1".into(),
                    name: Some("Comprehensive evaluation level".into()),
                    grades: strings(&["Poor", "Average", "Good", "Excellent"]),
                    weight: 2.0,
                    scores: vec![1.0, 2.0, 3.0, 4.0],
                    fund_grades: None,
                },
                CriterionConfig {
                    id: "C2".into(),
                    name: Some("Funding recommendation".into()),
                    grades: strings(&["Not fund", "Fund", "Fund with priority"]),
                    weight: 1.0,
                    scores: vec![0.0, 1.0, 2.0],
                    fund_grades: Some(strings(&["Fund", "Fund with priority"])),
                },
            ],
            expert_weight_mode: ExpertWeightMode::Raw,
            calibration_rounding: Rounding::None,
            default_reliability: DefaultReliability::Error,
        }
    }

    /// A preset name or a path to a JSON file.
    pub fn load(source: &str) -> Result<Self> {
        if source == CASE_STUDY_PRESET {
            return Ok(Self::nsfc_case_study());
        }
        let path = Path::new(source);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path, e.line() as u64, format!("invalid config: {e}")))?;
        config.validate().map_err(|e| Error::io(path, e))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.criteria.is_empty() {
            return Err(Error::InvalidInput("no criteria configured".into()));
        }
        for (i, c) in self.criteria.iter().enumerate() {
            if self.criteria[..i].iter().any(|d| d.id == c.id) {
                return Err(Error::DuplicateLabel(c.id.clone()));
            }
            GradeScale::new(c.id.clone(), c.grades.clone())?;
            if !c.scores.is_empty() && c.scores.len() != c.grades.len() {
                return Err(Error::InvalidInput(format!(
                    "criterion `{}` has {} grades but {} scores",
                    c.id,
                    c.grades.len(),
                    c.scores.len()
                )));
            }
        }
        if self
            .criteria
            .iter()
            .filter(|c| c.fund_grades.is_some())
            .count()
            > 1
        {
            return Err(Error::InvalidInput(
                "more than one criterion is marked as the recommendation criterion".into(),
            ));
        }
        if let DefaultReliability::Fixed(r) = self.default_reliability {
            crate::error::check_unit("default reliability", r)?;
        }
        self.aggregation().validate()?;
        self.recommendation_rule()?;
        Ok(())
    }

    pub fn scales(&self) -> Result<Vec<GradeScale>> {
        self.criteria
            .iter()
            .map(|c| GradeScale::new(c.id.clone(), c.grades.clone()))
            .collect()
    }

    pub fn scale(&self, criterion_id: &str) -> Result<GradeScale> {
        let c = self
            .criteria
            .iter()
            .find(|c| c.id == criterion_id.trim())
            .ok_or_else(|| Error::UnknownCriterion(criterion_id.to_string()))?;
        GradeScale::new(c.id.clone(), c.grades.clone())
    }

    pub fn aggregation(&self) -> AggregationConfig {
        AggregationConfig {
            criterion_weights: self
                .criteria
                .iter()
                .map(|c| (c.id.clone(), c.weight))
                .collect(),
            expert_weight_mode: self.expert_weight_mode,
            calibration_rounding: self.calibration_rounding,
        }
    }

    pub fn recommendation_rule(&self) -> Result<Option<RecommendationRule>> {
        self.criteria
            .iter()
            .find_map(|c| c.fund_grades.as_ref().map(|fund| (c, fund)))
            .map(|(c, fund)| {
                RecommendationRule::new(
                    GradeScale::new(c.id.clone(), c.grades.clone())?,
                    fund,
                    self.frame.label(0),
                )
            })
            .transpose()
    }

    /// Baseline mappings for every scored criterion.
    pub fn grade_scores(&self) -> Result<Vec<GradeScores>> {
        self.criteria
            .iter()
            .filter(|c| !c.scores.is_empty())
            .map(|c| {
                GradeScores::new(
                    GradeScale::new(c.id.clone(), c.grades.clone())?,
                    c.scores.clone(),
                )
            })
            .collect()
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
