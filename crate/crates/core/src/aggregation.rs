//! Two-stage aggregation: experts within each criterion, then criteria into
//! an overall distribution whose first hypothesis is the funding probability.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calibration::{BeliefMatrix, Rounding};
use crate::error::{check_unit, Error, Result};
use crate::evidence::{combine, BeliefDistribution, Evidence};
use crate::reliability::{RecommendationRule, ReliabilityTable};

/// One expert's grade for one project on one criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assessment {
    pub project_id: String,
    pub expert_id: String,
    pub criterion_id: String,
    pub grade: String,
}

/// How expert reliabilities become evidence weights within a criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpertWeightMode {
    /// `w = r`, unnormalised.
    #[default]
    Raw,
    /// `w = r = r_k / sum(r)` over the experts on the criterion.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationConfig {
    /// Relative criterion weights; normalised to sum to one before use,
    /// with each criterion's reliability set equal to its weight.
    pub criterion_weights: Vec<(String, f64)>,
    pub expert_weight_mode: ExpertWeightMode,
    pub calibration_rounding: Rounding,
}

impl AggregationConfig {
    pub fn validate(&self) -> Result<()> {
        for (id, w) in &self.criterion_weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "criterion `{id}` has invalid weight {w}"
                )));
            }
        }
        if !self.criterion_weights.iter().any(|(_, w)| *w > 0.0) {
            return Err(Error::InvalidInput(
                "no criterion has a positive weight".into(),
            ));
        }
        Ok(())
    }

    fn weight(&self, criterion_id: &str) -> Result<f64> {
        self.criterion_weights
            .iter()
            .find(|(id, _)| id == criterion_id)
            .map(|&(_, w)| w)
            .ok_or_else(|| Error::UnknownCriterion(criterion_id.to_string()))
    }
}

/// Evidence for one assessment. `reliability_sum` is the total reliability
/// of all experts on the same criterion and is only read in normalised mode.
pub fn expert_evidence(
    assessment: &Assessment,
    beliefs: &BeliefMatrix,
    reliability: f64,
    mode: ExpertWeightMode,
    reliability_sum: f64,
) -> Result<Evidence> {
    let bd = beliefs.grade_to_bd(&assessment.grade)?;
    let r = check_unit("reliability", reliability)?;
    let r = match mode {
        ExpertWeightMode::Raw => r,
        ExpertWeightMode::Normalized if reliability_sum > 0.0 => r / reliability_sum,
        ExpertWeightMode::Normalized => 0.0,
    };
    Evidence::new(bd, r, r)
}

/// Combine every expert's assessment on one criterion. Each entry pairs an
/// assessment with its expert's reliability.
pub fn aggregate_criterion(
    rated: &[(Assessment, f64)],
    beliefs: &BeliefMatrix,
    mode: ExpertWeightMode,
) -> Result<BeliefDistribution> {
    if rated.is_empty() {
        return Err(Error::NoEffectiveEvidence(format!(
            "no assessments on criterion `{}`",
            beliefs.criterion_id
        )));
    }
    let total: f64 = rated.iter().map(|(_, r)| r).sum();
    let evidence = rated
        .iter()
        .map(|(a, r)| expert_evidence(a, beliefs, *r, mode, total))
        .collect::<Result<Vec<_>>>()?;
    if evidence.iter().all(|e| e.weight() == 0.0) {
        return Err(Error::NoEffectiveEvidence(format!(
            "every expert on criterion `{}` has zero reliability",
            beliefs.criterion_id
        )));
    }
    combine(&evidence)
}

/// Combine criterion-level distributions using normalised criterion weights.
pub fn aggregate_project(
    per_criterion: &[(String, BeliefDistribution)],
    config: &AggregationConfig,
) -> Result<BeliefDistribution> {
    let weights = per_criterion
        .iter()
        .map(|(id, _)| config.weight(id))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::NoEffectiveEvidence(
            "assessed criteria have zero total weight".into(),
        ));
    }
    let evidence = per_criterion
        .iter()
        .zip(&weights)
        .map(|((_, bd), w)| {
            let w = (w / total).min(1.0);
            Evidence::new(bd.clone(), w, w)
        })
        .collect::<Result<Vec<_>>>()?;
    combine(&evidence)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectEvaluation {
    pub project_id: String,
    /// Criterion-level distributions in configured criterion order.
    pub criteria: Vec<(String, BeliefDistribution)>,
    pub overall: BeliefDistribution,
    /// Overall belief in the first hypothesis of the frame.
    pub funding_probability: f64,
}

/// Full pipeline for one project.
///
/// `rule` identifies the recommendation criterion; when present, each
/// expert's grade there sets the direction used for history-based
/// reliabilities.
pub fn evaluate_project(
    project_id: &str,
    assessments: &[Assessment],
    matrices: &[BeliefMatrix],
    reliabilities: &ReliabilityTable,
    rule: Option<&RecommendationRule>,
    config: &AggregationConfig,
) -> Result<ProjectEvaluation> {
    config.validate()?;
    let assessments: Vec<&Assessment> = assessments
        .iter()
        .filter(|a| a.project_id == project_id)
        .collect();
    for a in &assessments {
        if !matrices.iter().any(|m| m.criterion_id == a.criterion_id) {
            return Err(Error::UnknownCriterion(a.criterion_id.clone()));
        }
    }

    let mut directions = BTreeMap::new();
    if let Some(rule) = rule {
        for a in assessments
            .iter()
            .filter(|a| a.criterion_id == rule.criterion_id())
        {
            directions.insert(a.expert_id.as_str(), rule.recommendation(&a.grade)?);
        }
    }

    let mut criteria = Vec::new();
    for (criterion_id, _) in &config.criterion_weights {
        let Some(beliefs) = matrices.iter().find(|m| &m.criterion_id == criterion_id) else {
            continue;
        };
        let rated = assessments
            .iter()
            .filter(|a| &a.criterion_id == criterion_id)
            .map(|a| {
                let direction = directions.get(a.expert_id.as_str()).copied();
                let r = reliabilities.resolve(project_id, &a.expert_id, direction)?;
                Ok(((*a).clone(), r))
            })
            .collect::<Result<Vec<_>>>()?;
        if rated.is_empty() {
            continue;
        }
        let bd = aggregate_criterion(&rated, beliefs, config.expert_weight_mode)?;
        criteria.push((criterion_id.clone(), bd));
    }
    if criteria.is_empty() {
        return Err(Error::InvalidInput(format!(
            "project `{project_id}` has no assessments on any configured criterion"
        )));
    }

    let overall = aggregate_project(&criteria, config)?;
    Ok(ProjectEvaluation {
        project_id: project_id.to_string(),
        funding_probability: overall.singletons()[0],
        criteria,
        overall,
    })
}

/// Assessments keyed by project id.
pub fn group_by_project(assessments: &[Assessment]) -> BTreeMap<String, Vec<Assessment>> {
    let mut groups: BTreeMap<String, Vec<Assessment>> = BTreeMap::new();
    for a in assessments {
        groups
            .entry(a.project_id.clone())
            .or_default()
            .push(a.clone());
    }
    groups
}
