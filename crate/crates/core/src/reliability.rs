//! Expert reliability from review track records.
//!
//! An expert's past recommendations are tallied against actual outcomes in a
//! confusion matrix. A "Fund" recommendation is trusted in proportion to
//! `TP / (TP + FP)` and a "Not fund" recommendation in proportion to
//! `TN / (TN + FN)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calibration::{GradeScale, HistoryRecord};
use crate::error::{check_unit, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recommendation {
    Fund,
    NotFund,
}

/// Binarises grades of the recommendation criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecommendationRule {
    scale: GradeScale,
    fund: Vec<bool>,
    positive_outcome: String,
}

impl RecommendationRule {
    pub fn new<S: AsRef<str>>(
        scale: GradeScale,
        fund_grades: &[S],
        positive_outcome: impl Into<String>,
    ) -> Result<Self> {
        let mut fund = vec![false; scale.grades().len()];
        for g in fund_grades {
            fund[scale.resolve(g.as_ref())?] = true;
        }
        Ok(RecommendationRule {
            scale,
            fund,
            positive_outcome: positive_outcome.into(),
        })
    }

    pub fn criterion_id(&self) -> &str {
        self.scale.criterion_id()
    }

    pub fn recommendation(&self, grade: &str) -> Result<Recommendation> {
        Ok(if self.fund[self.scale.resolve(grade)?] {
            Recommendation::Fund
        } else {
            Recommendation::NotFund
        })
    }

    fn is_positive(&self, outcome: &str) -> bool {
        outcome
            .trim()
            .eq_ignore_ascii_case(self.positive_outcome.trim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Funded, recommended fund.
    pub true_pos: u64,
    /// Funded, recommended not fund.
    pub false_neg: u64,
    /// Unfunded, recommended fund.
    pub false_pos: u64,
    /// Unfunded, recommended not fund.
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_neg + self.false_pos + self.true_neg
    }

    pub fn is_usable(&self) -> bool {
        self.total() > 0
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.true_pos + self.true_neg, self.total())
    }
}

/// Tally one expert's recommendations against outcomes. Records of other
/// experts or criteria are ignored; no matching record yields an unusable
/// (all-zero) matrix.
pub fn confusion_from_history(
    records: &[HistoryRecord],
    expert_id: &str,
    rule: &RecommendationRule,
) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::default();
    for r in records
        .iter()
        .filter(|r| r.expert_id == expert_id && r.criterion_id.trim() == rule.criterion_id())
    {
        match (rule.is_positive(&r.outcome), rule.recommendation(&r.grade)?) {
            (true, Recommendation::Fund) => cm.true_pos += 1,
            (true, Recommendation::NotFund) => cm.false_neg += 1,
            (false, Recommendation::Fund) => cm.false_pos += 1,
            (false, Recommendation::NotFund) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

/// Directional reliabilities of one expert. `None` marks a 0/0 rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityProfile {
    pub expert_id: String,
    pub confusion: ConfusionMatrix,
    pub positive_rate: Option<f64>,
    pub negative_rate: Option<f64>,
}

impl ReliabilityProfile {
    pub fn is_usable(&self) -> bool {
        self.confusion.is_usable()
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn rates(expert_id: impl Into<String>, cm: ConfusionMatrix) -> ReliabilityProfile {
    ReliabilityProfile {
        expert_id: expert_id.into(),
        confusion: cm,
        positive_rate: ratio(cm.true_pos, cm.true_pos + cm.false_pos),
        negative_rate: ratio(cm.true_neg, cm.true_neg + cm.false_neg),
    }
}

/// Reliability of a recommendation in the given direction. An undefined
/// rate counts as zero: no track record in that direction, no support.
pub fn reliability_for(
    profile: &ReliabilityProfile,
    recommendation: Recommendation,
) -> Result<f64> {
    if !profile.is_usable() {
        return Err(Error::NoHistory(profile.expert_id.clone()));
    }
    let rate = match recommendation {
        Recommendation::Fund => profile.positive_rate,
        Recommendation::NotFund => profile.negative_rate,
    };
    Ok(rate.unwrap_or(0.0))
}

/// Profiles for every expert with at least one record on the rule's criterion.
pub fn profiles_from_history(
    records: &[HistoryRecord],
    rule: &RecommendationRule,
) -> Result<BTreeMap<String, ReliabilityProfile>> {
    let mut experts: Vec<&str> = records
        .iter()
        .filter(|r| r.criterion_id.trim() == rule.criterion_id())
        .map(|r| r.expert_id.as_str())
        .collect();
    experts.sort_unstable();
    experts.dedup();
    experts
        .into_iter()
        .map(|e| {
            Ok((
                e.to_string(),
                rates(e, confusion_from_history(records, e, rule)?),
            ))
        })
        .collect()
}

/// What to do for an expert with neither an override nor a usable history.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefaultReliability {
    #[default]
    Error,
    Fixed(f64),
}

/// Resolves the reliability of an expert on a project.
///
/// Lookup order: project-specific override, expert-wide override, history
/// profile (direction from the expert's recommendation), then the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReliabilityTable {
    pub per_project: BTreeMap<(String, String), f64>,
    pub per_expert: BTreeMap<String, f64>,
    pub profiles: BTreeMap<String, ReliabilityProfile>,
    pub default: DefaultReliability,
}

impl ReliabilityTable {
    pub fn with_override(mut self, project_id: &str, expert_id: &str, r: f64) -> Result<Self> {
        self.per_project.insert(
            (project_id.to_string(), expert_id.to_string()),
            check_unit("reliability", r)?,
        );
        Ok(self)
    }

    pub fn resolve(
        &self,
        project_id: &str,
        expert_id: &str,
        recommendation: Option<Recommendation>,
    ) -> Result<f64> {
        let key = (project_id.to_string(), expert_id.to_string());
        if let Some(&r) = self.per_project.get(&key) {
            return Ok(r);
        }
        if let Some(&r) = self.per_expert.get(expert_id) {
            return Ok(r);
        }
        if let (Some(profile), Some(rec)) = (self.profiles.get(expert_id), recommendation) {
            if profile.is_usable() {
                return reliability_for(profile, rec);
            }
        }
        match self.default {
            DefaultReliability::Fixed(r) => check_unit("default reliability", r),
            DefaultReliability::Error => Err(Error::MissingReliability {
                project: project_id.to_string(),
                expert: expert_id.to_string(),
            }),
        }
    }
}
