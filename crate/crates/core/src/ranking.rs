//! Ranking by funding probability, the additive baseline score, and the
//! comparison artefacts built on top of them (top-K outcome tallies and
//! score histograms).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aggregation::Assessment;
use crate::calibration::GradeScale;
use crate::error::{Error, Result};

/// Scores closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectScore {
    pub project_id: String,
    /// Funding probability from the evidential pipeline.
    pub y: f64,
    /// Additive baseline score.
    pub x: f64,
    /// Dense 1-based rank by `y` (0 until ranked).
    pub rank_y: usize,
    /// Dense 1-based rank by `x` (0 until ranked).
    pub rank_x: usize,
    pub outcome: Option<String>,
}

impl ProjectScore {
    pub fn new(project_id: impl Into<String>, y: f64, x: f64, outcome: Option<String>) -> Self {
        ProjectScore {
            project_id: project_id.into(),
            y,
            x,
            rank_y: 0,
            rank_x: 0,
            outcome,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankKey {
    Y,
    X,
}

/// A project's place in a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub project_id: String,
    pub value: f64,
    /// 1-based position in the sorted list.
    pub position: usize,
    /// 1-based index of the group of equal scores (dense rank).
    pub tie_group: usize,
    pub tie_size: usize,
    pub outcome: Option<String>,
}

impl Ranked {
    pub fn is_tied(&self) -> bool {
        self.tie_size > 1
    }
}

/// Sort descending by `key`. Equal scores share a tie group and are listed
/// by project id.
pub fn rank(scores: &[ProjectScore], key: RankKey) -> Vec<Ranked> {
    let value = |s: &ProjectScore| match key {
        RankKey::Y => s.y,
        RankKey::X => s.x,
    };
    let mut sorted: Vec<&ProjectScore> = scores.iter().collect();
    sorted.sort_by(|a, b| {
        value(b)
            .total_cmp(&value(a))
            .then_with(|| a.project_id.cmp(&b.project_id))
    });

    // Group on the sorted values, then re-sort each group by id so that
    // near-equal floats never leak into the order inside a tie.
    let mut groups: Vec<Vec<&ProjectScore>> = Vec::new();
    for s in sorted {
        match groups.last_mut() {
            Some(g) if (value(g[0]) - value(s)).abs() <= TIE_TOLERANCE => g.push(s),
            _ => groups.push(vec![s]),
        }
    }
    let mut out = Vec::with_capacity(scores.len());
    for (gi, mut group) in groups.into_iter().enumerate() {
        group.sort_by(|a, b| a.project_id.cmp(&b.project_id));
        let size = group.len();
        for s in group {
            out.push(Ranked {
                project_id: s.project_id.clone(),
                value: value(s),
                position: out.len() + 1,
                tie_group: gi + 1,
                tie_size: size,
                outcome: s.outcome.clone(),
            });
        }
    }
    out
}

/// Fill `rank_x` and `rank_y` with dense ranks.
pub fn assign_ranks(scores: &mut [ProjectScore]) {
    for key in [RankKey::Y, RankKey::X] {
        let groups: BTreeMap<String, usize> = rank(scores, key)
            .into_iter()
            .map(|r| (r.project_id, r.tie_group))
            .collect();
        for s in scores.iter_mut() {
            let g = groups[&s.project_id];
            match key {
                RankKey::Y => s.rank_y = g,
                RankKey::X => s.rank_x = g,
            }
        }
    }
}

/// Numeric value of each grade of a criterion, for the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeScores {
    pub scale: GradeScale,
    pub scores: Vec<f64>,
}

impl GradeScores {
    pub fn new(scale: GradeScale, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != scale.grades().len() {
            return Err(Error::InvalidInput(format!(
                "criterion `{}` has {} grades but {} scores",
                scale.criterion_id(),
                scale.grades().len(),
                scores.len()
            )));
        }
        Ok(GradeScores { scale, scores })
    }

    fn score(&self, grade: &str) -> Result<f64> {
        Ok(self.scores[self.scale.resolve(grade)?])
    }

    pub fn min(&self) -> f64 {
        self.scores.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.scores
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sum over criteria of the mean grade score of one project's assessments.
pub fn additive_score(assessments: &[Assessment], mappings: &[GradeScores]) -> Result<f64> {
    let mut x = 0.0;
    for m in mappings {
        let scores = assessments
            .iter()
            .filter(|a| a.criterion_id == m.scale.criterion_id())
            .map(|a| m.score(&a.grade))
            .collect::<Result<Vec<_>>>()?;
        if scores.is_empty() {
            return Err(Error::InvalidInput(format!(
                "no assessments on criterion `{}`",
                m.scale.criterion_id()
            )));
        }
        x += scores.iter().sum::<f64>() / scores.len() as f64;
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopKReport {
    pub k: usize,
    pub funded: usize,
    pub unfunded: usize,
    /// Top-K slots held by a tie group that extends past position K.
    pub undifferentiated: usize,
}

/// Tally actual outcomes of the first `k` ranked projects.
pub fn topk_outcomes(ranked: &[Ranked], k: usize, funded_label: &str) -> Result<TopKReport> {
    if k == 0 || k > ranked.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} is outside 1..={}",
            ranked.len()
        )));
    }
    let straddling = ranked[k - 1].tie_group;
    let straddles = ranked
        .get(k)
        .is_some_and(|next| next.tie_group == straddling);
    let mut report = TopKReport {
        k,
        funded: 0,
        unfunded: 0,
        undifferentiated: 0,
    };
    for r in &ranked[..k] {
        if straddles && r.tie_group == straddling {
            report.undifferentiated += 1;
            continue;
        }
        let outcome = r.outcome.as_deref().ok_or_else(|| {
            Error::InvalidInput(format!("project `{}` has no known outcome", r.project_id))
        })?;
        if outcome.trim().eq_ignore_ascii_case(funded_label.trim()) {
            report.funded += 1;
        } else {
            report.unfunded += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub funded: usize,
    pub unfunded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramData {
    pub width: f64,
    pub bins: Vec<HistogramBin>,
    /// Number of distinct score values (up to [`TIE_TOLERANCE`]).
    pub distinct_scores: usize,
}

impl HistogramData {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.funded + b.unfunded).sum()
    }
}

/// Bin `(score, funded)` pairs into bins of `width` anchored at the minimum.
pub fn histogram(points: &[(f64, bool)], width: f64) -> Result<HistogramData> {
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "bin width must be positive, got {width}"
        )));
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("no scores to bin".into()));
    }
    if let Some((s, _)) = points.iter().find(|(s, _)| !s.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite score {s}")));
    }
    let min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    // Scores sitting on a bin edge up to rounding belong to the upper bin.
    let index = |s: f64| ((s - min) / width + 1e-9).floor() as usize;
    let mut bins: Vec<HistogramBin> = (0..=index(max))
        .map(|i| HistogramBin {
            lower: min + i as f64 * width,
            upper: min + (i + 1) as f64 * width,
            funded: 0,
            unfunded: 0,
        })
        .collect();
    for &(s, funded) in points {
        let bin = &mut bins[index(s)];
        if funded {
            bin.funded += 1;
        } else {
            bin.unfunded += 1;
        }
    }

    let mut values: Vec<f64> = points.iter().map(|p| p.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() <= TIE_TOLERANCE);

    Ok(HistogramData {
        width,
        bins,
        distinct_scores: values.len(),
    })
}
