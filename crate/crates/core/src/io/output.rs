use serde::{Deserialize, Serialize};

use crate::calibration::{BeliefMatrix, CountTable, LikelihoodMatrix};
use crate::error::{Error, Result};
use crate::evidence::Frame;
use crate::ranking::{HistogramData, TopKReport};
use crate::reliability::ReliabilityProfile;

/// Display precision for CSV output.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionCalibration {
    pub counts: CountTable,
    pub likelihoods: LikelihoodMatrix,
    pub beliefs: BeliefMatrix,
}

/// Count, likelihood and belief rows for one criterion, one column per grade.
pub fn calibration_csv(cal: &CriterionCalibration) -> Result<String> {
    let mut header = vec![
        "criterion".to_string(),
        "matrix".into(),
        "hypothesis".into(),
    ];
    header.extend(cal.counts.grades.iter().cloned());
    header.push("total".into());
    let mut rows = vec![header];

    let frame = &cal.counts.frame;
    for (i, counts) in cal.counts.counts.iter().enumerate() {
        let mut row = vec![
            cal.counts.criterion_id.clone(),
            "count".into(),
            frame.label(i).into(),
        ];
        row.extend(counts.iter().map(u64::to_string));
        row.push(counts.iter().sum::<u64>().to_string());
        rows.push(row);
    }
    let mut totals = vec![
        cal.counts.criterion_id.clone(),
        "count".into(),
        "total".into(),
    ];
    totals.extend(cal.counts.column_totals().iter().map(u64::to_string));
    totals.push(cal.counts.total().to_string());
    rows.push(totals);

    for (name, entries) in [
        ("likelihood", &cal.likelihoods.entries),
        ("belief", &cal.beliefs.entries),
    ] {
        for (i, values) in entries.iter().enumerate() {
            let mut row = vec![
                cal.counts.criterion_id.clone(),
                name.into(),
                frame.label(i).into(),
            ];
            row.extend(values.iter().copied().map(fmt4));
            row.push(String::new());
            rows.push(row);
        }
    }
    csv_string(rows)
}

pub fn reliability_csv(profiles: &[ReliabilityProfile]) -> Result<String> {
    let rate = |r: Option<f64>| r.map_or_else(|| "undefined".to_string(), fmt4);
    let mut rows = vec![[
        "expert_id",
        "tp",
        "fn",
        "fp",
        "tn",
        "positive_rate",
        "negative_rate",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect::<Vec<_>>()];
    for p in profiles {
        let c = &p.confusion;
        rows.push(vec![
            p.expert_id.clone(),
            c.true_pos.to_string(),
            c.false_neg.to_string(),
            c.false_pos.to_string(),
            c.true_neg.to_string(),
            rate(p.positive_rate),
            rate(p.negative_rate),
        ]);
    }
    csv_string(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub config_digest: String,
    pub frame: Frame,
    pub criteria: Vec<String>,
    pub history_records: usize,
    pub assessment_records: usize,
    pub projects: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion_id: String,
    /// Singleton masses in frame order.
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub project_id: String,
    /// Funding probability.
    pub y: f64,
    /// Dense rank by `y` (1 = highest).
    pub rank_y: usize,
    pub tie_size_y: usize,
    /// Additive baseline score, when the config scores grades.
    pub x: Option<f64>,
    pub rank_x: Option<usize>,
    pub tie_size_x: Option<usize>,
    pub outcome: Option<String>,
    pub criteria: Vec<CriterionResult>,
    pub overall: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKEntry {
    pub method: String,
    pub report: TopKReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: RunMetadata,
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub topk: Vec<TopKEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<HistogramData>,
}

impl Report {
    pub fn rows_csv(&self) -> Result<String> {
        let labels = self.metadata.frame.labels();
        let mut header: Vec<String> = [
            "project_id",
            "y",
            "rank_y",
            "tie_size_y",
            "x",
            "rank_x",
            "tie_size_x",
            "outcome",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for c in &self.metadata.criteria {
            header.extend(labels.iter().map(|l| format!("{c}:{l}")));
        }
        header.extend(labels.iter().map(|l| format!("overall:{l}")));

        let opt = |v: Option<String>| v.unwrap_or_default();
        let mut rows = vec![header];
        for r in &self.rows {
            let mut row = vec![
                r.project_id.clone(),
                fmt4(r.y),
                r.rank_y.to_string(),
                r.tie_size_y.to_string(),
                opt(r.x.map(fmt4)),
                opt(r.rank_x.map(|v| v.to_string())),
                opt(r.tie_size_x.map(|v| v.to_string())),
                opt(r.outcome.clone()),
            ];
            for c in &self.metadata.criteria {
                match r.criteria.iter().find(|k| &k.criterion_id == c) {
                    Some(k) => row.extend(k.masses.iter().copied().map(fmt4)),
                    None => row.extend(labels.iter().map(|_| String::new())),
                }
            }
            row.extend(r.overall.iter().copied().map(fmt4));
            rows.push(row);
        }
        csv_string(rows)
    }

    pub fn topk_csv(&self) -> Result<String> {
        let mut rows = vec![["method", "k", "funded", "unfunded", "undifferentiated"]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()];
        for t in &self.topk {
            rows.push(vec![
                t.method.clone(),
                t.report.k.to_string(),
                t.report.funded.to_string(),
                t.report.unfunded.to_string(),
                t.report.undifferentiated.to_string(),
            ]);
        }
        csv_string(rows)
    }

    pub fn histogram_csv(&self) -> Result<String> {
        let mut rows = vec![["lower", "upper", "funded", "unfunded"]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()];
        if let Some(h) = &self.histogram {
            for b in &h.bins {
                rows.push(vec![
                    fmt4(b.lower),
                    fmt4(b.upper),
                    b.funded.to_string(),
                    b.unfunded.to_string(),
                ]);
            }
        }
        csv_string(rows)
    }
}
