//! Command orchestration for the `erselect` binary.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::aggregation::{evaluate_project, group_by_project, ExpertWeightMode};
use crate::calibration::{beliefs_from_likelihoods, likelihoods, tally, HistoryRecord, Rounding};
use crate::config::{PipelineConfig, CASE_STUDY_PRESET};
use crate::error::{Error, Result};
use crate::io::{
    calibration_csv, parse_assessments, parse_history, parse_reliability_overrides,
    reliability_csv, to_json, AssessmentSet, CriterionCalibration, CriterionResult,
    ReliabilityOverrides, Report, ReportRow, RunMetadata, TopKEntry,
};
use crate::ranking::{additive_score, histogram, rank, topk_outcomes, ProjectScore, RankKey};
use crate::reliability::{profiles_from_history, ReliabilityTable};

/// Exit status for invalid input or configuration.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for total conflict or missing effective evidence.
pub const EXIT_COMPUTATION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Likelihood and belief matrices from the history
    Calibrate,
    /// Per-expert confusion matrices and directional reliabilities
    Reliability,
    /// Per-project criterion and overall distributions
    Evaluate,
    /// Projects ordered by funding probability
    Rank,
    /// Funding probability against the additive baseline
    Compare,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Calibrate => "calibrate",
            Command::Reliability => "reliability",
            Command::Evaluate => "evaluate",
            Command::Rank => "rank",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Raw,
    Normalized,
}

#[derive(Debug, Parser)]
#[command(
    name = "erselect",
    version,
    about = "Evidential reasoning aggregation for funding selection"
)]
pub struct Cli {
    pub command: Command,

    /// JSON config file, or the name of a bundled preset
    #[arg(long, default_value = CASE_STUDY_PRESET)]
    pub config: String,

    /// Historical records: project_id,expert_id,criterion_id,grade,outcome
    #[arg(long)]
    pub history: Option<PathBuf>,

    /// Assessments to evaluate: project_id,expert_id,criterion_id,grade[,outcome]
    #[arg(long)]
    pub assessments: Option<PathBuf>,

    /// Reliability overrides: project_id,expert_id,reliability (`*` = any project)
    #[arg(long)]
    pub reliabilities: Option<PathBuf>,

    /// Output directory; files are printed to stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// How expert reliabilities become weights within a criterion
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Round belief matrices to four decimals before aggregation
    #[arg(long)]
    pub round4: bool,

    /// Cut-off for the top-K outcome tally (default: number of funded projects)
    #[arg(long)]
    pub top_k: Option<usize>,

    /// Bin width of the baseline score histogram
    #[arg(long, default_value_t = 0.2)]
    pub bin_width: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub history: Option<Vec<HistoryRecord>>,
    pub assessments: Option<AssessmentSet>,
    pub overrides: Option<ReliabilityOverrides>,
    pub top_k: Option<usize>,
    pub bin_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Default)]
pub struct Output {
    pub files: Vec<OutputFile>,
    pub report: Option<Report>,
}

impl Output {
    fn push(&mut self, name: impl Into<String>, contents: String) {
        self.files.push(OutputFile {
            name: name.into(),
            contents,
        });
    }
}

/// Load the config, apply flag overrides and read every named input file.
pub fn load(cli: &Cli) -> Result<(PipelineConfig, Inputs)> {
    let mut config = PipelineConfig::load(&cli.config)?;
    match cli.mode {
        Some(ModeArg::Raw) => config.expert_weight_mode = ExpertWeightMode::Raw,
        Some(ModeArg::Normalized) => config.expert_weight_mode = ExpertWeightMode::Normalized,
        None => {}
    }
    if cli.round4 {
        config.calibration_rounding = Rounding::FourDecimals;
    }
    config.validate()?;

    let inputs = Inputs {
        history: cli
            .history
            .as_deref()
            .map(|p| parse_history(p, &config))
            .transpose()?,
        assessments: cli
            .assessments
            .as_deref()
            .map(|p| parse_assessments(p, &config))
            .transpose()?,
        overrides: cli
            .reliabilities
            .as_deref()
            .map(parse_reliability_overrides)
            .transpose()?,
        top_k: cli.top_k,
        bin_width: cli.bin_width,
    };
    Ok((config, inputs))
}

/// Parse, run and write outputs.
pub fn run(cli: &Cli) -> Result<Output> {
    let (config, inputs) = load(cli)?;
    let output = run_command(cli.command, &config, &inputs)?;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for f in &output.files {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.contents).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(output)
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_computation() {
        EXIT_COMPUTATION
    } else {
        EXIT_VALIDATION
    }
}

fn require<'a, T>(value: &'a Option<T>, command: Command, flag: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("`{}` requires {flag}", command.name())))
}

/// Calibration tables for every configured criterion.
pub fn calibrate(
    config: &PipelineConfig,
    history: &[HistoryRecord],
) -> Result<Vec<CriterionCalibration>> {
    config
        .scales()?
        .iter()
        .map(|scale| {
            let counts = tally(history, scale, &config.frame)?;
            let likelihoods = likelihoods(&counts)?;
            let beliefs = beliefs_from_likelihoods(&likelihoods, config.calibration_rounding)?;
            Ok(CriterionCalibration {
                counts,
                likelihoods,
                beliefs,
            })
        })
        .collect()
}

pub fn reliability_table(
    config: &PipelineConfig,
    history: Option<&[HistoryRecord]>,
    overrides: Option<&ReliabilityOverrides>,
) -> Result<ReliabilityTable> {
    let mut table = ReliabilityTable {
        default: config.default_reliability,
        ..Default::default()
    };
    if let Some(o) = overrides {
        table.per_project = o.per_project.clone();
        table.per_expert = o.per_expert.clone();
    }
    if let (Some(history), Some(rule)) = (history, config.recommendation_rule()?) {
        table.profiles = profiles_from_history(history, &rule)?;
    }
    Ok(table)
}

pub fn run_command(command: Command, config: &PipelineConfig, inputs: &Inputs) -> Result<Output> {
    let mut out = Output::default();
    match command {
        Command::Calibrate => {
            let history = require(&inputs.history, command, "--history")?;
            let tables = calibrate(config, history)?;
            for t in &tables {
                out.push(
                    format!("calibration_{}.csv", t.counts.criterion_id),
                    calibration_csv(t)?,
                );
            }
            out.push("calibration.json", to_json(&tables));
        }
        Command::Reliability => {
            let history = require(&inputs.history, command, "--history")?;
            let rule = config.recommendation_rule()?.ok_or_else(|| {
                Error::InvalidInput(
                    "config marks no criterion as the recommendation criterion".into(),
                )
            })?;
            let profiles: Vec<_> = profiles_from_history(history, &rule)?
                .into_values()
                .collect();
            out.push("reliability.csv", reliability_csv(&profiles)?);
            out.push("reliability.json", to_json(&profiles));
        }
        Command::Evaluate | Command::Rank | Command::Compare => {
            let report = project_report(command, config, inputs)?;
            let stem = match command {
                Command::Evaluate => "evaluation",
                Command::Rank => "ranking",
                _ => "comparison",
            };
            out.push(format!("{stem}.csv"), report.rows_csv()?);
            if command == Command::Compare {
                out.push("topk.csv", report.topk_csv()?);
                out.push("histogram.csv", report.histogram_csv()?);
            }
            out.push(format!("{stem}.json"), to_json(&report));
            out.report = Some(report);
        }
    }
    Ok(out)
}

fn project_report(command: Command, config: &PipelineConfig, inputs: &Inputs) -> Result<Report> {
    let history = require(&inputs.history, command, "--history")?;
    let set = require(&inputs.assessments, command, "--assessments")?;
    let projects = group_by_project(&set.assessments);
    if projects.is_empty() {
        return Err(Error::InvalidInput("no projects to evaluate".into()));
    }

    let matrices: Vec<_> = calibrate(config, history)?
        .into_iter()
        .map(|c| c.beliefs)
        .collect();
    let reliabilities = reliability_table(config, Some(history), inputs.overrides.as_ref())?;
    let rule = config.recommendation_rule()?;
    let aggregation = config.aggregation();
    let mappings = config.grade_scores()?;

    let mut history_outcomes: BTreeMap<&str, &str> = BTreeMap::new();
    for r in history {
        history_outcomes
            .entry(r.project_id.as_str())
            .or_insert(r.outcome.as_str());
    }

    let mut scores = Vec::with_capacity(projects.len());
    let mut rows = Vec::with_capacity(projects.len());
    for (project_id, assessments) in &projects {
        let eval = evaluate_project(
            project_id,
            assessments,
            &matrices,
            &reliabilities,
            rule.as_ref(),
            &aggregation,
        )
        .map_err(|e| e.in_project(project_id))?;
        let x = if mappings.is_empty() {
            None
        } else {
            Some(additive_score(assessments, &mappings).map_err(|e| e.in_project(project_id))?)
        };
        let outcome = set.outcomes.get(project_id).cloned().or_else(|| {
            history_outcomes
                .get(project_id.as_str())
                .map(|o| o.to_string())
        });
        scores.push(ProjectScore::new(
            project_id.clone(),
            eval.funding_probability,
            x.unwrap_or(0.0),
            outcome.clone(),
        ));
        rows.push(ReportRow {
            project_id: project_id.clone(),
            y: eval.funding_probability,
            rank_y: 0,
            tie_size_y: 0,
            x,
            rank_x: None,
            tie_size_x: None,
            outcome,
            criteria: eval
                .criteria
                .iter()
                .map(|(id, bd)| CriterionResult {
                    criterion_id: id.clone(),
                    masses: bd.singletons(),
                })
                .collect(),
            overall: eval.overall.singletons(),
        });
    }

    let by_y = rank(&scores, RankKey::Y);
    let by_x = rank(&scores, RankKey::X);
    for row in rows.iter_mut() {
        let ry = by_y
            .iter()
            .find(|r| r.project_id == row.project_id)
            .expect("ranked");
        row.rank_y = ry.tie_group;
        row.tie_size_y = ry.tie_size;
        if row.x.is_some() {
            let rx = by_x
                .iter()
                .find(|r| r.project_id == row.project_id)
                .expect("ranked");
            row.rank_x = Some(rx.tie_group);
            row.tie_size_x = Some(rx.tie_size);
        }
    }
    if command != Command::Evaluate {
        let position: BTreeMap<&str, usize> = by_y
            .iter()
            .map(|r| (r.project_id.as_str(), r.position))
            .collect();
        rows.sort_by_key(|r| position[r.project_id.as_str()]);
    }

    let mut report = Report {
        metadata: RunMetadata {
            command: command.name().to_string(),
            config_digest: config.digest(),
            frame: config.frame.clone(),
            criteria: config.criteria.iter().map(|c| c.id.clone()).collect(),
            history_records: history.len(),
            assessment_records: set.assessments.len(),
            projects: rows.len(),
        },
        rows,
        topk: Vec::new(),
        histogram: None,
    };

    if command == Command::Compare {
        if mappings.is_empty() {
            return Err(Error::InvalidInput(
                "`compare` needs grade scores in the config".into(),
            ));
        }
        if let Some(s) = scores.iter().find(|s| s.outcome.is_none()) {
            return Err(Error::InvalidInput(format!(
                "project `{}` has no known outcome; add an outcome column or history",
                s.project_id
            )));
        }
        let funded_label = config.frame.label(0);
        let is_funded = |s: &ProjectScore| {
            s.outcome
                .as_deref()
                .is_some_and(|o| o.eq_ignore_ascii_case(funded_label))
        };
        let k = match inputs.top_k {
            Some(k) => k,
            None => scores.iter().filter(|s| is_funded(s)).count(),
        };
        report.topk = vec![
            TopKEntry {
                method: "er".into(),
                report: topk_outcomes(&by_y, k, funded_label)?,
            },
            TopKEntry {
                method: "baseline".into(),
                report: topk_outcomes(&by_x, k, funded_label)?,
            },
        ];
        let points: Vec<(f64, bool)> = scores.iter().map(|s| (s.x, is_funded(s))).collect();
        report.histogram = Some(histogram(&points, inputs.bin_width)?);
    }
    Ok(report)
}
