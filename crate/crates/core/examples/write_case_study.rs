//! Writes the case-study inputs into a directory (default `data/`).
//!
//! cargo run --example write_case_study -- data

use std::fmt::Write as _;
use std::path::PathBuf;

use erselect::case_study::{self, ReviewedProject};
use erselect::config::PipelineConfig;

fn assessments_csv(projects: &[ReviewedProject]) -> String {
    let mut s = String::from("project_id,expert_id,criterion_id,grade,outcome\n");
    for p in projects {
        for a in p.assessments() {
            let outcome = p.outcome.unwrap_or("");
            writeln!(
                s,
                "{},{},{},{},{}",
                a.project_id, a.expert_id, a.criterion_id, a.grade, outcome
            )
            .unwrap();
        }
    }
    s
}

fn reliabilities_csv(projects: &[ReviewedProject]) -> String {
    let mut s = String::from("project_id,expert_id,reliability\n");
    for p in projects {
        for (project, expert, r) in p.reliabilities() {
            writeln!(s, "{project},{expert},{r}").unwrap();
        }
    }
    s
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;

    let mut history = String::from("project_id,expert_id,criterion_id,grade,outcome\n");
    for r in case_study::synthetic_history() {
        writeln!(
            history,
            "{},{},{},{},{}",
            r.project_id, r.expert_id, r.criterion_id, r.grade, r.outcome
        )
        .unwrap();
    }
    std::fs::write(dir.join("history.csv"), history)?;

    let worked = [case_study::worked_example()];
    std::fs::write(
        dir.join("worked_example_assessments.csv"),
        assessments_csv(&worked),
    )?;
    std::fs::write(
        dir.join("worked_example_reliabilities.csv"),
        reliabilities_csv(&worked),
    )?;

    let replays = [
        case_study::project_4(),
        case_study::project_5(),
        case_study::project_6(),
    ];
    std::fs::write(
        dir.join("projects_assessments.csv"),
        assessments_csv(&replays),
    )?;
    std::fs::write(
        dir.join("projects_reliabilities.csv"),
        reliabilities_csv(&replays),
    )?;

    let config = serde_json::to_string_pretty(&PipelineConfig::nsfc_case_study()).unwrap();
    std::fs::write(dir.join("nsfc-case-study.json"), config + "\n")?;
    Ok(())
}
