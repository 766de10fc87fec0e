//! Reference data for the NSFC management-sciences case study.
//!
//! Only aggregate counts of the 2407 historical assessments are published, so
//! [`synthetic_history`] generates a record-level history with exactly those
//! counts. Any history with the same tallies yields the same calibration.

use crate::aggregation::Assessment;
use crate::calibration::HistoryRecord;

pub const FUNDED: &str = "Funded";
pub const UNFUNDED: &str = "Unfunded";

pub const C1_GRADES: [&str; 4] = ["Poor", "Average", "Good", "Excellent"];
pub const C2_GRADES: [&str; 3] = ["Not fund", "Fund", "Fund with priority"];

/// Assessment counts on C1, rows Funded / Unfunded.
pub const C1_COUNTS: [[u64; 4]; 2] = [[6, 51, 167, 194], [260, 900, 629, 200]];
/// Assessment counts on C2, rows Funded / Unfunded.
pub const C2_COUNTS: [[u64; 3]; 2] = [[66, 211, 141], [1192, 680, 117]];

/// Number of assessments per outcome.
pub const ASSESSMENTS: [u64; 2] = [418, 1989];

const EXPERT_POOL: usize = 60;

/// One project with its experts' grades and (published) reliabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewedProject {
    pub project_id: &'static str,
    /// `(expert, C1 grade, C2 grade, reliability)`.
    pub reviews: Vec<(&'static str, &'static str, &'static str, f64)>,
    pub outcome: Option<&'static str>,
}

impl ReviewedProject {
    pub fn assessments(&self) -> Vec<Assessment> {
        self.reviews
            .iter()
            .flat_map(|&(expert, c1, c2, _)| {
                [("C1", c1), ("C2", c2)].map(|(criterion, grade)| Assessment {
                    project_id: self.project_id.to_string(),
                    expert_id: expert.to_string(),
                    criterion_id: criterion.to_string(),
                    grade: grade.to_string(),
                })
            })
            .collect()
    }

    /// `(project, expert, reliability)` override rows.
    pub fn reliabilities(&self) -> Vec<(String, String, f64)> {
        self.reviews
            .iter()
            .map(|&(e, _, _, r)| (self.project_id.to_string(), e.to_string(), r))
            .collect()
    }
}

/// The five-expert worked example.
pub fn worked_example() -> ReviewedProject {
    ReviewedProject {
        project_id: "T6",
        reviews: vec![
            ("E1", "Excellent", "Fund with priority", 0.6667),
            ("E2", "Good", "Fund", 0.3466),
            ("E3", "Average", "Not fund", 1.0),
            ("E4", "Good", "Fund", 0.25),
            ("E5", "Good", "Fund", 0.1),
        ],
        outcome: None,
    }
}

pub fn project_4() -> ReviewedProject {
    ReviewedProject {
        project_id: "P4",
        reviews: vec![
            ("E1", "Excellent", "Fund with priority", 0.0),
            ("E2", "Good", "Fund", 0.2981),
            ("E3", "Good", "Fund", 0.2981),
            ("E4", "Excellent", "Fund", 0.0),
            ("E5", "Average", "Not fund", 0.9834),
        ],
        outcome: Some(FUNDED),
    }
}

pub fn project_5() -> ReviewedProject {
    ReviewedProject {
        project_id: "P5",
        reviews: vec![
            ("E1", "Good", "Fund", 0.4286),
            ("E2", "Good", "Fund", 0.3478),
            ("E3", "Average", "Not fund", 1.0),
            ("E4", "Excellent", "Fund with priority", 0.3478),
            ("E5", "Excellent", "Fund", 0.2857),
        ],
        outcome: Some(UNFUNDED),
    }
}

pub fn project_6() -> ReviewedProject {
    ReviewedProject {
        project_id: "P6",
        reviews: vec![
            ("E1", "Good", "Fund", 0.3478),
            ("E2", "Good", "Fund", 0.4),
            ("E3", "Good", "Fund", 0.6667),
            ("E4", "Average", "Fund", 0.3478),
            ("E5", "Excellent", "Fund", 0.25),
        ],
        outcome: Some(FUNDED),
    }
}

/// Grade indices expanded from per-grade counts, lowest grade first.
fn expand(counts: &[u64]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j, c as usize))
        .collect()
}

/// Seat order that deals consecutive slots to different projects.
fn seats(panel_sizes: &[usize]) -> Vec<(usize, usize)> {
    let max = panel_sizes.iter().copied().max().unwrap_or(0);
    (0..max)
        .flat_map(|seat| {
            panel_sizes
                .iter()
                .enumerate()
                .filter(move |&(_, &k)| k > seat)
                .map(move |(p, _)| (p, seat))
        })
        .collect()
}

/// 497 projects (78 with four experts, 419 with five) whose 2407
/// assessments reproduce the published C1 and C2 tallies exactly.
///
/// Each assessment is one expert's pair of C1/C2 grades; pairs are formed by
/// matching the sorted C1 and C2 grade lists so that high grades go together.
pub fn synthetic_history() -> Vec<HistoryRecord> {
    // 418 = 2*4 + 82*5 and 1989 = 76*4 + 337*5.
    let panels: [Vec<usize>; 2] = [
        [vec![4; 2], vec![5; 82]].concat(),
        [vec![4; 76], vec![5; 337]].concat(),
    ];
    let outcomes = [FUNDED, UNFUNDED];

    let mut records = Vec::with_capacity(2 * 2407);
    let mut project_offset = 0;
    for (h, panel) in panels.iter().enumerate() {
        let c1 = expand(&C1_COUNTS[h]);
        let c2 = expand(&C2_COUNTS[h]);
        let seats = seats(panel);
        debug_assert_eq!(seats.len(), c1.len());
        debug_assert_eq!(seats.len(), c2.len());

        let mut grid: Vec<Vec<(usize, usize)>> = panel.iter().map(|&k| vec![(0, 0); k]).collect();
        for ((p, seat), (g1, g2)) in seats.into_iter().zip(c1.into_iter().zip(c2)) {
            grid[p][seat] = (g1, g2);
        }
        for (p, reviews) in grid.iter().enumerate() {
            let global = project_offset + p;
            let project_id = format!("H{:04}", global + 1);
            for (seat, &(g1, g2)) in reviews.iter().enumerate() {
                let expert_id = format!("X{:02}", (global * 7 + seat * 13) % EXPERT_POOL + 1);
                for (criterion, grade) in [("C1", C1_GRADES[g1]), ("C2", C2_GRADES[g2])] {
                    records.push(HistoryRecord {
                        project_id: project_id.clone(),
                        expert_id: expert_id.clone(),
                        criterion_id: criterion.to_string(),
                        grade: grade.to_string(),
                        outcome: outcomes[h].to_string(),
                    });
                }
            }
        }
        project_offset += panel.len();
    }
    records
}
