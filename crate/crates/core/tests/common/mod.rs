#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use erselect::aggregation::{evaluate_project, ExpertWeightMode, ProjectEvaluation};
use erselect::calibration::{BeliefMatrix, Rounding};
use erselect::case_study::{self, ReviewedProject};
use erselect::config::PipelineConfig;
use erselect::evidence::{
    bayes_posterior, combine, discount, fold, orthogonal_sum, BeliefDistribution, Evidence,
    ExtendedMass, Frame, PriorEvidence, Proposition, Subset,
};
use erselect::ranking::additive_score;
use erselect::reliability::ReliabilityTable;

pub const CASES: u32 = 1000;

pub fn frame(n: usize) -> Frame {
    Frame::new((0..n).map(|i| format!("h{i}"))).unwrap()
}

pub fn close(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps
}

/// Random mass function on arbitrary non-empty subsets of an `n`-frame.
pub fn arb_bd(n: usize) -> impl Strategy<Value = BeliefDistribution> {
    let subsets = (1u16 << n) - 1;
    prop::collection::vec((1..=subsets, 0.01f64..1.0), 1..=4).prop_map(move |raw| {
        let total: f64 = raw.iter().map(|(_, m)| m).sum();
        let masses = raw
            .into_iter()
            .map(|(s, m)| (Subset::new(s).unwrap(), m / total));
        BeliefDistribution::new(frame(n), masses).unwrap()
    })
}

/// Evidence with `w = r` in `(0, 1]`.
pub fn arb_evidence(n: usize) -> impl Strategy<Value = Evidence> {
    (arb_bd(n), 0.05f64..=1.0).prop_map(|(bd, r)| Evidence::new(bd, r, r).unwrap())
}

/// Evidence with independent weight and reliability, `0 < w <= r`.
pub fn arb_weighted_evidence(n: usize) -> impl Strategy<Value = Evidence> {
    (arb_bd(n), 0.05f64..=1.0, 0.05f64..=1.0)
        .prop_map(|(bd, r, f)| Evidence::new(bd, r * f, r).unwrap())
}

pub fn arb_n() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(3), Just(4)]
}

pub fn arb_evidence_list(max: usize) -> impl Strategy<Value = Vec<Evidence>> {
    arb_n().prop_flat_map(move |n| prop::collection::vec(arb_evidence(n), 1..=max))
}

/// Every mass of a distribution keyed by subset bits.
pub fn masses(bd: &BeliefDistribution) -> BTreeMap<u16, f64> {
    bd.focal().map(|(s, m)| (s.bits(), m)).collect()
}

pub fn bd_close(a: &BeliefDistribution, b: &BeliefDistribution, eps: f64) -> bool {
    let (ma, mb) = (masses(a), masses(b));
    ma.keys()
        .chain(mb.keys())
        .all(|k| close(*ma.get(k).unwrap_or(&0.0), *mb.get(k).unwrap_or(&0.0), eps))
}

pub fn extended_close(a: &ExtendedMass, b: &ExtendedMass, eps: f64) -> bool {
    let keys: Vec<Subset> = a.in_frame().chain(b.in_frame()).map(|(s, _)| s).collect();
    close(a.residual(), b.residual(), eps)
        && keys.into_iter().all(|s| {
            close(
                a.mass(Proposition::Set(s)),
                b.mass(Proposition::Set(s)),
                eps,
            )
        })
}

/// Dempster's rule written directly from its definition, on bit masks.
/// Returns `None` when the conflict is (numerically) total.
pub fn dempster(bds: &[BeliefDistribution]) -> Option<BTreeMap<u16, f64>> {
    let mut acc = masses(&bds[0]);
    for bd in &bds[1..] {
        let mut next: BTreeMap<u16, f64> = BTreeMap::new();
        let mut conflict = 0.0;
        for (&a, &ma) in &acc {
            for (&b, &mb) in &masses(bd) {
                if a & b == 0 {
                    conflict += ma * mb;
                } else {
                    *next.entry(a & b).or_insert(0.0) += ma * mb;
                }
            }
        }
        if conflict > 1.0 - 1e-6 {
            return None;
        }
        next.values_mut().for_each(|m| *m /= 1.0 - conflict);
        acc = next;
    }
    Some(acc)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

pub fn prop_permutation(evidence: Vec<Evidence>, seed: u64) -> Result<(), TestCaseError> {
    let forward = combine(&evidence).unwrap();
    let mut shuffled = evidence.clone();
    // Deterministic Fisher-Yates driven by the seed.
    let mut state = seed | 1;
    for i in (1..shuffled.len()).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        shuffled.swap(i, (state % (i as u64 + 1)) as usize);
    }
    let permuted = combine(&shuffled).unwrap();
    check(bd_close(&forward, &permuted, 1e-9), || {
        format!("{forward} vs {permuted}")
    })
}

pub fn prop_associative(a: Evidence, b: Evidence, c: Evidence) -> Result<(), TestCaseError> {
    let (a, b, c) = (discount(&a), discount(&b), discount(&c));
    let left = orthogonal_sum(&orthogonal_sum(&a, &b).unwrap(), &c).unwrap();
    let right = orthogonal_sum(&a, &orthogonal_sum(&b, &c).unwrap()).unwrap();
    check(extended_close(&left, &right, 1e-12), || {
        format!("{left:?} vs {right:?}")
    })
}

pub fn prop_residual(evidence: Vec<Evidence>) -> Result<(), TestCaseError> {
    let m = fold(&evidence).unwrap();
    let expected: f64 = evidence.iter().map(|e| 1.0 - e.reliability()).product();
    check(close(m.residual(), expected, 1e-12), || {
        format!("residual {} vs product {expected}", m.residual())
    })
}

pub fn prop_dempster(bds: Vec<BeliefDistribution>) -> Result<(), TestCaseError> {
    let Some(expected) = dempster(&bds) else {
        return Ok(());
    };
    let evidence: Vec<Evidence> = bds.into_iter().map(Evidence::certain).collect();
    let got = masses(&combine(&evidence).unwrap());
    let keys: Vec<u16> = expected.keys().chain(got.keys()).copied().collect();
    check(
        keys.iter().all(|k| {
            close(
                *got.get(k).unwrap_or(&0.0),
                *expected.get(k).unwrap_or(&0.0),
                1e-12,
            )
        }),
        || format!("{got:?} vs {expected:?}"),
    )
}

/// Likelihood-derived beliefs combined with full reliability agree with the
/// Bayesian posterior under a uniform prior.
pub fn prop_bayes(n: usize, columns: Vec<Vec<f64>>) -> Result<(), TestCaseError> {
    let evidence: Vec<Evidence> = columns
        .iter()
        .map(|c| {
            let total: f64 = c.iter().sum();
            let p: Vec<f64> = c.iter().map(|x| x / total).collect();
            Evidence::certain(BeliefDistribution::from_singletons(frame(n), &p).unwrap())
        })
        .collect();
    let er = combine(&evidence).unwrap().singletons();
    let bayes = bayes_posterior(&PriorEvidence::uniform(frame(n)), &columns)
        .unwrap()
        .singletons();
    check(
        er.iter().zip(&bayes).all(|(a, b)| close(*a, *b, 1e-12)),
        || format!("{er:?} vs {bayes:?}"),
    )
}

pub fn prop_normalized(evidence: Vec<Evidence>) -> Result<(), TestCaseError> {
    let out = combine(&evidence).unwrap();
    let total: f64 = out.focal().map(|(_, m)| m).sum();
    check(
        close(total, 1.0, 1e-9) && out.focal().all(|(_, m)| (0.0..=1.0 + 1e-12).contains(&m)),
        || format!("output {out} sums to {total}"),
    )
}

pub fn arb_likelihood_columns() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    arb_n().prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec(0.01f64..1.0, n), 1..=6),
        )
    })
}

pub fn arb_bd_list(max: usize) -> impl Strategy<Value = Vec<BeliefDistribution>> {
    arb_n().prop_flat_map(move |n| prop::collection::vec(arb_bd(n), 2..=max))
}

pub fn arb_triple() -> impl Strategy<Value = (Evidence, Evidence, Evidence)> {
    arb_n().prop_flat_map(|n| {
        (
            arb_weighted_evidence(n),
            arb_weighted_evidence(n),
            arb_weighted_evidence(n),
        )
    })
}

pub fn arb_weighted_list(max: usize) -> impl Strategy<Value = Vec<Evidence>> {
    arb_n().prop_flat_map(move |n| prop::collection::vec(arb_weighted_evidence(n), 1..=max))
}

/// Belief matrices calibrated from the synthetic case-study history.
pub fn case_study_matrices(rounding: Rounding) -> Vec<BeliefMatrix> {
    let mut config = PipelineConfig::nsfc_case_study();
    config.calibration_rounding = rounding;
    erselect::cli::calibrate(&config, &case_study::synthetic_history())
        .unwrap()
        .into_iter()
        .map(|c| c.beliefs)
        .collect()
}

pub fn evaluate(
    project: &ReviewedProject,
    mode: ExpertWeightMode,
    rounding: Rounding,
) -> ProjectEvaluation {
    let mut config = PipelineConfig::nsfc_case_study();
    config.expert_weight_mode = mode;
    config.calibration_rounding = rounding;
    let mut table = ReliabilityTable::default();
    for (p, e, r) in project.reliabilities() {
        table = table.with_override(&p, &e, r).unwrap();
    }
    evaluate_project(
        project.project_id,
        &project.assessments(),
        &case_study_matrices(rounding),
        &table,
        config.recommendation_rule().unwrap().as_ref(),
        &config.aggregation(),
    )
    .unwrap()
}

pub fn baseline(project: &ReviewedProject) -> f64 {
    let config = PipelineConfig::nsfc_case_study();
    additive_score(&project.assessments(), &config.grade_scores().unwrap()).unwrap()
}
