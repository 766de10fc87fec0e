mod common;

use proptest::prelude::*;

use erselect::aggregation::{
    aggregate_criterion, aggregate_project, AggregationConfig, Assessment, ExpertWeightMode,
};
use erselect::calibration::{
    beliefs_from_likelihoods, likelihoods, BeliefMatrix, CountTable, LikelihoodMatrix, Rounding,
};
use erselect::config::PipelineConfig;
use erselect::evidence::{combine, BeliefDistribution, Evidence};
use erselect::ranking::{additive_score, rank, topk_outcomes, ProjectScore, RankKey};
use erselect::reliability::{rates, reliability_for, ConfusionMatrix, Recommendation};

use common::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn binary_bd(p: f64) -> BeliefDistribution {
    BeliefDistribution::from_singletons(frame(2), &[p, 1.0 - p]).unwrap()
}

/// Binary belief matrix from random positive likelihood rows.
fn arb_binary_matrix(grades: usize) -> impl Strategy<Value = BeliefMatrix> {
    prop::collection::vec(prop::collection::vec(0.01f64..1.0, grades), 2).prop_map(move |rows| {
        let normalized: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let t: f64 = r.iter().sum();
                r.iter().map(|x| x / t).collect()
            })
            .collect();
        let c = LikelihoodMatrix {
            criterion_id: "Q".into(),
            frame: frame(2),
            grades: (0..grades).map(|j| format!("g{j}")).collect(),
            entries: normalized,
        };
        beliefs_from_likelihoods(&c, Rounding::None).unwrap()
    })
}

fn assessment(expert: usize, grade: usize) -> Assessment {
    Assessment {
        project_id: "P".into(),
        expert_id: format!("E{expert}"),
        criterion_id: "Q".into(),
        grade: format!("g{grade}"),
    }
}

fn arb_counts() -> impl Strategy<Value = CountTable> {
    (arb_n(), 2usize..=5).prop_flat_map(|(n, g)| {
        prop::collection::vec(prop::collection::vec(1u64..500, g), n).prop_map(move |counts| {
            CountTable {
                criterion_id: "Q".into(),
                frame: frame(n),
                grades: (0..g).map(|j| format!("g{j}")).collect(),
                counts,
            }
        })
    })
}

fn arb_scores() -> impl Strategy<Value = Vec<ProjectScore>> {
    // Coarse values so that ties are common.
    prop::collection::vec((0u8..8, 0u8..8, any::<bool>()), 1..40).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (y, x, funded))| {
                let outcome = if funded { "Funded" } else { "Unfunded" };
                ProjectScore::new(
                    format!("P{i:02}"),
                    y as f64 / 8.0,
                    x as f64 * 0.2,
                    Some(outcome.into()),
                )
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn combine_is_permutation_invariant(evidence in arb_evidence_list(6), seed in any::<u64>()) {
        prop_permutation(evidence, seed)?;
    }

    #[test]
    fn orthogonal_sum_is_associative((a, b, c) in arb_triple()) {
        prop_associative(a, b, c)?;
    }

    #[test]
    fn residual_is_product_of_unreliabilities(evidence in arb_weighted_list(6)) {
        prop_residual(evidence)?;
    }

    #[test]
    fn fully_reliable_evidence_follows_dempster(bds in arb_bd_list(4)) {
        prop_dempster(bds)?;
    }

    #[test]
    fn fully_reliable_likelihood_evidence_matches_bayes((n, columns) in arb_likelihood_columns()) {
        prop_bayes(n, columns)?;
    }

    #[test]
    fn every_output_is_normalized(evidence in arb_weighted_list(6)) {
        prop_normalized(evidence)?;
    }

    #[test]
    fn zero_weight_evidence_is_neutral(
        (evidence, extra, r) in arb_n().prop_flat_map(|n| {
            (prop::collection::vec(arb_evidence(n), 1..=5), arb_bd(n), 0.0f64..=1.0)
        }),
    ) {
        let mut padded = evidence.clone();
        padded.push(Evidence::new(extra, 0.0, r).unwrap());
        prop_assert!(bd_close(&combine(&evidence).unwrap(), &combine(&padded).unwrap(), 1e-15));
    }

    #[test]
    fn expert_order_does_not_matter(
        matrix in arb_binary_matrix(4),
        panel in prop::collection::vec((0usize..4, 0.0f64..=1.0), 2..7),
        normalized in any::<bool>(),
    ) {
        prop_assume!(panel.iter().any(|(_, r)| *r > 0.0));
        let mode = if normalized { ExpertWeightMode::Normalized } else { ExpertWeightMode::Raw };
        let rated: Vec<_> = panel.iter().enumerate().map(|(e, &(g, r))| (assessment(e, g), r)).collect();
        let mut reversed = rated.clone();
        reversed.reverse();
        reversed.rotate_left(1);
        let a = aggregate_criterion(&rated, &matrix, mode).unwrap();
        let b = aggregate_criterion(&reversed, &matrix, mode).unwrap();
        prop_assert!(bd_close(&a, &b, 1e-9));
    }

    #[test]
    fn higher_grade_never_lowers_support(
        matrix in arb_binary_matrix(4),
        panel in prop::collection::vec((0usize..4, 0.0f64..=1.0), 1..7),
        which in any::<prop::sample::Index>(),
        (a, b) in (0usize..4, 0usize..4).prop_filter("distinct grades", |(a, b)| a != b),
    ) {
        prop_assume!(panel.iter().any(|(_, r)| *r > 0.0));
        let i = which.index(panel.len());
        let funded = |g: usize| matrix.column(g)[0];
        let (low, high) = if funded(a) < funded(b) { (a, b) } else { (b, a) };
        let mut rated: Vec<_> = panel.iter().enumerate().map(|(e, &(g, r))| (assessment(e, g), r)).collect();
        rated[i].0 = assessment(i, low);
        let mut better = rated.clone();
        better[i].0 = assessment(i, high);
        let before = aggregate_criterion(&rated, &matrix, ExpertWeightMode::Raw).unwrap().singletons()[0];
        let after = aggregate_criterion(&better, &matrix, ExpertWeightMode::Raw).unwrap().singletons()[0];
        prop_assert!(after >= before - 1e-12, "{before} -> {after}");
    }

    #[test]
    fn criterion_weight_scale_does_not_matter(
        p in prop::collection::vec(0.01f64..0.99, 2..5),
        weights in prop::collection::vec(0.05f64..5.0, 4),
        k in 0.01f64..100.0,
    ) {
        let criteria: Vec<_> = p.iter().enumerate().map(|(i, &p)| (format!("C{i}"), binary_bd(p))).collect();
        let cfg = |scale: f64| AggregationConfig {
            criterion_weights: criteria.iter().zip(&weights).map(|((id, _), w)| (id.clone(), w * scale)).collect(),
            expert_weight_mode: ExpertWeightMode::Raw,
            calibration_rounding: Rounding::None,
        };
        let a = aggregate_project(&criteria, &cfg(1.0)).unwrap();
        let b = aggregate_project(&criteria, &cfg(k)).unwrap();
        prop_assert!(bd_close(&a, &b, 1e-9));
    }

    /// Identical criterion distributions are sharpened, never reversed: the
    /// funded mass moves away from one half and keeps its side.
    #[test]
    fn consensus_is_reinforced(p in 0.0f64..=1.0, weights in prop::collection::vec(0.05f64..5.0, 2..4)) {
        let criteria: Vec<_> = weights.iter().enumerate().map(|(i, _)| (format!("C{i}"), binary_bd(p))).collect();
        let cfg = AggregationConfig {
            criterion_weights: criteria.iter().zip(&weights).map(|((id, _), w)| (id.clone(), *w)).collect(),
            expert_weight_mode: ExpertWeightMode::Raw,
            calibration_rounding: Rounding::None,
        };
        let y = aggregate_project(&criteria, &cfg).unwrap().singletons()[0];
        prop_assert!((y - 0.5).abs() >= (p - 0.5).abs() - 1e-12, "{p} -> {y}");
        prop_assert!((y - 0.5) * (p - 0.5) >= -1e-12, "{p} -> {y}");
    }

    #[test]
    fn calibration_matrices_are_stochastic(table in arb_counts()) {
        let c = likelihoods(&table).unwrap();
        for row in &c.entries {
            prop_assert!(close(row.iter().sum::<f64>(), 1.0, 1e-9));
            prop_assert!(row.iter().all(|x| (0.0..=1.0).contains(x)));
        }
        let total: u64 = table.counts.iter().flatten().sum();
        prop_assert_eq!(table.total(), total);
        for rounding in [Rounding::None, Rounding::FourDecimals] {
            let p = beliefs_from_likelihoods(&c, rounding).unwrap();
            for j in 0..table.grades.len() {
                prop_assert!(close(p.column(j).iter().sum::<f64>(), 1.0, 1e-9));
                prop_assert!(p.column(j).iter().all(|x| (0.0..=1.0).contains(x)));
            }
        }
    }

    #[test]
    fn beliefs_ignore_column_scale(table in arb_counts(), k in 0.001f64..1000.0, col in any::<prop::sample::Index>()) {
        let c = likelihoods(&table).unwrap();
        let j = col.index(table.grades.len());
        let mut scaled = c.clone();
        scaled.entries.iter_mut().for_each(|row| row[j] *= k);
        let a = beliefs_from_likelihoods(&c, Rounding::None).unwrap();
        let b = beliefs_from_likelihoods(&scaled, Rounding::None).unwrap();
        for (ra, rb) in a.entries.iter().zip(&b.entries) {
            for (x, y) in ra.iter().zip(rb) {
                prop_assert!(close(*x, *y, 1e-12));
            }
        }
    }

    #[test]
    fn rates_are_bounded_and_scale_free(tp in 0u64..50, fn_ in 0u64..50, fp in 0u64..50, tn in 0u64..50, k in 1u64..20) {
        let cm = ConfusionMatrix { true_pos: tp, false_neg: fn_, false_pos: fp, true_neg: tn };
        let scaled = ConfusionMatrix { true_pos: tp * k, false_neg: fn_ * k, false_pos: fp * k, true_neg: tn * k };
        let (a, b) = (rates("E", cm), rates("E", scaled));
        for rate in [a.positive_rate, a.negative_rate].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&rate));
        }
        prop_assert_eq!(a.positive_rate, b.positive_rate);
        prop_assert_eq!(a.negative_rate, b.negative_rate);
    }

    #[test]
    fn direction_reads_only_its_own_cells(tp in 0u64..50, fn_ in 0u64..50, fp in 0u64..50, tn in 0u64..50, other in 1u64..50) {
        let cm = ConfusionMatrix { true_pos: tp, false_neg: fn_, false_pos: fp, true_neg: tn };
        prop_assume!(cm.is_usable());
        let fund = reliability_for(&rates("E", cm), Recommendation::Fund).unwrap();
        let moved = ConfusionMatrix { true_neg: tn + other, false_neg: fn_ + other, ..cm };
        prop_assert_eq!(fund, reliability_for(&rates("E", moved), Recommendation::Fund).unwrap());
        let not_fund = reliability_for(&rates("E", cm), Recommendation::NotFund).unwrap();
        let moved = ConfusionMatrix { true_pos: tp + other, false_pos: fp + other, ..cm };
        prop_assert_eq!(not_fund, reliability_for(&rates("E", moved), Recommendation::NotFund).unwrap());
    }

    #[test]
    fn ranks_ignore_input_order(scores in arb_scores(), seed in any::<u64>()) {
        let mut shuffled = scores.clone();
        let len = shuffled.len();
        shuffled.rotate_left((seed % len as u64) as usize);
        shuffled.reverse();
        for key in [RankKey::Y, RankKey::X] {
            prop_assert_eq!(rank(&scores, key), rank(&shuffled, key));
        }
    }

    #[test]
    fn topk_counts_sum_to_k(scores in arb_scores(), k in any::<prop::sample::Index>()) {
        let k = k.index(scores.len()) + 1;
        for key in [RankKey::Y, RankKey::X] {
            let ranked = rank(&scores, key);
            let r = topk_outcomes(&ranked, k, "Funded").unwrap();
            prop_assert_eq!(r.funded + r.unfunded + r.undifferentiated, k);
            let distinct_at_cut = ranked.get(k).is_none_or(|next| next.tie_group != ranked[k - 1].tie_group);
            if distinct_at_cut {
                prop_assert_eq!(r.undifferentiated, 0);
            }
        }
    }

    #[test]
    fn baseline_stays_within_mapping_bounds(panel in prop::collection::vec((0usize..4, 0usize..3), 1..8)) {
        let config = PipelineConfig::nsfc_case_study();
        let c1 = ["Poor", "Average", "Good", "Excellent"];
        let c2 = ["Not fund", "Fund", "Fund with priority"];
        let assessments: Vec<Assessment> = panel
            .iter()
            .enumerate()
            .flat_map(|(e, &(g1, g2))| {
                [("C1", c1[g1]), ("C2", c2[g2])].map(|(c, g)| Assessment {
                    project_id: "P".into(),
                    expert_id: format!("E{e}"),
                    criterion_id: c.into(),
                    grade: g.into(),
                })
            })
            .collect();
        let x = additive_score(&assessments, &config.grade_scores().unwrap()).unwrap();
        prop_assert!((1.0..=6.0).contains(&x), "{x}");
    }
}
