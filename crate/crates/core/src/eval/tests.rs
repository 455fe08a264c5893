use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---- folds -------------------------------------------------------------------

#[test]
fn even_split_gives_equal_folds() {
    let plan = make_folds(100, 10, 1).unwrap();
    for fold in 0..10 {
        let (train, test) = plan.fold_indices(fold);
        assert_eq!(test.len(), 10);
        assert_eq!(train.len(), 90);
    }
    // disjoint cover
    let mut seen = [false; 100];
    for fold in 0..10 {
        for i in plan.fold_indices(fold).1 {
            assert!(!seen[i], "index {i} in two folds");
            seen[i] = true;
        }
    }
    assert!(seen.iter().all(|&s| s));
}

#[test]
fn uneven_split_differs_by_at_most_one() {
    let plan = make_folds(101, 10, 2).unwrap();
    let mut sizes: Vec<usize> = (0..10).map(|f| plan.fold_indices(f).1.len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![10, 10, 10, 10, 10, 10, 10, 10, 10, 11]);
}

#[test]
fn folds_deterministic_under_seed() {
    assert_eq!(make_folds(57, 7, 9).unwrap(), make_folds(57, 7, 9).unwrap());
    assert_ne!(
        make_folds(57, 7, 9).unwrap().fold_assignments,
        make_folds(57, 7, 10).unwrap().fold_assignments
    );
}

#[test]
fn rejects_more_folds_than_frames() {
    assert!(make_folds(5, 10, 0).is_err());
}

#[test]
fn grouped_folds_keep_groups_whole() {
    // 6 groups of varying size, 3 folds
    let mut groups = Vec::new();
    for (g, size) in [(0usize, 30), (1, 25), (2, 20), (3, 15), (4, 10), (5, 8)] {
        groups.extend(std::iter::repeat_n(g, size));
    }
    let plan = make_grouped_folds(&groups, 3, 7).unwrap();
    for g in 0..6 {
        let folds: std::collections::HashSet<usize> = groups
            .iter()
            .zip(&plan.fold_assignments)
            .filter(|(&grp, _)| grp == g)
            .map(|(_, &f)| f)
            .collect();
        assert_eq!(folds.len(), 1, "group {g} split across folds");
    }
    // all folds used
    let used: std::collections::HashSet<usize> = plan.fold_assignments.iter().copied().collect();
    assert_eq!(used.len(), 3);
}

#[test]
fn grouped_folds_reject_too_few_groups() {
    let groups = vec![0usize; 50];
    assert!(make_grouped_folds(&groups, 2, 0).is_err());
}

// ---- roc ---------------------------------------------------------------------

#[test]
fn perfect_scores_reach_ideal_corner() {
    let labels = [0u8, 0, 1, 1, 0, 1];
    let scores: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let curve = sweep_roc(&scores, &labels).unwrap();
    assert!(curve
        .points
        .iter()
        .any(|p| p.fpr == 0.0 && p.tpr == 1.0));
    assert_eq!(curve.rer, 0.0);
    assert_eq!(curve.auc, 1.0);
    assert_eq!(curve.points.first().unwrap().threshold, f64::INFINITY);
    assert_eq!(
        (curve.points.last().unwrap().fpr, curve.points.last().unwrap().tpr),
        (1.0, 1.0)
    );
}

#[test]
fn anti_perfect_scores_pass_through_bottom_right() {
    let labels = [0u8, 0, 1, 1];
    let scores = [1.0, 1.0, 0.0, 0.0];
    let curve = sweep_roc(&scores, &labels).unwrap();
    assert!(curve.points.iter().any(|p| p.fpr == 1.0 && p.tpr == 0.0));
    assert_eq!(curve.auc, 0.0);
}

#[test]
fn random_scores_hug_the_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 10_000;
    let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let curve = sweep_roc(&scores, &labels).unwrap();
    let max_gap = curve
        .points
        .iter()
        .map(|p| (p.tpr - p.fpr).abs())
        .fold(0.0, f64::max);
    assert!(max_gap < 0.05, "gap {max_gap}");
    assert!((curve.auc - 0.5).abs() < 0.03);
}

#[test]
fn single_class_rejected() {
    assert!(matches!(
        sweep_roc(&[0.1, 0.2], &[1, 1]),
        Err(Error::SingleClass)
    ));
}

#[test]
fn tied_scores_flip_together() {
    let labels = [1u8, 0, 1, 0];
    let scores = [0.5, 0.5, 0.5, 0.5];
    let curve = sweep_roc(&scores, &labels).unwrap();
    // only the anchor and one point: everything flips at 0.5
    assert_eq!(curve.points.len(), 2);
    assert_eq!((curve.points[1].fpr, curve.points[1].tpr), (1.0, 1.0));
}

// ---- rer ---------------------------------------------------------------------

fn single_point_curve(tpr: f64, fpr: f64) -> RocCurve {
    let points = vec![
        RocPoint {
            threshold: f64::INFINITY,
            fpr: 0.0,
            tpr: 0.0,
        },
        RocPoint {
            threshold: 0.5,
            fpr,
            tpr,
        },
        RocPoint {
            threshold: 0.0,
            fpr: 1.0,
            tpr: 1.0,
        },
    ];
    RocCurve {
        points,
        rer: 0.0,
        rer_threshold: 0.0,
        tpr,
        fpr,
        auc: 0.0,
        w_tpr: 1.0,
        w_fpr: 1.0,
    }
}

#[test]
fn rer_matches_reported_operating_points() {
    let cases = [
        (0.9427, 0.0550, 0.0794),
        (0.9520, 0.0573, 0.0748),
        (0.8187, 0.0032, 0.1813),
    ];
    for (tpr, fpr, expected) in cases {
        let curve = single_point_curve(tpr, fpr);
        let (rer, threshold) = compute_rer(&curve, 1.0, 1.0).unwrap();
        assert!(
            (rer - expected).abs() < 5e-4,
            "РER for ({tpr}, {fpr}) = {rer}, want {expected}"
        );
        assert_eq!(threshold, 0.5);
    }
}

#[test]
fn rer_zero_only_at_ideal_corner() {
    let curve = single_point_curve(1.0, 0.0);
    let (rer, _) = compute_rer(&curve, 1.0, 1.0).unwrap();
    assert_eq!(rer, 0.0);
    let curve = single_point_curve(0.99, 0.0);
    let (rer, _) = compute_rer(&curve, 1.0, 1.0).unwrap();
    assert!(rer > 0.0);
}

#[test]
fn rer_weights_shift_the_optimum() {
    // two candidate operating points: high TPR with some FPR, or low FPR
    // with lower TPR
    let points = vec![
        RocPoint {
            threshold: f64::INFINITY,
            fpr: 0.0,
            tpr: 0.0,
        },
        RocPoint {
            threshold: 0.9,
            fpr: 0.01,
            tpr: 0.7,
        },
        RocPoint {
            threshold: 0.1,
            fpr: 0.3,
            tpr: 0.99,
        },
        RocPoint {
            threshold: 0.0,
            fpr: 1.0,
            tpr: 1.0,
        },
    ];
    let curve = RocCurve {
        points,
        rer: 0.0,
        rer_threshold: 0.0,
        tpr: 0.0,
        fpr: 0.0,
        auc: 0.0,
        w_tpr: 1.0,
        w_fpr: 1.0,
    };
    let (_, theta_fpr_heavy) = compute_rer(&curve, 1.0, 20.0).unwrap();
    let (_, theta_tpr_heavy) = compute_rer(&curve, 20.0, 1.0).unwrap();
    assert_eq!(theta_fpr_heavy, 0.9, "heavy FPR weight prefers low FPR");
    assert_eq!(theta_tpr_heavy, 0.1, "heavy TPR weight prefers high TPR");
}

#[test]
fn rer_stays_within_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = 200;
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let curve = sweep_roc(&scores, &labels).unwrap();
        assert!(curve.rer >= 0.0 && curve.rer <= std::f64::consts::SQRT_2);
    }
}

// ---- curve invariances ---------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monotone_transforms_preserve_curve(seed in 0u64..500, scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 150;
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let base = sweep_roc(&scores, &labels).unwrap();

        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let curved: Vec<f64> = scores.iter().map(|s| (scale * s).exp()).collect();
        for transformed in [shifted, curved] {
            let other = sweep_roc(&transformed, &labels).unwrap();
            prop_assert_eq!(base.points.len(), other.points.len());
            for (a, b) in base.points.iter().zip(&other.points) {
                prop_assert!((a.fpr - b.fpr).abs() < 1e-12);
                prop_assert!((a.tpr - b.tpr).abs() < 1e-12);
            }
            prop_assert!((base.rer - other.rer).abs() < 1e-12);
            prop_assert!((base.auc - other.auc).abs() < 1e-12);
        }
    }

    #[test]
    fn pooled_roc_is_order_independent(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 120;
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let base = sweep_roc(&scores, &labels).unwrap();

        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let scores_p: Vec<f64> = perm.iter().map(|&i| scores[i]).collect();
        let labels_p: Vec<u8> = perm.iter().map(|&i| labels[i]).collect();
        let shuffled = sweep_roc(&scores_p, &labels_p).unwrap();
        prop_assert_eq!(base.points.len(), shuffled.points.len());
        for (a, b) in base.points.iter().zip(&shuffled.points) {
            prop_assert!((a.fpr - b.fpr).abs() < 1e-12);
            prop_assert!((a.tpr - b.tpr).abs() < 1e-12);
            prop_assert!(a.threshold.total_cmp(&b.threshold).is_eq());
        }
    }

    #[test]
    fn fold_plan_always_partitions(n in 10usize..300, k in 2usize..10, seed in 0u64..100) {
        prop_assume!(n >= k);
        let plan = make_folds(n, k, seed).unwrap();
        let mut counts = vec![0usize; k];
        for &f in &plan.fold_assignments {
            prop_assert!(f < k);
            counts[f] += 1;
        }
        prop_assert_eq!(counts.iter().sum::<usize>(), n);
        let min = counts.iter().min().unwrap();
        let max = counts.iter().max().unwrap();
        prop_assert!(max - min <= 1);
    }
}

// ---- cross-validation -----------------------------------------------------------

fn blob_matrix(n_per_class: usize, dim: usize, center: f64, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (0..dim).map(|j| format!("x{j}")).collect();
    let mut m = FeatureMatrix::new(names);
    for class in 0..2u8 {
        let mu = if class == 0 { -center } else { center };
        for _ in 0..n_per_class {
            let row: Vec<f64> = (0..dim)
                .map(|_| {
                    let u1 = rng.random::<f64>().max(1e-15);
                    let u2 = rng.random::<f64>();
                    mu + 0.6 * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                })
                .collect();
            m.push_row(&row, class);
        }
    }
    m
}

#[test]
fn cross_validation_separates_blobs() {
    let m = blob_matrix(120, 4, 1.5, 7);
    for spec in [
        ClassifierSpec::Gmm { gaussians: 2 },
        ClassifierSpec::Mlp { neurons: 2 },
        ClassifierSpec::Svm {
            cbox: 10.0,
            gamma: None,
        },
    ] {
        let cv = cross_validate(&m, &spec, &EvalConfig::default()).unwrap();
        assert!(
            cv.curve.rer < 0.05,
            "{} pooled RER {}",
            spec.name(),
            cv.curve.rer
        );
        assert_eq!(cv.per_fold.len(), 10);
        assert_eq!(cv.pooled_scores.len(), m.nrows());
    }
}

#[test]
fn full_width_selection_is_a_no_op() {
    let m = blob_matrix(60, 3, 1.2, 8);
    let spec = ClassifierSpec::Gmm { gaussians: 1 };
    let base = EvalConfig {
        selection_k: None,
        ..EvalConfig::default()
    };
    let full = EvalConfig {
        selection_k: Some(3),
        ..EvalConfig::default()
    };
    let a = cross_validate(&m, &spec, &base).unwrap();
    let b = cross_validate(&m, &spec, &full).unwrap();
    assert_eq!(a.pooled_scores, b.pooled_scores);
    assert_eq!(a.curve.rer, b.curve.rer);
}

#[test]
fn shuffled_labels_score_at_chance() {
    let m = blob_matrix(150, 3, 1.5, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut labels = m.labels().to_vec();
    for i in (1..labels.len()).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let shuffled = m.with_labels(labels);
    let cv = cross_validate(
        &shuffled,
        &ClassifierSpec::Gmm { gaussians: 2 },
        &EvalConfig::default(),
    )
    .unwrap();
    let chance = std::f64::consts::SQRT_2 / 2.0;
    assert!(
        (cv.curve.rer - chance).abs() < 0.1,
        "chance RER {}",
        cv.curve.rer
    );
}

#[test]
fn fold_without_positive_class_is_reported() {
    // 40 frames, a single positive: 10 folds cannot all hold a positive
    let mut m = FeatureMatrix::new(vec!["x".into()]);
    for i in 0..40 {
        m.push_row(&[i as f64], u8::from(i == 0));
    }
    match cross_validate(
        &m,
        &ClassifierSpec::Gmm { gaussians: 1 },
        &EvalConfig::default(),
    ) {
        Err(Error::FoldMissingClass(_)) => {}
        other => panic!("expected FoldMissingClass, got {other:?}"),
    }
}

#[test]
fn selection_in_folds_uses_named_subset() {
    let m = blob_matrix(80, 5, 1.4, 11);
    let cv = cross_validate(
        &m,
        &ClassifierSpec::Gmm { gaussians: 1 },
        &EvalConfig {
            selection_k: Some(2),
            ..EvalConfig::default()
        },
    )
    .unwrap();
    for fold in &cv.per_fold {
        assert_eq!(fold.selected.len(), 2);
    }
}

#[test]
fn csv_and_svg_render() {
    let labels = [0u8, 1, 0, 1, 1, 0];
    let scores = [0.1, 0.9, 0.3, 0.8, 0.6, 0.2];
    let curve = sweep_roc(&scores, &labels).unwrap();
    let csv = curve.to_csv();
    assert!(csv.starts_with("threshold,fpr,tpr\n"));
    assert!(csv.lines().count() == curve.points.len() + 1);
    let svg = curve.to_svg();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("polyline"));
    assert!(svg.ends_with("</svg>\n"));
}

#[test]
fn metrics_json_has_contractual_fields() {
    let m = blob_matrix(60, 2, 1.5, 12);
    let cv = cross_validate(
        &m,
        &ClassifierSpec::Mlp { neurons: 1 },
        &EvalConfig::default(),
    )
    .unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&cv.metrics_json()).unwrap();
    for field in ["tpr", "fpr", "rer", "rer_threshold", "auc", "per_fold"] {
        assert!(parsed.get(field).is_some(), "missing {field}");
    }
    assert_eq!(parsed["per_fold"].as_array().unwrap().len(), 10);
}
