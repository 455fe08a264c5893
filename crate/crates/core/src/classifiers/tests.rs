use super::*;
use crate::features::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn randn(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1 = rng.random::<f64>().max(1e-15);
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Two Gaussian blobs, class 0 at `-center`, class 1 at `+center`.
fn blob_matrix(n_per_class: usize, dim: usize, center: f64, sigma: f64, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (0..dim).map(|j| format!("x{j}")).collect();
    let mut m = FeatureMatrix::new(names);
    for class in 0..2u8 {
        let mu = if class == 0 { -center } else { center };
        for _ in 0..n_per_class {
            let row: Vec<f64> = (0..dim).map(|_| mu + sigma * randn(&mut rng)).collect();
            m.push_row(&row, class);
        }
    }
    m
}

fn xor_matrix() -> FeatureMatrix {
    let mut m = FeatureMatrix::new(vec!["a".into(), "b".into()]);
    m.push_row(&[0.0, 0.0], 0);
    m.push_row(&[0.0, 1.0], 1);
    m.push_row(&[1.0, 0.0], 1);
    m.push_row(&[1.0, 1.0], 0);
    m
}

fn rank_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut pairs: Vec<(f64, u8)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pos = labels.iter().filter(|&&l| l != 0).count() as f64;
    let neg = labels.len() as f64 - pos;
    let mut rank_sum = 0.0;
    for (i, (_, l)) in pairs.iter().enumerate() {
        if *l != 0 {
            rank_sum += (i + 1) as f64;
        }
    }
    (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg)
}

// ---- standardizer -----------------------------------------------------------

#[test]
fn standardizer_centers_and_scales() {
    let m = blob_matrix(300, 3, 2.0, 0.7, 1);
    let s = Standardizer::fit(&m);
    let zs = s.transform(&m);
    let n = m.nrows() as f64;
    for j in 0..3 {
        let mean: f64 = zs.chunks_exact(3).map(|r| r[j]).sum::<f64>() / n;
        let var: f64 = zs.chunks_exact(3).map(|r| r[j] * r[j]).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-9);
    }
}

#[test]
fn standardizer_floors_constant_features() {
    let mut m = FeatureMatrix::new(vec!["c".into()]);
    for i in 0..10 {
        m.push_row(&[5.0], (i % 2) as u8);
    }
    let s = Standardizer::fit(&m);
    assert_eq!(s.std[0], STD_FLOOR);
    assert!(s.apply(&[5.0])[0].abs() < 1e-9);
}

// ---- gmm ---------------------------------------------------------------------

#[test]
fn mixture_recovers_separated_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dim = 3;
    let mut data = Vec::new();
    for _ in 0..5000 {
        for _ in 0..dim {
            data.push(randn(&mut rng));
        }
    }
    for _ in 0..5000 {
        for _ in 0..dim {
            data.push(5.0 + randn(&mut rng));
        }
    }
    let (mix, trace) = fit_mixture(&data, dim, 2, 7).unwrap();
    // one component near 0, the other near 5, any order
    let m0 = &mix.means[0..dim];
    let m1 = &mix.means[dim..2 * dim];
    let (lo, hi) = if m0[0] < m1[0] { (m0, m1) } else { (m1, m0) };
    for d in 0..dim {
        assert!(lo[d].abs() < 0.1, "low mean {lo:?}");
        assert!((hi[d] - 5.0).abs() < 0.1, "high mean {hi:?}");
    }
    assert!((mix.weights[0] - 0.5).abs() < 0.05);
    for w in trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-9 * 10_000.0, "log-likelihood decreased");
    }
}

#[test]
fn single_gaussian_is_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = 4;
    let n = 500;
    let data: Vec<f64> = (0..n * dim).map(|_| randn(&mut rng) * 2.0 + 1.0).collect();
    let (mix, _) = fit_mixture(&data, dim, 1, 1).unwrap();
    // oracle: plain sample mean/variance in the same accumulation order
    let mut mean = vec![0.0; dim];
    for row in data.chunks_exact(dim) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = vec![0.0; dim];
    for row in data.chunks_exact(dim) {
        for (s, (v, m)) in var.iter_mut().zip(row.iter().zip(&mean)) {
            let d = v - m;
            *s += d * d;
        }
    }
    for v in &mut var {
        *v /= n as f64;
    }
    assert_eq!(mix.weights, vec![1.0]);
    for d in 0..dim {
        assert!((mix.means[d] - mean[d]).abs() < 1e-12);
        assert!((mix.vars[d] - var[d]).abs() < 1e-12);
    }
}

#[test]
fn duplicated_dataset_trains_identical_model() {
    let m = blob_matrix(150, 2, 3.0, 0.4, 4);
    let mut doubled = FeatureMatrix::new(m.names().to_vec());
    for i in 0..m.nrows() {
        doubled.push_row(m.row(i), m.labels()[i]);
        doubled.push_row(m.row(i), m.labels()[i]);
    }
    let a = train_gmm(&m, 2, 9).unwrap();
    let b = train_gmm(&doubled, 2, 9).unwrap();
    let (ModelKind::Gmm(ga), ModelKind::Gmm(gb)) = (&a.kind, &b.kind) else {
        panic!("expected GMM models");
    };
    for class in 0..2 {
        let (ca, cb) = (&ga.classes[class], &gb.classes[class]);
        // components may come out in either order
        let matches = |x: &GmmClass, perm: [usize; 2]| {
            let dim = x.dim;
            (0..2).all(|k| {
                let me = &ca.means[k * dim..(k + 1) * dim];
                let other = &cb.means[perm[k] * dim..(perm[k] + 1) * dim];
                me.iter().zip(other).all(|(p, q)| (p - q).abs() < 1e-9)
            })
        };
        assert!(
            matches(ca, [0, 1]) || matches(ca, [1, 0]),
            "class {class} means differ beyond tolerance"
        );
    }
}

#[test]
fn symmetric_model_scores_zero_at_center() {
    let mirror = GmmModel {
        classes: [
            GmmClass {
                weights: vec![1.0],
                means: vec![-2.0, -2.0],
                vars: vec![1.0, 1.0],
                dim: 2,
            },
            GmmClass {
                weights: vec![1.0],
                means: vec![2.0, 2.0],
                vars: vec![1.0, 1.0],
                dim: 2,
            },
        ],
        priors: [0.5, 0.5],
    };
    assert!(score_gmm(&mirror, &[0.0, 0.0]).abs() < 1e-12);
    assert!(score_gmm(&mirror, &[2.0, 2.0]) > 0.0);
    assert!(score_gmm(&mirror, &[-2.0, -2.0]) < 0.0);
}

#[test]
fn gmm_scores_finite_for_extreme_inputs() {
    let m = blob_matrix(200, 2, 2.0, 0.5, 5);
    let model = train_gmm(&m, 2, 0).unwrap();
    for row in [[1e6, -1e6], [0.0, 0.0], [-1e8, 1e8]] {
        let score = model.score_row(&row).unwrap();
        assert!(score.is_finite(), "score {score}");
    }
}

#[test]
fn gmm_separates_blobs() {
    let m = blob_matrix(400, 3, 2.0, 0.6, 6);
    let model = train_gmm(&m, 2, 1).unwrap();
    let scores = model.score_matrix(&m).unwrap();
    assert!(rank_auc(&scores, m.labels()) > 0.999);
}

#[test]
fn gmm_rejects_small_class() {
    let mut m = FeatureMatrix::new(vec!["x".into()]);
    m.push_row(&[0.0], 0);
    m.push_row(&[1.0], 0);
    m.push_row(&[2.0], 0);
    m.push_row(&[9.0], 1);
    assert!(matches!(
        train_gmm(&m, 2, 0),
        Err(Error::TooFewClassSamples { class: 1, .. })
    ));
}

// ---- mlp ---------------------------------------------------------------------

#[test]
fn zero_weights_output_half() {
    let net = MlpModel {
        input: 3,
        hidden: 2,
        w1: vec![0.0; 6],
        b1: vec![0.0; 2],
        w2: vec![0.0; 2],
        b2: 0.0,
    };
    for row in [[0.0, 0.0, 0.0], [5.0, -2.0, 1.0]] {
        assert_eq!(net.forward(&row), 0.5);
    }
}

#[test]
fn outputs_stay_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let net = MlpModel::init(4, 6, 42);
    for _ in 0..100 {
        let row: Vec<f64> = (0..4).map(|_| randn(&mut rng) * 10.0).collect();
        let p = net.forward(&row);
        assert!(p > 0.0 && p < 1.0);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..5 {
        let input = 2 + trial % 3;
        let hidden = 1 + trial % 4;
        let n = 6;
        let mut net = MlpModel::init(input, hidden, trial as u64);
        // move away from the zero-bias initial point
        for b in &mut net.b1 {
            *b = randn(&mut rng) * 0.3;
        }
        net.b2 = randn(&mut rng) * 0.3;
        let zs: Vec<f64> = (0..n * input).map(|_| randn(&mut rng)).collect();
        let ys: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let (_, grad) = net.loss_and_gradient(&zs, &ys);

        let eps = 1e-6;
        let check = |write: &mut dyn FnMut(&mut MlpModel, f64), analytic: f64| {
            let mut plus = net.clone();
            write(&mut plus, eps);
            let mut minus = net.clone();
            write(&mut minus, -eps);
            let numeric = (plus.loss(&zs, &ys) - minus.loss(&zs, &ys)) / (2.0 * eps);
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
            assert!(
                rel < 1e-5,
                "trial {trial}: numeric {numeric} vs analytic {analytic}"
            );
        };
        for idx in 0..net.w1.len() {
            let g = grad.w1[idx];
            check(&mut |m: &mut MlpModel, d: f64| m.w1[idx] += d, g);
        }
        for idx in 0..net.b1.len() {
            let g = grad.b1[idx];
            check(&mut |m: &mut MlpModel, d: f64| m.b1[idx] += d, g);
        }
        for idx in 0..net.w2.len() {
            let g = grad.w2[idx];
            check(&mut |m: &mut MlpModel, d: f64| m.w2[idx] += d, g);
        }
        let g = grad.b2;
        check(&mut |m: &mut MlpModel, d: f64| m.b2 += d, g);
    }
}

#[test]
fn xor_solvable_with_two_hidden_units() {
    let m = xor_matrix();
    let solved = (0..10).any(|seed| {
        let model = train_mlp(&m, 2, seed).unwrap();
        let scores = model.score_matrix(&m).unwrap();
        scores
            .iter()
            .zip(m.labels())
            .all(|(&s, &y)| (s > 0.5) == (y != 0))
    });
    assert!(solved, "no seed of 10 reached 100% XOR training accuracy");
}

#[test]
fn single_neuron_separates_blobs() {
    let m = blob_matrix(150, 3, 1.5, 0.5, 10);
    let model = train_mlp(&m, 1, 3).unwrap();
    let scores = model.score_matrix(&m).unwrap();
    assert!(rank_auc(&scores, m.labels()) > 0.99);
}

#[test]
fn standardization_applied_exactly_once() {
    let m = blob_matrix(100, 2, 2.0, 0.5, 11);
    let model = train_mlp(&m, 2, 1).unwrap();
    let ModelKind::Mlp(net) = &model.kind else {
        panic!("expected MLP");
    };
    let raw = m.row(0);
    let z = model.standardizer.apply(raw);
    assert_eq!(model.score_row(raw).unwrap(), net.forward(&z));
    // scoring twice gives the identical value: no hidden state
    assert_eq!(model.score_row(raw).unwrap(), model.score_row(raw).unwrap());
}

// ---- svm ---------------------------------------------------------------------

#[test]
fn two_point_problem_bisects() {
    let mut m = FeatureMatrix::new(vec!["x".into(), "y".into()]);
    m.push_row(&[0.0, 0.0], 0);
    m.push_row(&[2.0, 2.0], 1);
    let model = train_svm(&m, 10.0, None, 0).unwrap();
    let score_mid = model.score_row(&[1.0, 1.0]).unwrap();
    assert!(score_mid.abs() < 1e-6, "midpoint score {score_mid}");
    assert!(model.score_row(&[2.0, 2.0]).unwrap() > 0.0);
    assert!(model.score_row(&[0.0, 0.0]).unwrap() < 0.0);
}

#[test]
fn separable_problem_reaches_full_training_accuracy() {
    let m = blob_matrix(100, 4, 1.5, 0.4, 12);
    let model = train_svm(&m, 10.0, None, 0).unwrap();
    let scores = model.score_matrix(&m).unwrap();
    for (s, &y) in scores.iter().zip(m.labels()) {
        assert_eq!(*s > 0.0, y != 0, "misclassified training point");
    }
}

#[test]
fn dual_constraints_hold() {
    for seed in 0..5 {
        let m = blob_matrix(80, 3, 1.8, 0.5, 100 + seed);
        let model = train_svm(&m, 10.0, None, 0).unwrap();
        let ModelKind::Svm(svm) = &model.kind else {
            panic!("expected SVM");
        };
        let alpha_sum: f64 = svm.coeffs.iter().sum();
        assert!(alpha_sum.abs() < 1e-6, "sum alpha_i y_i = {alpha_sum}");
        for &c in &svm.coeffs {
            let alpha = c.abs();
            assert!(alpha > 0.0 && alpha <= svm.cbox + 1e-9, "alpha {alpha}");
        }
    }
}

#[test]
fn margin_support_vectors_score_one() {
    let m = blob_matrix(60, 2, 1.5, 0.5, 13);
    let model = train_svm(&m, 10.0, None, 0).unwrap();
    let ModelKind::Svm(svm) = &model.kind else {
        panic!("expected SVM");
    };
    let mut checked = 0;
    for (i, sv) in svm.support.chunks_exact(svm.dim).enumerate() {
        let alpha = svm.coeffs[i].abs();
        if alpha > 1e-6 && alpha < svm.cbox - 1e-6 {
            let f = score_svm(svm, sv);
            let y = svm.coeffs[i].signum();
            assert!((y * f - 1.0).abs() < 0.01, "margin SV scored {f}");
            checked += 1;
        }
    }
    assert!(checked > 0, "no non-bound support vectors to check");
}

#[test]
fn far_point_score_bounded() {
    let m = blob_matrix(60, 2, 1.5, 0.5, 14);
    let model = train_svm(&m, 10.0, None, 0).unwrap();
    let ModelKind::Svm(svm) = &model.kind else {
        panic!("expected SVM");
    };
    let bound: f64 = svm.coeffs.iter().map(|c| c.abs()).sum::<f64>() + svm.bias.abs();
    let far = model.score_row(&[1e7, -1e7]).unwrap();
    assert!(far.abs() <= bound + 1e-9);
}

#[test]
fn svm_rejects_single_class() {
    let mut m = FeatureMatrix::new(vec!["x".into()]);
    m.push_row(&[0.0], 1);
    m.push_row(&[1.0], 1);
    assert!(matches!(train_svm(&m, 10.0, None, 0), Err(Error::SingleClass)));
}

// ---- shared contract ----------------------------------------------------------

#[test]
fn all_models_roundtrip_through_json() {
    let m = blob_matrix(120, 3, 1.5, 0.5, 15);
    let specs = [
        ClassifierSpec::Gmm { gaussians: 2 },
        ClassifierSpec::Mlp { neurons: 3 },
        ClassifierSpec::Svm {
            cbox: 10.0,
            gamma: None,
        },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for spec in &specs {
        let model = spec.train(&m, 21).unwrap();
        let json = model.to_json();
        let back = TrainedModel::from_json(&json).unwrap();
        assert_eq!(back.kind_name(), model.kind_name());
        for _ in 0..20 {
            let row: Vec<f64> = (0..3).map(|_| randn(&mut rng) * 3.0).collect();
            let a = model.score_row(&row).unwrap();
            let b = back.score_row(&row).unwrap();
            assert!((a - b).abs() < 1e-12, "{} scores drifted", spec.name());
        }
    }
}

#[test]
fn fixed_seed_reproduces_models_bitwise() {
    let m = blob_matrix(100, 2, 1.5, 0.5, 17);
    for spec in [
        ClassifierSpec::Gmm { gaussians: 2 },
        ClassifierSpec::Mlp { neurons: 2 },
        ClassifierSpec::Svm {
            cbox: 10.0,
            gamma: None,
        },
    ] {
        let a = spec.train(&m, 33).unwrap();
        let b = spec.train(&m, 33).unwrap();
        assert_eq!(a.to_json(), b.to_json(), "{} not reproducible", spec.name());
    }
}

#[test]
fn scoring_rejects_mismatched_columns() {
    let m = blob_matrix(50, 2, 1.5, 0.5, 18);
    let model = train_gmm(&m, 1, 0).unwrap();
    assert!(matches!(
        model.score_row(&[1.0]),
        Err(Error::LengthMismatch { .. })
    ));
    let mut other = FeatureMatrix::new(vec!["p".into(), "q".into()]);
    other.push_row(&[0.0, 0.0], 0);
    assert!(matches!(
        model.score_matrix(&other),
        Err(Error::FeatureNameMismatch { .. })
    ));
}
