//! 10-fold cross-validation, ROC construction, and the revised error rate
//! (minimum weighted distance from the ROC curve to the ideal corner).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classifiers::ClassifierSpec;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::info::select_features;

/// Per-frame fold assignment for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub fold_assignments: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
}

impl FoldPlan {
    pub fn fold_indices(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.fold_assignments.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

/// Random unstratified split: a seeded permutation cut into k blocks whose
/// sizes differ by at most one.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k == 0 || n < k {
        return Err(Error::ParamOutOfRange {
            what: "folds",
            got: format!("{k} folds for {n} frames"),
            allowed: "1 <= folds <= frames",
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let base = n / k;
    let extra = n % k;
    let mut fold_assignments = vec![0usize; n];
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &idx in &order[cursor..cursor + size] {
            fold_assignments[idx] = fold;
        }
        cursor += size;
    }
    Ok(FoldPlan {
        fold_assignments,
        folds: k,
        seed,
    })
}

/// Fold assignment that keeps whole groups (e.g. recordings) together:
/// groups are shuffled and dealt greedily to the smallest fold.
pub fn make_grouped_folds(groups: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    let mut distinct: Vec<usize> = groups.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if k == 0 || distinct.len() < k {
        return Err(Error::ParamOutOfRange {
            what: "folds",
            got: format!("{k} folds for {} groups", distinct.len()),
            allowed: "1 <= folds <= distinct groups",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..distinct.len()).rev() {
        let j = rng.random_range(0..=i);
        distinct.swap(i, j);
    }
    let mut sizes: Vec<usize> = distinct
        .iter()
        .map(|g| groups.iter().filter(|&&x| x == *g).count())
        .collect();
    let mut fold_of_group = std::collections::HashMap::new();
    let mut fold_sizes = vec![0usize; k];
    // largest groups first onto the currently smallest fold
    let mut order: Vec<usize> = (0..distinct.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]));
    for idx in order {
        let fold = (0..k).min_by_key(|&f| fold_sizes[f]).unwrap();
        fold_of_group.insert(distinct[idx], fold);
        fold_sizes[fold] += sizes[idx];
        sizes[idx] = 0;
    }
    let fold_assignments = groups.iter().map(|g| fold_of_group[g]).collect();
    Ok(FoldPlan {
        fold_assignments,
        folds: k,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Threshold-swept ROC curve with its revised error rate.
#[derive(Debug, Clone, Serialize)]
pub struct RocCurve {
    /// Sorted by threshold descending; starts at the +inf anchor (0, 0)
    /// and ends at (1, 1).
    pub points: Vec<RocPoint>,
    pub rer: f64,
    pub rer_threshold: f64,
    /// TPR/FPR at the RER-minimizing threshold.
    pub tpr: f64,
    pub fpr: f64,
    pub auc: f64,
    pub w_tpr: f64,
    pub w_fpr: f64,
}

/// ROC with equal TPR/FPR weighting.
pub fn sweep_roc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    sweep_roc_weighted(scores, labels, 1.0, 1.0)
}

/// Predict positive where `score >= threshold` for every distinct score
/// threshold (descending) plus a +inf anchor; frames with equal scores flip
/// together.
pub fn sweep_roc_weighted(
    scores: &[f64],
    labels: &[u8],
    w_tpr: f64,
    w_fpr: f64,
) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "scores vs labels",
            left: scores.len(),
            right: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN score in ROC sweep".into()));
    }
    let positives = labels.iter().filter(|&&l| l != 0).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
    }

    let (rer, rer_threshold, tpr, fpr) = rer_of_points(&points, w_tpr, w_fpr)?;
    let auc = auc_of_points(&points);
    Ok(RocCurve {
        points,
        rer,
        rer_threshold,
        tpr,
        fpr,
        auc,
        w_tpr,
        w_fpr,
    })
}

fn auc_of_points(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

fn rer_of_points(points: &[RocPoint], w_tpr: f64, w_fpr: f64) -> Result<(f64, f64, f64, f64)> {
    if w_tpr <= 0.0 || w_fpr <= 0.0 {
        return Err(Error::ParamOutOfRange {
            what: "rer weights",
            got: format!("w_tpr={w_tpr}, w_fpr={w_fpr}"),
            allowed: "> 0",
        });
    }
    let mut best: Option<(f64, f64, f64, f64)> = None;
    // descending threshold order: on distance ties the later (smaller)
    // threshold wins
    for p in points {
        let dist = (w_tpr * (1.0 - p.tpr) * (1.0 - p.tpr) + w_fpr * p.fpr * p.fpr).sqrt();
        if best.is_none_or(|(d, ..)| dist <= d) {
            best = Some((dist, p.threshold, p.tpr, p.fpr));
        }
    }
    Ok(best.expect("curve has points"))
}

/// Minimum weighted distance from the curve to the (TPR 1, FPR 0) corner;
/// returns the revised error rate and its minimizing threshold (the
/// smallest threshold on ties).
pub fn compute_rer(curve: &RocCurve, w_tpr: f64, w_fpr: f64) -> Result<(f64, f64)> {
    let (rer, threshold, _, _) = rer_of_points(&curve.points, w_tpr, w_fpr)?;
    Ok((rer, threshold))
}

impl RocCurve {
    /// `threshold,fpr,tpr` rows, threshold descending.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            out.push_str(&format!("{:?},{:?},{:?}\n", p.threshold, p.fpr, p.tpr));
        }
        out
    }

    /// Self-contained SVG plot of the curve with the RER point marked.
    pub fn to_svg(&self) -> String {
        const SIZE: f64 = 480.0;
        const MARGIN: f64 = 50.0;
        let span = SIZE - 2.0 * MARGIN;
        let x = |fpr: f64| MARGIN + fpr * span;
        let y = |tpr: f64| SIZE - MARGIN - tpr * span;
        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
             viewBox=\"0 0 {SIZE} {SIZE}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        ));
        svg.push_str(&format!(
            "<rect x=\"{m}\" y=\"{m}\" width=\"{span}\" height=\"{span}\" fill=\"white\" stroke=\"#333\"/>\n",
            m = MARGIN
        ));
        for i in 0..=5 {
            let t = i as f64 / 5.0;
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>\n",
                x(t),
                y(0.0),
                x(t),
                y(1.0)
            ));
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>\n",
                x(0.0),
                y(t),
                x(1.0),
                y(t)
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{t:.1}</text>\n",
                x(t),
                SIZE - MARGIN + 18.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{t:.1}</text>\n",
                MARGIN - 8.0,
                y(t) + 4.0
            ));
        }
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#bbb\" stroke-dasharray=\"6 4\"/>\n",
            x(0.0),
            y(0.0),
            x(1.0),
            y(1.0)
        ));
        let path: Vec<String> = self
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.fpr), y(p.tpr)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#0b62a4\" stroke-width=\"2\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"#d43d30\"/>\n",
            x(self.fpr),
            y(self.tpr)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">RER = {:.4} (TPR {:.4}, FPR {:.4}), AUC = {:.4}</text>\n",
            MARGIN,
            MARGIN - 14.0,
            self.rer,
            self.tpr,
            self.fpr,
            self.auc
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">false positive rate</text>\n",
            x(0.5),
            SIZE - 10.0
        ));
        svg.push_str(&format!(
            "<text x=\"14\" y=\"{:.1}\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">true positive rate</text>\n",
            y(0.5),
            y(0.5)
        ));
        svg.push_str("</svg>\n");
        svg
    }
}

/// Cross-validation settings; `selection_k = None` trains on all columns,
/// `groups` keeps whole recordings inside one fold when set.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub folds: usize,
    pub bins: usize,
    pub selection_k: Option<usize>,
    pub seed: u64,
    pub w_tpr: f64,
    pub w_fpr: f64,
    pub groups: Option<Vec<usize>>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            bins: crate::info::DEFAULT_BINS,
            selection_k: None,
            seed: 0,
            w_tpr: 1.0,
            w_fpr: 1.0,
            groups: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_test: usize,
    pub n_positive: usize,
    pub rer: f64,
    pub auc: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub selected: Vec<String>,
}

/// Pooled cross-validation outcome: one ROC over all test-fold scores plus
/// per-fold metrics.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub curve: RocCurve,
    pub per_fold: Vec<FoldMetrics>,
    pub pooled_scores: Vec<f64>,
    pub pooled_labels: Vec<u8>,
}

#[derive(Serialize)]
struct MetricsJson<'a> {
    tpr: f64,
    fpr: f64,
    rer: f64,
    rer_threshold: f64,
    auc: f64,
    per_fold: &'a [FoldMetrics],
}

impl CrossValidation {
    pub fn metrics_json(&self) -> String {
        serde_json::to_string_pretty(&MetricsJson {
            tpr: self.curve.tpr,
            fpr: self.curve.fpr,
            rer: self.curve.rer,
            rer_threshold: self.curve.rer_threshold,
            auc: self.curve.auc,
            per_fold: &self.per_fold,
        })
        .expect("metrics serialize")
    }
}

/// Per fold: feature selection and standardization on the training 90%
/// only, then train, score the held-out fold, and pool all test scores
/// into one ROC.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    spec: &ClassifierSpec,
    config: &EvalConfig,
) -> Result<CrossValidation> {
    let plan = match &config.groups {
        Some(groups) => {
            if groups.len() != matrix.nrows() {
                return Err(Error::LengthMismatch {
                    what: "groups vs frames",
                    left: groups.len(),
                    right: matrix.nrows(),
                });
            }
            make_grouped_folds(groups, config.folds, config.seed)?
        }
        None => make_folds(matrix.nrows(), config.folds, config.seed)?,
    };
    let mut pooled_scores = Vec::with_capacity(matrix.nrows());
    let mut pooled_labels = Vec::with_capacity(matrix.nrows());
    let mut per_fold = Vec::with_capacity(config.folds);

    for fold in 0..config.folds {
        let (train_idx, test_idx) = plan.fold_indices(fold);
        let has_both = |idx: &[usize]| {
            let mut saw = [false, false];
            for &i in idx {
                saw[(matrix.labels()[i] != 0) as usize] = true;
            }
            saw[0] && saw[1]
        };
        if !has_both(&train_idx) || !has_both(&test_idx) {
            return Err(Error::FoldMissingClass(fold));
        }
        let train = matrix.select_rows(&train_idx);
        let test = matrix.select_rows(&test_idx);

        // selection on training data only; the chosen subset keeps
        // registry column order so full-width selection is a no-op
        let (train_view, test_view, selected) = match config.selection_k {
            Some(k) if k < matrix.ncols() => {
                let selection = select_features(&train, k, config.bins)?;
                let mut cols = selection.indices.clone();
                cols.sort_unstable();
                (
                    train.select_columns(&cols),
                    test.select_columns(&cols),
                    selection.order,
                )
            }
            _ => (train, test, Vec::new()),
        };

        let model = spec.train(&train_view, config.seed.wrapping_add(fold as u64))?;
        let scores = model.score_matrix(&test_view)?;
        let fold_curve =
            sweep_roc_weighted(&scores, test_view.labels(), config.w_tpr, config.w_fpr)?;
        per_fold.push(FoldMetrics {
            fold,
            n_test: test_view.nrows(),
            n_positive: test_view.labels().iter().filter(|&&l| l != 0).count(),
            rer: fold_curve.rer,
            auc: fold_curve.auc,
            tpr: fold_curve.tpr,
            fpr: fold_curve.fpr,
            selected,
        });
        pooled_scores.extend_from_slice(&scores);
        pooled_labels.extend_from_slice(test_view.labels());
    }

    let curve = sweep_roc_weighted(&pooled_scores, &pooled_labels, config.w_tpr, config.w_fpr)?;
    Ok(CrossValidation {
        curve,
        per_fold,
        pooled_scores,
        pooled_labels,
    })
}

#[cfg(test)]
mod tests;
