//! Gaussian-kernel SVM trained with sequential minimal optimization on
//! standardized features. Deterministic: pair selection follows fixed
//! index order plus the max-|E1-E2| heuristic, no randomized passes.

use serde_json::json;

use super::{payload_f64, payload_floats, payload_usize, FeatureMatrix, Standardizer, TrainedModel};
use crate::error::{Error, Result};

/// KKT violation tolerance at convergence.
pub const KKT_TOL: f64 = 1e-3;
const ALPHA_EPS: f64 = 1e-12;
/// Hard cap on optimization steps, in units of the training-set size.
const MAX_STEP_FACTOR: usize = 500;

/// Support vectors with their `alpha_i * y_i` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub dim: usize,
    pub support: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub cbox: f64,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    (-gamma * d2).exp()
}

struct Smo<'a> {
    data: &'a [f64],
    dim: usize,
    y: Vec<f64>,
    alpha: Vec<f64>,
    errors: Vec<f64>,
    b: f64,
    c: f64,
    gamma: f64,
    steps: usize,
}

impl<'a> Smo<'a> {
    fn new(data: &'a [f64], dim: usize, y: Vec<f64>, c: f64, gamma: f64) -> Self {
        let n = y.len();
        // f(x_i) = 0 initially, so E_i = -y_i
        let errors = y.iter().map(|&yi| -yi).collect();
        Self {
            data,
            dim,
            y,
            alpha: vec![0.0; n],
            errors,
            b: 0.0,
            c,
            gamma,
            steps: 0,
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn kernel(&self, i: usize, j: usize) -> f64 {
        rbf(self.row(i), self.row(j), self.gamma)
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1_old, a2_old) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2_old - a1_old).max(0.0), (self.c + a2_old - a1_old).min(self.c))
        } else {
            ((a1_old + a2_old - self.c).max(0.0), (a1_old + a2_old).min(self.c))
        };
        if hi - lo < ALPHA_EPS {
            return false;
        }
        let k11 = self.kernel(i1, i1);
        let k12 = self.kernel(i1, i2);
        let k22 = self.kernel(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;
        if eta <= 0.0 {
            // degenerate direction (duplicate points under the RBF kernel)
            return false;
        }
        let mut a2 = a2_old + y2 * (e1 - e2) / eta;
        a2 = a2.clamp(lo, hi);
        if (a2 - a2_old).abs() < ALPHA_EPS * (a2 + a2_old + ALPHA_EPS) {
            return false;
        }
        let a1 = a1_old + s * (a2_old - a2);

        let d1 = y1 * (a1 - a1_old);
        let d2 = y2 * (a2 - a2_old);
        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        let b_new = if a1 > ALPHA_EPS && a1 < self.c - ALPHA_EPS {
            b1
        } else if a2 > ALPHA_EPS && a2 < self.c - ALPHA_EPS {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = b_new - self.b;
        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        self.b = b_new;

        for i in 0..self.y.len() {
            let k1 = self.kernel(i1, i);
            let k2 = self.kernel(i2, i);
            self.errors[i] += d1 * k1 + d2 * k2 + db;
        }
        self.steps += 1;
        true
    }

    fn examine(&mut self, i2: usize) -> bool {
        let y2 = self.y[i2];
        let a2 = self.alpha[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;
        let violates =
            (r2 < -KKT_TOL && a2 < self.c - ALPHA_EPS) || (r2 > KKT_TOL && a2 > ALPHA_EPS);
        if !violates {
            return false;
        }
        let n = self.y.len();
        // second-choice heuristic: maximize |E1 - E2| over non-bound points
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if self.alpha[i] > ALPHA_EPS && self.alpha[i] < self.c - ALPHA_EPS {
                let gap = (self.errors[i] - e2).abs();
                if best.is_none_or(|(_, g)| gap > g) {
                    best = Some((i, gap));
                }
            }
        }
        if let Some((i1, _)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        // fall back to scanning non-bound then all points, fixed order
        for i1 in 0..n {
            if self.alpha[i1] > ALPHA_EPS && self.alpha[i1] < self.c - ALPHA_EPS && self.take_step(i1, i2) {
                return true;
            }
        }
        for i1 in 0..n {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn solve(&mut self) {
        let n = self.y.len();
        let max_steps = MAX_STEP_FACTOR * n;
        let mut examine_all = true;
        loop {
            let mut changed = 0usize;
            for i in 0..n {
                let non_bound = self.alpha[i] > ALPHA_EPS && self.alpha[i] < self.c - ALPHA_EPS;
                if (examine_all || non_bound) && self.examine(i) {
                    changed += 1;
                }
                if self.steps >= max_steps {
                    return;
                }
            }
            if examine_all {
                if changed == 0 {
                    return;
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
    }
}

/// Train on standardized features. `gamma` defaults to `1 / n_features`;
/// the dual is optimized to the KKT tolerance. Training is deterministic,
/// so the seed only keeps the uniform classifier interface.
pub fn train_svm(
    matrix: &FeatureMatrix,
    cbox: f64,
    gamma: Option<f64>,
    _seed: u64,
) -> Result<TrainedModel> {
    if cbox <= 0.0 {
        return Err(Error::ParamOutOfRange {
            what: "cbox",
            got: cbox.to_string(),
            allowed: "> 0",
        });
    }
    let n_pos = matrix.labels().iter().filter(|&&l| l != 0).count();
    if n_pos == 0 || n_pos == matrix.nrows() {
        return Err(Error::SingleClass);
    }
    let d = matrix.ncols();
    let gamma = gamma.unwrap_or(1.0 / d as f64);
    if gamma <= 0.0 {
        return Err(Error::ParamOutOfRange {
            what: "gamma",
            got: gamma.to_string(),
            allowed: "> 0",
        });
    }
    let standardizer = Standardizer::fit(matrix);
    let zs = standardizer.transform(matrix);
    let y: Vec<f64> = matrix
        .labels()
        .iter()
        .map(|&l| if l != 0 { 1.0 } else { -1.0 })
        .collect();
    let mut smo = Smo::new(&zs, d, y, cbox, gamma);
    smo.solve();

    let mut support = Vec::new();
    let mut coeffs = Vec::new();
    for i in 0..smo.y.len() {
        if smo.alpha[i] > ALPHA_EPS {
            support.extend_from_slice(smo.row(i));
            coeffs.push(smo.alpha[i] * smo.y[i]);
        }
    }
    Ok(TrainedModel {
        kind: super::ModelKind::Svm(SvmModel {
            dim: d,
            support,
            coeffs,
            bias: smo.b,
            gamma,
            cbox,
        }),
        feature_names: matrix.names().to_vec(),
        standardizer,
    })
}

/// Kernel decision value of a standardized row; the sign is the predicted
/// class, the magnitude feeds ROC thresholding.
pub fn score_svm(model: &SvmModel, z: &[f64]) -> f64 {
    model
        .coeffs
        .iter()
        .zip(model.support.chunks_exact(model.dim))
        .map(|(c, sv)| c * rbf(sv, z, model.gamma))
        .sum::<f64>()
        + model.bias
}

impl SvmModel {
    pub(super) fn to_payload(&self) -> serde_json::Value {
        json!({
            "dims": self.dim,
            "gamma": self.gamma,
            "cbox": self.cbox,
            "bias": self.bias,
            "coeffs": super::floats_to_b64(&self.coeffs),
            "support": super::floats_to_b64(&self.support),
        })
    }

    pub(super) fn from_payload(payload: &serde_json::Value) -> Result<SvmModel> {
        let model = SvmModel {
            dim: payload_usize(payload, "dims")?,
            gamma: payload_f64(payload, "gamma")?,
            cbox: payload_f64(payload, "cbox")?,
            bias: payload_f64(payload, "bias")?,
            coeffs: payload_floats(payload, "coeffs")?,
            support: payload_floats(payload, "support")?,
        };
        if model.dim == 0 || model.support.len() != model.coeffs.len() * model.dim {
            return Err(Error::Format {
                format: "model JSON",
                msg: "SVM payload dimensions inconsistent".into(),
            });
        }
        Ok(model)
    }
}
