//! Diagonal-covariance Gaussian mixtures trained per class with EM,
//! initialized by k-means, scored as a class log-likelihood ratio.

use serde_json::json;

use super::{
    kmeans, payload_field, payload_floats, payload_usize, standardized_class_split, FeatureMatrix,
    Standardizer, TrainedModel,
};
use crate::error::{Error, Result};

/// Floor on each diagonal covariance entry (features are standardized
/// before training, so this is a relative floor too).
pub const VAR_FLOOR: f64 = 1e-6;
/// EM stops when the per-frame log-likelihood gain drops below this.
pub const EM_TOL_PER_FRAME: f64 = 1e-6;
pub const EM_MAX_ITERS: usize = 200;

/// One class-conditional mixture: `weights[g]`, `means[g*dim..]`,
/// `vars[g*dim..]` row-major over components.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmClass {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub vars: Vec<f64>,
    pub dim: usize,
}

impl GmmClass {
    pub fn gaussians(&self) -> usize {
        self.weights.len()
    }

    /// Mixture log-density of a standardized row.
    pub fn log_density(&self, z: &[f64]) -> f64 {
        let g = self.gaussians();
        let mut best = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(g);
        for j in 0..g {
            let t = self.weights[j].max(1e-300).ln() + self.component_log_density(j, z);
            terms.push(t);
            if t > best {
                best = t;
            }
        }
        // log-sum-exp
        best + terms.iter().map(|t| (t - best).exp()).sum::<f64>().ln()
    }

    fn component_log_density(&self, j: usize, z: &[f64]) -> f64 {
        let d = self.dim;
        let mean = &self.means[j * d..(j + 1) * d];
        let var = &self.vars[j * d..(j + 1) * d];
        let mut acc = 0.0;
        for ((zi, mi), vi) in z.iter().zip(mean).zip(var) {
            let diff = zi - mi;
            acc += (2.0 * std::f64::consts::PI * vi).ln() + diff * diff / vi;
        }
        -0.5 * acc
    }
}

/// Two class-conditional mixtures plus class priors (index = label).
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub classes: [GmmClass; 2],
    pub priors: [f64; 2],
}

/// EM fit of one diagonal mixture. Returns the mixture and the full
/// training log-likelihood trace (one entry per iteration, non-decreasing).
pub fn fit_mixture(data: &[f64], dim: usize, gaussians: usize, seed: u64) -> Result<(GmmClass, Vec<f64>)> {
    assert!(dim > 0 && data.len().is_multiple_of(dim));
    let n = data.len() / dim;
    if gaussians == 0 || n < gaussians {
        return Err(Error::TooFewClassSamples {
            class: 0,
            got: n,
            need: gaussians.max(1),
        });
    }
    let g = gaussians;
    let means = kmeans(data, dim, g, seed)?;

    // shared initial variance: per-dimension sample variance
    let mut dim_mean = vec![0.0; dim];
    for row in data.chunks_exact(dim) {
        for (m, v) in dim_mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut dim_mean {
        *m /= n as f64;
    }
    let mut dim_var = vec![0.0; dim];
    for row in data.chunks_exact(dim) {
        for (s, (v, m)) in dim_var.iter_mut().zip(row.iter().zip(&dim_mean)) {
            let diff = v - m;
            *s += diff * diff;
        }
    }
    for v in &mut dim_var {
        *v = (*v / n as f64).max(VAR_FLOOR);
    }

    let mut mix = GmmClass {
        weights: vec![1.0 / g as f64; g],
        means,
        vars: dim_var
            .iter()
            .cycle()
            .take(g * dim)
            .copied()
            .collect(),
        dim,
    };

    let mut trace = Vec::new();
    let mut resp = vec![0.0; n * g];
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..EM_MAX_ITERS {
        // E-step
        let mut ll = 0.0;
        for (i, row) in data.chunks_exact(dim).enumerate() {
            let mut best = f64::NEG_INFINITY;
            for j in 0..g {
                let t = mix.weights[j].max(1e-300).ln() + mix.component_log_density(j, row);
                resp[i * g + j] = t;
                if t > best {
                    best = t;
                }
            }
            let norm: f64 = (0..g).map(|j| (resp[i * g + j] - best).exp()).sum();
            ll += best + norm.ln();
            for j in 0..g {
                resp[i * g + j] = (resp[i * g + j] - best).exp() / norm;
            }
        }
        trace.push(ll);

        // M-step
        let mut weight_sum = vec![0.0; g];
        let mut mean_acc = vec![0.0; g * dim];
        for (i, row) in data.chunks_exact(dim).enumerate() {
            for j in 0..g {
                let r = resp[i * g + j];
                weight_sum[j] += r;
                for (acc, v) in mean_acc[j * dim..(j + 1) * dim].iter_mut().zip(row) {
                    *acc += r * v;
                }
            }
        }
        for j in 0..g {
            let w = weight_sum[j].max(1e-300);
            for slot in &mut mean_acc[j * dim..(j + 1) * dim] {
                *slot /= w;
            }
        }
        let mut var_acc = vec![0.0; g * dim];
        for (i, row) in data.chunks_exact(dim).enumerate() {
            for j in 0..g {
                let r = resp[i * g + j];
                let mean = &mean_acc[j * dim..(j + 1) * dim];
                for (acc, (v, m)) in var_acc[j * dim..(j + 1) * dim]
                    .iter_mut()
                    .zip(row.iter().zip(mean))
                {
                    let diff = v - m;
                    *acc += r * diff * diff;
                }
            }
        }
        for j in 0..g {
            let w = weight_sum[j].max(1e-300);
            for slot in &mut var_acc[j * dim..(j + 1) * dim] {
                *slot = (*slot / w).max(VAR_FLOOR);
            }
            mix.weights[j] = weight_sum[j] / n as f64;
        }
        mix.means = mean_acc;
        mix.vars = var_acc;

        if ll - prev_ll < EM_TOL_PER_FRAME * n as f64 && prev_ll.is_finite() {
            break;
        }
        prev_ll = ll;
    }
    Ok((mix, trace))
}

/// Train one mixture per class (same number of Gaussians each) on
/// standardized features; priors come from training-class frequencies.
pub fn train_gmm(matrix: &FeatureMatrix, gaussians: usize, seed: u64) -> Result<TrainedModel> {
    if gaussians == 0 {
        return Err(Error::ParamOutOfRange {
            what: "gaussians",
            got: "0".into(),
            allowed: ">= 1",
        });
    }
    let standardizer = Standardizer::fit(matrix);
    let split = standardized_class_split(matrix, &standardizer);
    let d = matrix.ncols();
    let mut classes = Vec::with_capacity(2);
    for (class, data) in split.iter().enumerate() {
        let n = data.len() / d;
        if n < gaussians {
            return Err(Error::TooFewClassSamples {
                class: class as u8,
                got: n,
                need: gaussians,
            });
        }
        let (mix, _) = fit_mixture(data, d, gaussians, seed.wrapping_add(class as u64))?;
        classes.push(mix);
    }
    let n_total = matrix.nrows() as f64;
    let n1 = matrix.labels().iter().filter(|&&l| l != 0).count() as f64;
    let priors = [(n_total - n1) / n_total, n1 / n_total];
    let [c0, c1] = <[GmmClass; 2]>::try_from(classes).expect("two classes");
    Ok(TrainedModel {
        kind: super::ModelKind::Gmm(GmmModel {
            classes: [c0, c1],
            priors,
        }),
        feature_names: matrix.names().to_vec(),
        standardizer,
    })
}

/// Log-likelihood-ratio score of a standardized row:
/// `log p(z|cough) + log prior(cough) - log p(z|other) - log prior(other)`.
pub fn score_gmm(model: &GmmModel, z: &[f64]) -> f64 {
    model.classes[1].log_density(z) + model.priors[1].max(1e-300).ln()
        - model.classes[0].log_density(z)
        - model.priors[0].max(1e-300).ln()
}

impl GmmModel {
    pub(super) fn to_payload(&self) -> serde_json::Value {
        json!({
            "gaussians": self.classes[0].gaussians(),
            "dims": self.classes[0].dim,
            "priors": super::floats_to_b64(&self.priors),
            "classes": self.classes.iter().map(|c| json!({
                "weights": super::floats_to_b64(&c.weights),
                "means": super::floats_to_b64(&c.means),
                "vars": super::floats_to_b64(&c.vars),
            })).collect::<Vec<_>>(),
        })
    }

    pub(super) fn from_payload(payload: &serde_json::Value) -> Result<GmmModel> {
        let dim = payload_usize(payload, "dims")?;
        let priors_vec = payload_floats(payload, "priors")?;
        if priors_vec.len() != 2 {
            return Err(Error::Format {
                format: "model JSON",
                msg: "priors must hold two values".into(),
            });
        }
        let classes_json = payload_field(payload, "classes")?
            .as_array()
            .ok_or_else(|| Error::Format {
                format: "model JSON",
                msg: "classes must be an array".into(),
            })?;
        if classes_json.len() != 2 {
            return Err(Error::Format {
                format: "model JSON",
                msg: "expected exactly two classes".into(),
            });
        }
        let mut classes = Vec::with_capacity(2);
        for c in classes_json {
            classes.push(GmmClass {
                weights: payload_floats(c, "weights")?,
                means: payload_floats(c, "means")?,
                vars: payload_floats(c, "vars")?,
                dim,
            });
        }
        let [c0, c1] = <[GmmClass; 2]>::try_from(classes).expect("two classes");
        Ok(GmmModel {
            classes: [c0, c1],
            priors: [priors_vec[0], priors_vec[1]],
        })
    }
}
