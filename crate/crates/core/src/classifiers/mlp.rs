//! Single-hidden-layer perceptron: tanh hidden units, one sigmoid output,
//! mean cross-entropy loss, full-batch gradient descent with momentum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{payload_f64, payload_floats, payload_usize, FeatureMatrix, Standardizer, TrainedModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct MlpConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Stop once the epoch-to-epoch loss improvement falls below this.
    pub loss_tol: f64,
}

impl MlpConfig {
    pub fn new(hidden: usize) -> Self {
        Self {
            hidden,
            learning_rate: 0.01,
            momentum: 0.9,
            epochs: 500,
            loss_tol: 1e-7,
        }
    }
}

/// Network weights: `w1` is hidden x input row-major, `w2` one weight per
/// hidden unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub input: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Gradient of the mean cross-entropy loss, same shapes as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl MlpModel {
    /// Random init: every weight uniform in +-1/sqrt(fan_in), biases zero.
    pub fn init(input: usize, hidden: usize, seed: u64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lim1 = 1.0 / (input as f64).sqrt();
        let lim2 = 1.0 / (hidden as f64).sqrt();
        let w1 = (0..hidden * input)
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * lim1)
            .collect();
        let w2 = (0..hidden)
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * lim2)
            .collect();
        MlpModel {
            input,
            hidden,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: 0.0,
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn hidden_activations(&self, z: &[f64], out: &mut [f64]) {
        for j in 0..self.hidden {
            let row = &self.w1[j * self.input..(j + 1) * self.input];
            let a: f64 = row.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + self.b1[j];
            out[j] = a.tanh();
        }
    }

    /// Posterior estimate in (0, 1) for a standardized row.
    pub fn forward(&self, z: &[f64]) -> f64 {
        let mut h = vec![0.0; self.hidden];
        self.hidden_activations(z, &mut h);
        sigmoid(self.w2.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>() + self.b2)
    }

    /// Mean cross-entropy over flat row-major standardized data.
    pub fn loss(&self, zs: &[f64], ys: &[u8]) -> f64 {
        let n = ys.len();
        let mut total = 0.0;
        for (row, &y) in zs.chunks_exact(self.input).zip(ys) {
            let p = self.forward(row).clamp(1e-12, 1.0 - 1e-12);
            total -= if y != 0 { p.ln() } else { (1.0 - p).ln() };
        }
        total / n as f64
    }

    /// Analytic gradient of [`MlpModel::loss`] by backpropagation, plus the
    /// loss itself.
    #[allow(clippy::needless_range_loop)]
    pub fn loss_and_gradient(&self, zs: &[f64], ys: &[u8]) -> (f64, MlpGradient) {
        let n = ys.len();
        let d = self.input;
        let mut grad = MlpGradient {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.hidden],
            w2: vec![0.0; self.hidden],
            b2: 0.0,
        };
        let mut h = vec![0.0; self.hidden];
        let mut total = 0.0;
        for (row, &y) in zs.chunks_exact(d).zip(ys) {
            self.hidden_activations(row, &mut h);
            let p = sigmoid(self.w2.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>() + self.b2);
            let pc = p.clamp(1e-12, 1.0 - 1e-12);
            total -= if y != 0 { pc.ln() } else { (1.0 - pc).ln() };
            let delta_out = p - y as f64;
            grad.b2 += delta_out;
            for j in 0..self.hidden {
                grad.w2[j] += delta_out * h[j];
                let delta_h = delta_out * self.w2[j] * (1.0 - h[j] * h[j]);
                grad.b1[j] += delta_h;
                for (g, x) in grad.w1[j * d..(j + 1) * d].iter_mut().zip(row) {
                    *g += delta_h * x;
                }
            }
        }
        let scale = 1.0 / n as f64;
        for g in grad
            .w1
            .iter_mut()
            .chain(&mut grad.b1)
            .chain(&mut grad.w2)
        {
            *g *= scale;
        }
        grad.b2 *= scale;
        (total * scale, grad)
    }

    /// Full-batch gradient descent with momentum on prepared data.
    pub fn fit(&mut self, zs: &[f64], ys: &[u8], config: &MlpConfig) {
        let mut vel = MlpGradient {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.hidden],
            w2: vec![0.0; self.hidden],
            b2: 0.0,
        };
        let mut prev_loss = f64::INFINITY;
        for _ in 0..config.epochs {
            let (loss, grad) = self.loss_and_gradient(zs, ys);
            if (prev_loss - loss).abs() < config.loss_tol {
                break;
            }
            prev_loss = loss;
            let lr = config.learning_rate;
            let m = config.momentum;
            for ((w, v), g) in self.w1.iter_mut().zip(&mut vel.w1).zip(&grad.w1) {
                *v = m * *v - lr * g;
                *w += *v;
            }
            for ((w, v), g) in self.b1.iter_mut().zip(&mut vel.b1).zip(&grad.b1) {
                *v = m * *v - lr * g;
                *w += *v;
            }
            for ((w, v), g) in self.w2.iter_mut().zip(&mut vel.w2).zip(&grad.w2) {
                *v = m * *v - lr * g;
                *w += *v;
            }
            vel.b2 = m * vel.b2 - lr * grad.b2;
            self.b2 += vel.b2;
        }
    }
}

/// Train with the default 500-epoch configuration.
pub fn train_mlp(matrix: &FeatureMatrix, neurons: usize, seed: u64) -> Result<TrainedModel> {
    train_mlp_with(matrix, &MlpConfig::new(neurons), seed)
}

pub fn train_mlp_with(matrix: &FeatureMatrix, config: &MlpConfig, seed: u64) -> Result<TrainedModel> {
    if config.hidden == 0 {
        return Err(Error::ParamOutOfRange {
            what: "neurons",
            got: "0".into(),
            allowed: ">= 1",
        });
    }
    if matrix.nrows() == 0 {
        return Err(Error::EmptyInput("training matrix"));
    }
    let standardizer = Standardizer::fit(matrix);
    let zs = standardizer.transform(matrix);
    let mut net = MlpModel::init(matrix.ncols(), config.hidden, seed);
    net.fit(&zs, matrix.labels(), config);
    if !net.w1.iter().all(|w| w.is_finite())
        || !net.w2.iter().all(|w| w.is_finite())
        || !net.b2.is_finite()
    {
        return Err(Error::Numeric("MLP training diverged".into()));
    }
    Ok(TrainedModel {
        kind: super::ModelKind::Mlp(net),
        feature_names: matrix.names().to_vec(),
        standardizer,
    })
}

/// Posterior score in (0, 1) for a standardized row.
pub fn score_mlp(model: &MlpModel, z: &[f64]) -> f64 {
    model.forward(z)
}

impl MlpModel {
    pub(super) fn to_payload(&self) -> serde_json::Value {
        json!({
            "input": self.input,
            "hidden": self.hidden,
            "w1": super::floats_to_b64(&self.w1),
            "b1": super::floats_to_b64(&self.b1),
            "w2": super::floats_to_b64(&self.w2),
            "b2": self.b2,
        })
    }

    pub(super) fn from_payload(payload: &serde_json::Value) -> Result<MlpModel> {
        let input = payload_usize(payload, "input")?;
        let hidden = payload_usize(payload, "hidden")?;
        let model = MlpModel {
            input,
            hidden,
            w1: payload_floats(payload, "w1")?,
            b1: payload_floats(payload, "b1")?,
            w2: payload_floats(payload, "w2")?,
            b2: payload_f64(payload, "b2")?,
        };
        if model.w1.len() != input * hidden || model.b1.len() != hidden || model.w2.len() != hidden
        {
            return Err(Error::Format {
                format: "model JSON",
                msg: "MLP payload dimensions inconsistent".into(),
            });
        }
        Ok(model)
    }
}
