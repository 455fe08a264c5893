//! Frame classifiers with a uniform continuous-score contract: higher
//! scores mean more cough-like. GMM scores are class log-likelihood ratios,
//! MLP scores posteriors, SVM scores kernel decision values.

mod gmm;
mod kmeans;
mod mlp;
mod svm;

pub use gmm::{fit_mixture, score_gmm, train_gmm, GmmClass, GmmModel, VAR_FLOOR};
pub use kmeans::kmeans;
pub use mlp::{score_mlp, train_mlp, train_mlp_with, MlpConfig, MlpGradient, MlpModel};
pub use svm::{score_svm, train_svm, SvmModel, KKT_TOL};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Per-feature mean/standard deviation computed on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Floor applied to the per-feature standard deviation so constant
/// features stay harmless.
pub const STD_FLOOR: f64 = 1e-8;

impl Standardizer {
    pub fn fit(matrix: &FeatureMatrix) -> Standardizer {
        let n = matrix.nrows().max(1) as f64;
        let d = matrix.ncols();
        let mut mean = vec![0.0; d];
        for i in 0..matrix.nrows() {
            for (m, v) in mean.iter_mut().zip(matrix.row(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for i in 0..matrix.nrows() {
            for (j, v) in matrix.row(i).iter().enumerate() {
                let diff = v - mean[j];
                var[j] += diff * diff;
            }
        }
        let std = var
            .iter()
            .map(|&v| (v / n).sqrt().max(STD_FLOOR))
            .collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Standardize every row into one flat row-major buffer.
    pub fn transform(&self, matrix: &FeatureMatrix) -> Vec<f64> {
        let mut out = Vec::with_capacity(matrix.nrows() * matrix.ncols());
        for i in 0..matrix.nrows() {
            for (v, (m, s)) in matrix.row(i).iter().zip(self.mean.iter().zip(&self.std)) {
                out.push((v - m) / s);
            }
        }
        out
    }
}

/// Hyperparameter choice for one of the three classifiers.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    Gmm { gaussians: usize },
    Mlp { neurons: usize },
    Svm { cbox: f64, gamma: Option<f64> },
}

impl ClassifierSpec {
    pub fn train(&self, matrix: &FeatureMatrix, seed: u64) -> Result<TrainedModel> {
        match *self {
            ClassifierSpec::Gmm { gaussians } => train_gmm(matrix, gaussians, seed),
            ClassifierSpec::Mlp { neurons } => train_mlp(matrix, neurons, seed),
            ClassifierSpec::Svm { cbox, gamma } => train_svm(matrix, cbox, gamma, seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Gmm { .. } => "gmm",
            ClassifierSpec::Mlp { .. } => "mlp",
            ClassifierSpec::Svm { .. } => "svm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Gmm(GmmModel),
    Mlp(MlpModel),
    Svm(SvmModel),
}

/// A trained classifier plus everything needed to score raw feature rows:
/// the feature-name contract and the training-fold standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
}

impl TrainedModel {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Gmm(_) => "gmm",
            ModelKind::Mlp(_) => "mlp",
            ModelKind::Svm(_) => "svm",
        }
    }

    /// Score one raw (unstandardized) feature row.
    pub fn score_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_names.len() {
            return Err(Error::LengthMismatch {
                what: "feature row vs model",
                left: row.len(),
                right: self.feature_names.len(),
            });
        }
        let z = self.standardizer.apply(row);
        Ok(match &self.kind {
            ModelKind::Gmm(m) => score_gmm(m, &z),
            ModelKind::Mlp(m) => score_mlp(m, &z),
            ModelKind::Svm(m) => score_svm(m, &z),
        })
    }

    /// Score every row of a matrix whose columns must match the model's
    /// feature names exactly.
    pub fn score_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        if matrix.names() != self.feature_names.as_slice() {
            return Err(Error::FeatureNameMismatch {
                expected: self.feature_names.len(),
                first_expected: self
                    .feature_names
                    .first()
                    .cloned()
                    .unwrap_or_default(),
                got: matrix.ncols(),
            });
        }
        (0..matrix.nrows())
            .map(|i| self.score_row(matrix.row(i)))
            .collect()
    }
}

// ---- serialization ----------------------------------------------------------

pub(crate) fn floats_to_b64(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    BASE64.encode(bytes)
}

pub(crate) fn b64_to_floats(text: &str) -> Result<Vec<f64>> {
    let bytes = BASE64.decode(text).map_err(|e| Error::Format {
        format: "model JSON",
        msg: format!("bad base64: {e}"),
    })?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format {
            format: "model JSON",
            msg: "array byte length not a multiple of 8".into(),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    #[serde(rename = "type")]
    kind: String,
    version: u32,
    feature_names: Vec<String>,
    standardization: StandardizationJson,
    payload: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct StandardizationJson {
    mean: String,
    std: String,
}

const MODEL_VERSION: u32 = 1;

impl TrainedModel {
    pub fn to_json(&self) -> String {
        let payload = match &self.kind {
            ModelKind::Gmm(m) => m.to_payload(),
            ModelKind::Mlp(m) => m.to_payload(),
            ModelKind::Svm(m) => m.to_payload(),
        };
        let envelope = Envelope {
            kind: self.kind_name().to_string(),
            version: MODEL_VERSION,
            feature_names: self.feature_names.clone(),
            standardization: StandardizationJson {
                mean: floats_to_b64(&self.standardizer.mean),
                std: floats_to_b64(&self.standardizer.std),
            },
            payload,
        };
        serde_json::to_string_pretty(&envelope).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let envelope: Envelope = serde_json::from_str(text).map_err(|e| Error::Format {
            format: "model JSON",
            msg: e.to_string(),
        })?;
        if envelope.version != MODEL_VERSION {
            return Err(Error::Format {
                format: "model JSON",
                msg: format!("unsupported version {}", envelope.version),
            });
        }
        let kind = match envelope.kind.as_str() {
            "gmm" => ModelKind::Gmm(GmmModel::from_payload(&envelope.payload)?),
            "mlp" => ModelKind::Mlp(MlpModel::from_payload(&envelope.payload)?),
            "svm" => ModelKind::Svm(SvmModel::from_payload(&envelope.payload)?),
            other => {
                return Err(Error::Format {
                    format: "model JSON",
                    msg: format!("unknown model type '{other}'"),
                })
            }
        };
        Ok(TrainedModel {
            kind,
            feature_names: envelope.feature_names,
            standardizer: Standardizer {
                mean: b64_to_floats(&envelope.standardization.mean)?,
                std: b64_to_floats(&envelope.standardization.std)?,
            },
        })
    }

    pub fn write_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<std::path::Path>) -> Result<TrainedModel> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn payload_field<'v>(
    payload: &'v serde_json::Value,
    field: &str,
) -> Result<&'v serde_json::Value> {
    payload.get(field).ok_or_else(|| Error::Format {
        format: "model JSON",
        msg: format!("payload missing field '{field}'"),
    })
}

pub(crate) fn payload_f64(payload: &serde_json::Value, field: &str) -> Result<f64> {
    payload_field(payload, field)?
        .as_f64()
        .ok_or_else(|| Error::Format {
            format: "model JSON",
            msg: format!("field '{field}' is not a number"),
        })
}

pub(crate) fn payload_usize(payload: &serde_json::Value, field: &str) -> Result<usize> {
    payload_field(payload, field)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::Format {
            format: "model JSON",
            msg: format!("field '{field}' is not an integer"),
        })
}

pub(crate) fn payload_floats(payload: &serde_json::Value, field: &str) -> Result<Vec<f64>> {
    let text = payload_field(payload, field)?
        .as_str()
        .ok_or_else(|| Error::Format {
            format: "model JSON",
            msg: format!("field '{field}' is not a string"),
        })?;
    b64_to_floats(text)
}

/// Split a labeled matrix into standardized per-class flat row buffers.
pub(crate) fn standardized_class_split(
    matrix: &FeatureMatrix,
    standardizer: &Standardizer,
) -> [Vec<f64>; 2] {
    let mut split = [Vec::new(), Vec::new()];
    for i in 0..matrix.nrows() {
        let class = (matrix.labels()[i] != 0) as usize;
        let z = standardizer.apply(matrix.row(i));
        split[class].extend_from_slice(&z);
    }
    split
}

#[cfg(test)]
mod tests;
