//! Browser demo bindings: synthesize a labeled recording, inspect the
//! mutual-information feature ranking, and run a small cross-validation,
//! all in the page. The heavy lifting stays in the core crate; everything
//! crosses the boundary as JSON strings or raw sample buffers.

use wasm_bindgen::prelude::*;

use coughdet_core::classifiers::ClassifierSpec;
use coughdet_core::eval::{cross_validate, EvalConfig};
use coughdet_core::features::{extract_feature_matrix, FeatureMatrix};
use coughdet_core::info::select_features;
use coughdet_core::labels::LabelTrack;
use coughdet_core::signal::AudioBuffer;
use coughdet_core::synth::{synth_dataset, SynthSpec};

/// One synthesized recording with its extracted feature matrix, kept alive
/// across calls so ranking and evaluation reuse the extraction work.
#[wasm_bindgen]
pub struct DemoSession {
    audio: AudioBuffer,
    track: LabelTrack,
    matrix: FeatureMatrix,
}

impl DemoSession {
    fn build(
        seed: u32,
        duration_s: f64,
        coughs_per_min: f64,
        distractors_per_min: f64,
        noise_db: f64,
    ) -> Result<DemoSession, String> {
        let spec = SynthSpec {
            duration: duration_s,
            coughs_per_minute: coughs_per_min,
            distractors_per_minute: distractors_per_min,
            noise_db,
            seed: seed as u64,
        };
        let (audio, track) = synth_dataset(&spec).map_err(|e| e.to_string())?;
        let matrix = extract_feature_matrix(&audio, &track).map_err(|e| e.to_string())?;
        Ok(DemoSession {
            audio,
            track,
            matrix,
        })
    }
}

#[wasm_bindgen]
impl DemoSession {
    /// Synthesize a recording and extract its 105-column feature matrix.
    #[wasm_bindgen(constructor)]
    pub fn new(
        seed: u32,
        duration_s: f64,
        coughs_per_min: f64,
        distractors_per_min: f64,
        noise_db: f64,
    ) -> Result<DemoSession, JsError> {
        Self::build(seed, duration_s, coughs_per_min, distractors_per_min, noise_db)
            .map_err(|e| JsError::new(&e))
    }

    pub fn sample_rate(&self) -> u32 {
        self.audio.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.audio.duration()
    }

    /// Raw samples for WebAudio playback.
    pub fn samples(&self) -> Vec<f32> {
        self.audio.samples.iter().map(|&s| s as f32).collect()
    }

    /// Min/max waveform envelope in `buckets` columns plus the labeled
    /// cough segments: `{duration, envelope: [[min,max],..], segments}`.
    pub fn waveform_json(&self, buckets: usize) -> String {
        let n = self.audio.samples.len();
        let buckets = buckets.clamp(16, n.max(16));
        let per = (n as f64 / buckets as f64).max(1.0);
        let mut envelope = Vec::with_capacity(buckets);
        for b in 0..buckets {
            let lo = (b as f64 * per) as usize;
            let hi = (((b + 1) as f64 * per) as usize).min(n);
            let window = &self.audio.samples[lo..hi.max(lo + 1)];
            let min = window.iter().copied().fold(f64::INFINITY, f64::min);
            let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            envelope.push(serde_json::json!([min, max]));
        }
        let segments: Vec<serde_json::Value> = self
            .track
            .segments
            .iter()
            .map(|s| serde_json::json!({"start": s.start, "end": s.end}))
            .collect();
        serde_json::json!({
            "duration": self.audio.duration(),
            "frames": self.matrix.nrows(),
            "cough_frames": self.matrix.labels().iter().filter(|&&l| l != 0).count(),
            "envelope": envelope,
            "segments": segments,
        })
        .to_string()
    }

    /// Greedy forward selection of `k` features:
    /// `{order:[{name, score_bits, intrinsic_pct}], class_entropy_bits}`.
    pub fn rank_features(&self, k: usize, bins: usize) -> Result<String, JsError> {
        self.rank_features_impl(k, bins).map_err(|e| JsError::new(&e))
    }

    /// Cross-validation with per-fold selection; returns the pooled ROC
    /// and summary metrics:
    /// `{rer, rer_threshold, tpr, fpr, auc, points:[[fpr,tpr],..], per_fold}`.
    pub fn evaluate(
        &self,
        classifier: &str,
        selection_k: usize,
        complexity: usize,
        folds: usize,
        seed: u32,
    ) -> Result<String, JsError> {
        self.evaluate_impl(classifier, selection_k, complexity, folds, seed)
            .map_err(|e| JsError::new(&e))
    }
}

impl DemoSession {
    fn rank_features_impl(&self, k: usize, bins: usize) -> Result<String, String> {
        let selection = select_features(&self.matrix, k.min(self.matrix.ncols()), bins)
            .map_err(|e| e.to_string())?;
        let order: Vec<serde_json::Value> = selection
            .order
            .iter()
            .zip(&selection.scores)
            .zip(&selection.report.intrinsic)
            .map(|((name, score), intrinsic)| {
                serde_json::json!({
                    "name": name,
                    "score_bits": score,
                    "intrinsic_pct": intrinsic,
                })
            })
            .collect();
        Ok(serde_json::json!({
            "order": order,
            "class_entropy_bits": selection.report.class_entropy,
        })
        .to_string())
    }

    fn evaluate_impl(
        &self,
        classifier: &str,
        selection_k: usize,
        complexity: usize,
        folds: usize,
        seed: u32,
    ) -> Result<String, String> {
        let spec = match classifier {
            "gmm" => ClassifierSpec::Gmm {
                gaussians: complexity.max(1),
            },
            "mlp" => ClassifierSpec::Mlp {
                neurons: complexity.max(1),
            },
            "svm" => ClassifierSpec::Svm {
                cbox: 10.0,
                gamma: None,
            },
            other => return Err(format!("unknown classifier '{other}' (gmm, mlp or svm)")),
        };
        let config = EvalConfig {
            folds,
            selection_k: Some(selection_k.min(self.matrix.ncols())),
            seed: seed as u64,
            ..EvalConfig::default()
        };
        let cv = cross_validate(&self.matrix, &spec, &config).map_err(|e| e.to_string())?;
        let points: Vec<serde_json::Value> = cv
            .curve
            .points
            .iter()
            .map(|p| serde_json::json!([p.fpr, p.tpr]))
            .collect();
        let per_fold: Vec<serde_json::Value> = cv
            .per_fold
            .iter()
            .map(|f| {
                serde_json::json!({
                    "fold": f.fold,
                    "rer": f.rer,
                    "auc": f.auc,
                    "selected": f.selected,
                })
            })
            .collect();
        Ok(serde_json::json!({
            "rer": cv.curve.rer,
            "rer_threshold": cv.curve.rer_threshold,
            "tpr": cv.curve.tpr,
            "fpr": cv.curve.fpr,
            "auc": cv.curve.auc,
            "points": points,
            "per_fold": per_fold,
        })
        .to_string())
    }
}
