//! Flat key=value run configuration with lossless round-tripping.

use std::fmt::Write as _;
use std::str::FromStr;

use coughdet_core::classifiers::ClassifierSpec;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Gmm,
    Mlp,
    Svm,
}

impl FromStr for Classifier {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gmm" => Ok(Classifier::Gmm),
            "mlp" => Ok(Classifier::Mlp),
            "svm" => Ok(Classifier::Svm),
            other => Err(format!("unknown classifier '{other}' (gmm, mlp or svm)")),
        }
    }
}

impl std::fmt::Display for Classifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classifier::Gmm => "gmm",
            Classifier::Mlp => "mlp",
            Classifier::Svm => "svm",
        })
    }
}

/// Everything a full pipeline run needs; the file form is one `key=value`
/// per line with `#` comments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub window_ms: u32,
    pub hop_ms: u32,
    pub sample_rate: u32,
    pub bins: usize,
    pub folds: usize,
    pub selection_k: usize,
    pub classifier: Classifier,
    pub gaussians: usize,
    pub neurons: usize,
    pub cbox: f64,
    /// `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    pub seed: u64,
    pub w_tpr: f64,
    pub w_fpr: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            window_ms: 25,
            hop_ms: 10,
            sample_rate: 16_000,
            bins: 50,
            folds: 10,
            selection_k: 20,
            classifier: Classifier::Gmm,
            gaussians: 16,
            neurons: 64,
            cbox: 10.0,
            gamma: None,
            seed: 42,
            w_tpr: 1.0,
            w_fpr: 1.0,
        }
    }
}

impl RunConfig {
    pub fn classifier_spec(&self) -> ClassifierSpec {
        match self.classifier {
            Classifier::Gmm => ClassifierSpec::Gmm {
                gaussians: self.gaussians,
            },
            Classifier::Mlp => ClassifierSpec::Mlp {
                neurons: self.neurons,
            },
            Classifier::Svm => ClassifierSpec::Svm {
                cbox: self.cbox,
                gamma: self.gamma,
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.window_ms != 25 || self.hop_ms != 10 || self.sample_rate != 16_000 {
            return Err(format!(
                "frontend is fixed at window_ms=25 hop_ms=10 sample_rate=16000, got {}/{}/{}",
                self.window_ms, self.hop_ms, self.sample_rate
            ));
        }
        if self.bins < 2 {
            return Err("bins must be at least 2".into());
        }
        if self.folds < 2 {
            return Err("folds must be at least 2".into());
        }
        if self.selection_k == 0 || self.selection_k > 105 {
            return Err(format!(
                "selection_k must be in 1..=105, got {}",
                self.selection_k
            ));
        }
        if self.gaussians == 0 || self.neurons == 0 {
            return Err("gaussians and neurons must be positive".into());
        }
        if self.cbox <= 0.0 {
            return Err("cbox must be positive".into());
        }
        if let Some(g) = self.gamma {
            if g <= 0.0 {
                return Err("gamma must be positive".into());
            }
        }
        if self.w_tpr <= 0.0 || self.w_fpr <= 0.0 {
            return Err("w_tpr and w_fpr must be positive".into());
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# coughdet run configuration\n");
        writeln!(out, "window_ms={}", self.window_ms).unwrap();
        writeln!(out, "hop_ms={}", self.hop_ms).unwrap();
        writeln!(out, "sample_rate={}", self.sample_rate).unwrap();
        writeln!(out, "bins={}", self.bins).unwrap();
        writeln!(out, "folds={}", self.folds).unwrap();
        writeln!(out, "selection_k={}", self.selection_k).unwrap();
        writeln!(out, "classifier={}", self.classifier).unwrap();
        writeln!(out, "gaussians={}", self.gaussians).unwrap();
        writeln!(out, "neurons={}", self.neurons).unwrap();
        writeln!(out, "cbox={:?}", self.cbox).unwrap();
        match self.gamma {
            Some(g) => writeln!(out, "gamma={g:?}").unwrap(),
            None => writeln!(out, "gamma=auto").unwrap(),
        }
        writeln!(out, "seed={}", self.seed).unwrap();
        writeln!(out, "w_tpr={:?}", self.w_tpr).unwrap();
        writeln!(out, "w_fpr={:?}", self.w_fpr).unwrap();
        out
    }

    pub fn from_text(text: &str) -> Result<RunConfig, String> {
        let mut config = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", idx + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let parse_err = |e: String| format!("line {}: {key}: {e}", idx + 1);
            let int = |v: &str| v.parse::<u64>().map_err(|e| parse_err(e.to_string()));
            let float = |v: &str| v.parse::<f64>().map_err(|e| parse_err(e.to_string()));
            match key {
                "window_ms" => config.window_ms = int(value)? as u32,
                "hop_ms" => config.hop_ms = int(value)? as u32,
                "sample_rate" => config.sample_rate = int(value)? as u32,
                "bins" => config.bins = int(value)? as usize,
                "folds" => config.folds = int(value)? as usize,
                "selection_k" => config.selection_k = int(value)? as usize,
                "classifier" => config.classifier = value.parse().map_err(parse_err)?,
                "gaussians" => config.gaussians = int(value)? as usize,
                "neurons" => config.neurons = int(value)? as usize,
                "cbox" => config.cbox = float(value)?,
                "gamma" => {
                    config.gamma = if value == "auto" {
                        None
                    } else {
                        Some(float(value)?)
                    }
                }
                "seed" => config.seed = int(value)?,
                "w_tpr" => config.w_tpr = float(value)?,
                "w_fpr" => config.w_fpr = float(value)?,
                other => return Err(format!("line {}: unknown key '{other}'", idx + 1)),
            }
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_lossless() {
        let config = RunConfig {
            bins: 32,
            folds: 5,
            selection_k: 14,
            classifier: Classifier::Svm,
            gamma: Some(0.034),
            cbox: 2.5,
            seed: 99,
            w_tpr: 2.0,
            w_fpr: 0.5,
            ..RunConfig::default()
        };
        let text = config.to_text();
        let back = RunConfig::from_text(&text).unwrap();
        assert_eq!(config, back);
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn defaults_validate() {
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_text("bogus=1").is_err());
        assert!(RunConfig::from_text("folds=ten").is_err());
        let config = RunConfig {
            selection_k: 106,
            ..RunConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn gamma_auto_roundtrips() {
        let config = RunConfig::default();
        assert!(config.gamma.is_none());
        let back = RunConfig::from_text(&config.to_text()).unwrap();
        assert!(back.gamma.is_none());
    }
}
