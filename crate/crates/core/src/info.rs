//! Histogram-based information estimators and greedy feature selection.
//!
//! All quantities are plug-in estimates in bits from equal-width histograms
//! (50 bins per feature dimension by default); the class variable enters
//! with one cell per label value.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub const DEFAULT_BINS: usize = 50;

/// A feature column discretized into equal-width bins.
#[derive(Debug, Clone)]
pub struct QuantizedColumn {
    pub bin_indices: Vec<u16>,
    pub bins: usize,
    pub edges: Vec<f64>,
}

/// Equal-width quantization over `[min, max]`; the maximum value lands in
/// the last bin, a constant column collapses into bin 0.
pub fn quantize(column: &[f64], bins: usize) -> Result<QuantizedColumn> {
    if column.is_empty() {
        return Err(Error::EmptyInput("column to quantize"));
    }
    if bins < 2 || bins > u16::MAX as usize {
        return Err(Error::ParamOutOfRange {
            what: "bins",
            got: bins.to_string(),
            allowed: "2..=65535",
        });
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in column".into()));
    }
    let min = column.iter().copied().fold(f64::INFINITY, f64::min);
    let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if max > min { (max - min) / bins as f64 } else { 1.0 };
    let bin_indices = column
        .iter()
        .map(|&v| (((v - min) / width) as usize).min(bins - 1) as u16)
        .collect();
    let edges = (0..=bins).map(|i| min + i as f64 * width).collect();
    Ok(QuantizedColumn {
        bin_indices,
        bins,
        edges,
    })
}

fn class_count(labels: &[u8]) -> usize {
    labels.iter().copied().max().unwrap_or(0) as usize + 1
}

fn entropy_from_counts(counts: &[u32], n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Plug-in class entropy in bits, `H(C) = -sum p(c) log2 p(c)`.
pub fn entropy(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("labels"));
    }
    let mut counts = vec![0u32; class_count(labels)];
    for &c in labels {
        counts[c as usize] += 1;
    }
    Ok(entropy_from_counts(&counts, labels.len()))
}

/// Plug-in mutual information in bits between two discrete sequences.
pub(crate) fn mi_discrete(xs: &[usize], nx: usize, ys: &[u8]) -> f64 {
    let ny = class_count(ys);
    let n = ys.len() as f64;
    let mut joint = vec![0u32; nx * ny];
    let mut mx = vec![0u32; nx];
    let mut my = vec![0u32; ny];
    for (&x, &y) in xs.iter().zip(ys) {
        joint[x * ny + y as usize] += 1;
        mx[x] += 1;
        my[y as usize] += 1;
    }
    let mut mi = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let c = joint[x * ny + y];
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy * n * n / (mx[x] as f64 * my[y] as f64)).log2();
            }
        }
    }
    mi
}

/// `I(X; C)` in bits: the discrimination power of one feature.
pub fn mutual_information(x: &QuantizedColumn, labels: &[u8]) -> Result<f64> {
    if x.bin_indices.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "feature vs labels",
            left: x.bin_indices.len(),
            right: labels.len(),
        });
    }
    let xs: Vec<usize> = x.bin_indices.iter().map(|&b| b as usize).collect();
    Ok(mi_discrete(&xs, x.bins, labels))
}

struct TripleHistogram {
    counts: Vec<u32>,
    bx: usize,
    by: usize,
    nc: usize,
    n: usize,
}

impl TripleHistogram {
    fn build(x: &QuantizedColumn, y: &QuantizedColumn, labels: &[u8]) -> Result<Self> {
        if x.bin_indices.len() != y.bin_indices.len() {
            return Err(Error::LengthMismatch {
                what: "x vs y",
                left: x.bin_indices.len(),
                right: y.bin_indices.len(),
            });
        }
        if x.bin_indices.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "features vs labels",
                left: x.bin_indices.len(),
                right: labels.len(),
            });
        }
        let (bx, by, nc) = (x.bins, y.bins, class_count(labels));
        let mut counts = vec![0u32; bx * by * nc];
        for ((&xi, &yi), &c) in x.bin_indices.iter().zip(&y.bin_indices).zip(labels) {
            counts[(xi as usize * by + yi as usize) * nc + c as usize] += 1;
        }
        Ok(Self {
            counts,
            bx,
            by,
            nc,
            n: labels.len(),
        })
    }

    fn at(&self, x: usize, y: usize, c: usize) -> u32 {
        self.counts[(x * self.by + y) * self.nc + c]
    }
}

/// Three-way interaction `I(X; Y; C)` in bits from the triple histogram.
/// Positive values mean redundancy between the features, negative synergy.
pub fn interaction(x: &QuantizedColumn, y: &QuantizedColumn, labels: &[u8]) -> Result<f64> {
    let h = TripleHistogram::build(x, y, labels)?;
    let (bx, by, nc) = (h.bx, h.by, h.nc);
    let mut pxy = vec![0u64; bx * by];
    let mut pxc = vec![0u64; bx * nc];
    let mut pyc = vec![0u64; by * nc];
    let mut px = vec![0u64; bx];
    let mut py = vec![0u64; by];
    let mut pc = vec![0u64; nc];
    for xi in 0..bx {
        for yi in 0..by {
            for c in 0..nc {
                let v = h.at(xi, yi, c) as u64;
                pxy[xi * by + yi] += v;
                pxc[xi * nc + c] += v;
                pyc[yi * nc + c] += v;
                px[xi] += v;
                py[yi] += v;
                pc[c] += v;
            }
        }
    }
    let n = h.n as f64;
    let mut sum = 0.0;
    for xi in 0..bx {
        for yi in 0..by {
            for c in 0..nc {
                let v = h.at(xi, yi, c);
                if v == 0 {
                    continue;
                }
                let pxyc = v as f64 / n;
                let num = (pxy[xi * by + yi] as f64 / n)
                    * (pxc[xi * nc + c] as f64 / n)
                    * (pyc[yi * nc + c] as f64 / n);
                let den = pxyc
                    * (px[xi] as f64 / n)
                    * (py[yi] as f64 / n)
                    * (pc[c] as f64 / n);
                sum += pxyc * (num / den).log2();
            }
        }
    }
    Ok(sum)
}

/// Joint mutual information `I(X, Y; C)` in bits, computed directly from
/// the triple histogram by treating the feature pair as one variable.
#[allow(clippy::needless_range_loop)]
pub fn joint_mi(x: &QuantizedColumn, y: &QuantizedColumn, labels: &[u8]) -> Result<f64> {
    let h = TripleHistogram::build(x, y, labels)?;
    let (bx, by, nc) = (h.bx, h.by, h.nc);
    let mut pair = vec![0u64; bx * by];
    let mut pc = vec![0u64; nc];
    for xi in 0..bx {
        for yi in 0..by {
            for c in 0..nc {
                let v = h.at(xi, yi, c) as u64;
                pair[xi * by + yi] += v;
                pc[c] += v;
            }
        }
    }
    let n = h.n as f64;
    let mut mi = 0.0;
    for xi in 0..bx {
        for yi in 0..by {
            for c in 0..nc {
                let v = h.at(xi, yi, c);
                if v == 0 {
                    continue;
                }
                let pxyc = v as f64 / n;
                mi += pxyc
                    * (pxyc * n * n / (pair[xi * by + yi] as f64 * pc[c] as f64)).log2();
            }
        }
    }
    Ok(mi)
}

/// Decomposition route for the same quantity:
/// `I(X,Y;C) = I(X;C) + I(Y;C) - I(X;Y;C)`.
pub fn joint_mi_decomposed(
    x: &QuantizedColumn,
    y: &QuantizedColumn,
    labels: &[u8],
) -> Result<f64> {
    Ok(mutual_information(x, labels)? + mutual_information(y, labels)?
        - interaction(x, y, labels)?)
}

/// Pairwise information tables normalized by the class entropy, as
/// percentages. Diagonals of both tables carry the intrinsic values.
#[derive(Debug, Clone, Serialize)]
pub struct MiReport {
    pub features: Vec<String>,
    /// `I(X_i; C) / H(C)` in percent.
    pub intrinsic: Vec<f64>,
    /// `I(X_i; X_j; C) / H(C)` in percent; symmetric.
    pub redundancy: Vec<Vec<f64>>,
    /// `I(X_i, X_j; C) / H(C)` in percent.
    pub joint: Vec<Vec<f64>>,
    /// `H(C)` in bits.
    pub class_entropy: f64,
    pub bins: usize,
}

impl MiReport {
    /// Triangular CSV layout: diagonal intrinsic, lower part redundancy,
    /// upper part joint information, one decimal place.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("feature");
        for name in &self.features {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.features.len() {
            out.push_str(&self.features[i]);
            for j in 0..self.features.len() {
                let v = match i.cmp(&j) {
                    std::cmp::Ordering::Equal => self.intrinsic[i],
                    std::cmp::Ordering::Greater => self.redundancy[i][j],
                    std::cmp::Ordering::Less => self.joint[i][j],
                };
                out.push_str(&format!(",{v:.1}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Pairwise report over a feature subset; quantization edges come from the
/// matrix being analyzed.
pub fn build_report(matrix: &FeatureMatrix, subset: &[String], bins: usize) -> Result<MiReport> {
    let class_entropy = entropy(matrix.labels())?;
    if class_entropy == 0.0 {
        return Err(Error::SingleClass);
    }
    let indices: Vec<usize> = subset
        .iter()
        .map(|name| matrix.column_index(name))
        .collect::<Result<_>>()?;
    let quantized: Vec<QuantizedColumn> = indices
        .iter()
        .map(|&j| quantize(&matrix.column(j), bins))
        .collect::<Result<_>>()?;
    let scale = 100.0 / class_entropy;
    let m = quantized.len();
    let intrinsic: Vec<f64> = quantized
        .iter()
        .map(|q| mutual_information(q, matrix.labels()).map(|v| v * scale))
        .collect::<Result<_>>()?;
    let mut redundancy = vec![vec![0.0; m]; m];
    let mut joint = vec![vec![0.0; m]; m];
    for i in 0..m {
        redundancy[i][i] = intrinsic[i];
        joint[i][i] = intrinsic[i];
        for j in i + 1..m {
            let red = interaction(&quantized[i], &quantized[j], matrix.labels())? * scale;
            let jnt = joint_mi(&quantized[i], &quantized[j], matrix.labels())? * scale;
            redundancy[i][j] = red;
            redundancy[j][i] = red;
            joint[i][j] = jnt;
            joint[j][i] = jnt;
        }
    }
    Ok(MiReport {
        features: subset.to_vec(),
        intrinsic,
        redundancy,
        joint,
        class_entropy,
        bins,
    })
}

/// Greedy forward selection outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    /// Selected feature names, best first.
    pub order: Vec<String>,
    /// Objective value (bits) of each pick:
    /// `I(X;C) - max_j I(X;Y_j;C)` over the already selected set.
    pub scores: Vec<f64>,
    /// Column indices of `order` in the source matrix.
    pub indices: Vec<usize>,
    /// Pairwise report restricted to the selected features, in rank order.
    pub report: MiReport,
}

impl SelectionResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("selection serializes")
    }
}

/// Greedy forward selection: each step takes the candidate maximizing
/// intrinsic information minus its worst pairwise redundancy with the
/// already selected set; the first pick maximizes intrinsic information
/// alone and ties break toward the lowest column index.
pub fn select_features(matrix: &FeatureMatrix, k: usize, bins: usize) -> Result<SelectionResult> {
    let ncols = matrix.ncols();
    if k == 0 || k > ncols {
        return Err(Error::ParamOutOfRange {
            what: "selection_k",
            got: k.to_string(),
            allowed: "1..=ncols",
        });
    }
    if entropy(matrix.labels())? == 0.0 {
        return Err(Error::SingleClass);
    }
    let quantized: Vec<QuantizedColumn> = (0..ncols)
        .map(|j| quantize(&matrix.column(j), bins))
        .collect::<Result<_>>()?;
    let intrinsic: Vec<f64> = quantized
        .iter()
        .map(|q| mutual_information(q, matrix.labels()))
        .collect::<Result<_>>()?;

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..ncols).collect();
    // running max of I(X_i; Y_j; C) over the selected Y_j, per candidate
    let mut max_red = vec![f64::NEG_INFINITY; ncols];

    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for &i in &remaining {
            let score = if selected.is_empty() {
                intrinsic[i]
            } else {
                intrinsic[i] - max_red[i]
            };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let (pick, score) = best.expect("remaining nonempty");
        selected.push(pick);
        scores.push(score);
        remaining.retain(|&i| i != pick);
        for &i in &remaining {
            let red = interaction(&quantized[i], &quantized[pick], matrix.labels())?;
            if red > max_red[i] {
                max_red[i] = red;
            }
        }
    }

    let order: Vec<String> = selected
        .iter()
        .map(|&j| matrix.names()[j].clone())
        .collect();
    let report = build_report(matrix, &order, bins)?;
    Ok(SelectionResult {
        order,
        scores,
        indices: selected,
        report,
    })
}
