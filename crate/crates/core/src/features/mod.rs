//! Per-frame descriptor bank: 35 base features (spectral shape, noise
//! measures, prosody) plus first and second derivatives, 105 columns total.

mod mfcc;
mod noise;
mod prosody;
mod spectral;

pub use mfcc::MelFilterbank;
pub use spectral::spectral_shape;

use rustfft::{num_complex::Complex, Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::labels::LabelTrack;
use crate::signal::{self, AudioBuffer, FFT_SIZE, FRAME_LEN, HOP, SPECTRUM_LEN};

/// Bump when the registry order or any feature definition changes.
pub const REGISTRY_VERSION: u32 = 1;

/// Number of base descriptors; the full vector is three times this.
pub const BASE_DIM: usize = 35;
pub const FULL_DIM: usize = 3 * BASE_DIM;

/// Frozen registry order of the base descriptors.
pub const BASE_FEATURES: [&str; BASE_DIM] = [
    "mfcc0", "mfcc1", "mfcc2", "mfcc3", "mfcc4", "mfcc5", "mfcc6", "mfcc7", "mfcc8", "mfcc9",
    "mfcc10", "mfcc11", "mfcc12", "centroid", "spread", "decrease", "variation", "flux", "hnr05",
    "hnr15", "hnr25", "hnr35", "cpp", "flatness_250_500", "flatness_500_1000", "flatness_1000_2000",
    "flatness_2000_4000", "zcr", "chirp_gd", "f0", "loudness", "energy_rms", "energy_log",
    "energy_teager", "energy_0_4000",
];

/// Log floor used everywhere a logarithm is taken.
pub const LOG_FLOOR: f64 = 1e-10;

/// The 105 column names in registry order: base, then `d1_`, then `d2_`.
pub fn feature_names() -> Vec<String> {
    let mut names: Vec<String> = BASE_FEATURES.iter().map(|s| s.to_string()).collect();
    names.extend(BASE_FEATURES.iter().map(|s| format!("d1_{s}")));
    names.extend(BASE_FEATURES.iter().map(|s| format!("d2_{s}")));
    names
}

/// One frame's feature values with their registry names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub names: Vec<String>,
}

/// Per-frame feature rows with binary labels (cough = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    ncols: usize,
    data: Vec<f64>,
    labels: Vec<u8>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>) -> Self {
        let ncols = names.len();
        Self {
            names,
            ncols,
            data: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: &[f64], label: u8) {
        assert_eq!(row.len(), self.ncols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.labels.push(label);
    }

    pub fn nrows(&self) -> usize {
        self.labels.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_vector(&self, i: usize) -> FeatureVector {
        FeatureVector {
            values: self.row(i).to_vec(),
            names: self.names.clone(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows()).map(|i| self.row(i)[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    /// New matrix restricted to the given column indices, keeping their order.
    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let names = cols.iter().map(|&j| self.names[j].clone()).collect();
        let mut out = FeatureMatrix::new(names);
        for i in 0..self.nrows() {
            let row = self.row(i);
            let values: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
            out.push_row(&values, self.labels[i]);
        }
        out
    }

    /// New matrix containing the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix::new(self.names.clone());
        for &i in rows {
            out.push_row(self.row(i), self.labels[i]);
        }
        out
    }

    /// Append another matrix with identical columns.
    pub fn append(&mut self, other: &FeatureMatrix) -> Result<()> {
        if self.names != other.names {
            return Err(Error::Format {
                format: "FeatureMatrix",
                msg: "column names differ between matrices".into(),
            });
        }
        self.data.extend_from_slice(&other.data);
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }

    pub fn with_labels(&self, labels: Vec<u8>) -> FeatureMatrix {
        assert_eq!(labels.len(), self.nrows());
        FeatureMatrix {
            names: self.names.clone(),
            ncols: self.ncols,
            data: self.data.clone(),
            labels,
        }
    }

    // ---- persistence ------------------------------------------------------

    /// CSV with a header of feature names plus a final `label` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.names.join(","));
        out.push_str(",label\n");
        for i in 0..self.nrows() {
            for v in self.row(i) {
                out.push_str(&format!("{v:?},"));
            }
            out.push_str(&format!("{}\n", self.labels[i]));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<FeatureMatrix> {
        let bad = |msg: String| Error::Format {
            format: "feature CSV",
            msg,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let mut names: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
        if names.last().map(|s| s.as_str()) != Some("label") {
            return Err(bad("last header column must be `label`".into()));
        }
        names.pop();
        let mut matrix = FeatureMatrix::new(names);
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != matrix.ncols + 1 {
                return Err(bad(format!(
                    "row {}: expected {} fields, got {}",
                    idx + 2,
                    matrix.ncols + 1,
                    fields.len()
                )));
            }
            let values: Vec<f64> = fields[..matrix.ncols]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", idx + 2)))?;
            let label: u8 = fields[matrix.ncols]
                .parse()
                .map_err(|e| bad(format!("row {}: bad label: {e}", idx + 2)))?;
            matrix.push_row(&values, label);
        }
        Ok(matrix)
    }

    /// Binary form: magic `FMX1`, u32 rows, u32 cols, name table
    /// (u16 length + UTF-8 per name), f64 little-endian row-major data,
    /// then one u8 label per row.
    pub fn to_fmx(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"FMX1");
        out.extend_from_slice(&(self.nrows() as u32).to_le_bytes());
        out.extend_from_slice(&(self.ncols as u32).to_le_bytes());
        for name in &self.names {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.labels);
        out
    }

    pub fn from_fmx(bytes: &[u8]) -> Result<FeatureMatrix> {
        let bad = |msg: String| Error::Format {
            format: "FMX1",
            msg,
        };
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > bytes.len() {
                return Err(bad("truncated file".into()));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        let mut pos = 0;
        if take(&mut pos, 4)? != b"FMX1" {
            return Err(bad("bad magic".into()));
        }
        let rows = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let mut names = Vec::with_capacity(cols);
        for _ in 0..cols {
            let len = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap()) as usize;
            let name = std::str::from_utf8(take(&mut pos, len)?)
                .map_err(|e| bad(format!("name not UTF-8: {e}")))?;
            names.push(name.to_string());
        }
        let mut matrix = FeatureMatrix::new(names);
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
        }
        let labels = take(&mut pos, rows)?.to_vec();
        if pos != bytes.len() {
            return Err(bad(format!("{} trailing bytes", bytes.len() - pos)));
        }
        matrix.data = data;
        matrix.labels = labels;
        Ok(matrix)
    }

    pub fn write_fmx(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_fmx())?;
        Ok(())
    }

    pub fn read_fmx(path: impl AsRef<std::path::Path>) -> Result<FeatureMatrix> {
        Self::from_fmx(&std::fs::read(path)?)
    }
}

/// FFT length for the cepstral and phase analyses; long enough to resolve
/// quefrencies down to 50 Hz pitch.
pub(crate) const CEPSTRUM_FFT: usize = 1024;

/// Reusable extraction state: FFT plans, mel filterbank, analysis window.
pub struct Extractor {
    mel: MelFilterbank,
    window: Vec<f64>,
    fft_long: Arc<dyn Fft<f64>>,
    ifft_long: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Extractor {
    pub fn new() -> Self {
        let mut planner = FftPlanner::new();
        let fft_long = planner.plan_fft_forward(CEPSTRUM_FFT);
        let ifft_long = planner.plan_fft_inverse(CEPSTRUM_FFT);
        let scratch_len = fft_long
            .get_inplace_scratch_len()
            .max(ifft_long.get_inplace_scratch_len());
        Self {
            mel: MelFilterbank::new(26, FFT_SIZE, signal::TARGET_RATE as f64, 0.0, 8000.0),
            window: signal::hanning(FRAME_LEN),
            fft_long,
            ifft_long,
            scratch: vec![Complex::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn mel_filterbank(&self) -> &MelFilterbank {
        &self.mel
    }

    pub(crate) fn window(&self) -> &[f64] {
        &self.window
    }

    pub(crate) fn fft_long(&mut self, buf: &mut [Complex<f64>]) {
        self.fft_long.process_with_scratch(buf, &mut self.scratch);
    }

    pub(crate) fn ifft_long(&mut self, buf: &mut [Complex<f64>]) {
        self.ifft_long.process_with_scratch(buf, &mut self.scratch);
    }

    /// 13 MFCCs (c0 included) from a magnitude spectrum: 26-filter mel bank
    /// on the power spectrum, log energies, orthonormal DCT-II.
    pub fn mfcc(&self, spectrum: &[f64]) -> [f64; 13] {
        mfcc::mfcc_from_energies(&self.mel.energies(spectrum))
    }

    /// HNR (4 bands), CPP, band flatness (4), ZCR, chirp group delay.
    pub fn noise_measures(&mut self, raw_frame: &[f64], spectrum: &[f64]) -> [f64; 11] {
        noise::noise_measures(self, raw_frame, spectrum)
    }

    /// Energy measures, loudness and F0 for one frame. `neighborhood` is the
    /// raw signal from 40 ms before the frame to 40 ms after it, zero-padded
    /// at recording edges.
    pub fn prosody(&self, raw_frame: &[f64], spectrum: &[f64], neighborhood: &[f64]) -> [f64; 7] {
        prosody::prosody(&self.mel, raw_frame, spectrum, neighborhood)
    }

    /// The 35 base descriptors for every frame of one recording.
    /// Labels are all zero; callers attach real labels afterwards.
    pub fn base_features(&mut self, audio: &AudioBuffer) -> Result<FeatureMatrix> {
        let frames = signal::magnitude_spectrum(signal::frame_signal(audio)?);
        let names = BASE_FEATURES.iter().map(|s| s.to_string()).collect();
        let mut matrix = FeatureMatrix::new(names);
        let mut row = [0.0f64; BASE_DIM];
        const PAD: usize = 640; // 40 ms at 16 kHz
        let mut neighborhood = vec![0.0f64; FRAME_LEN + 2 * PAD];
        let mut previous: Option<&Vec<f64>> = None;
        for k in 0..frames.len() {
            let start = frames.frame_start(k);
            let raw = &audio.samples[start..start + FRAME_LEN];
            let spectrum = &frames.spectra[k];

            neighborhood.fill(0.0);
            let lo = start as isize - PAD as isize;
            for (slot, idx) in neighborhood.iter_mut().zip(lo..) {
                if idx >= 0 && (idx as usize) < audio.samples.len() {
                    *slot = audio.samples[idx as usize];
                }
            }

            let c = self.mfcc(spectrum);
            row[..13].copy_from_slice(&c);
            let shape = spectral::spectral_shape(
                spectrum,
                previous.map(|p| p.as_slice()),
                frames.bin_hz(1),
            );
            row[13..18].copy_from_slice(&shape);
            let noise = self.noise_measures(raw, spectrum);
            row[18..29].copy_from_slice(&noise);
            let pros = self.prosody(raw, spectrum, &neighborhood);
            // registry order: f0, loudness, energy_rms, energy_log,
            // energy_teager, energy_0_4000
            row[29] = pros[5]; // f0
            row[30] = pros[4]; // loudness
            row[31] = pros[0]; // energy_rms
            row[32] = pros[1]; // energy_log
            row[33] = pros[2]; // energy_teager
            row[34] = pros[3]; // energy_0_4000

            debug_assert!(row.iter().all(|v| v.is_finite()));
            matrix.push_row(&row, 0);
            previous = Some(&frames.spectra[k]);
        }
        Ok(matrix)
    }
}

impl Default for Extractor {
    fn default() -> Self {
        Self::new()
    }
}

/// First and second derivatives of every column:
/// `d x[t] = (x[t+1] - x[t-1]) / 2` with replicated edges, applied twice.
/// Column order becomes `[base | d1 | d2]`.
pub fn append_derivatives(matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    if matrix.nrows() == 0 {
        return Err(Error::EmptyInput("feature matrix has no rows"));
    }
    let ncols = matrix.ncols();
    let nrows = matrix.nrows();
    let mut names: Vec<String> = matrix.names().to_vec();
    names.extend(matrix.names().iter().map(|n| format!("d1_{n}")));
    names.extend(matrix.names().iter().map(|n| format!("d2_{n}")));

    let mut out = FeatureMatrix::new(names);
    let mut d1 = vec![0.0; nrows * ncols];
    let mut d2 = vec![0.0; nrows * ncols];
    for j in 0..ncols {
        let col: Vec<f64> = matrix.column(j);
        let dcol = central_difference(&col);
        let ddcol = central_difference(&dcol);
        for i in 0..nrows {
            d1[i * ncols + j] = dcol[i];
            d2[i * ncols + j] = ddcol[i];
        }
    }
    let mut row = vec![0.0; 3 * ncols];
    for i in 0..nrows {
        row[..ncols].copy_from_slice(matrix.row(i));
        row[ncols..2 * ncols].copy_from_slice(&d1[i * ncols..(i + 1) * ncols]);
        row[2 * ncols..].copy_from_slice(&d2[i * ncols..(i + 1) * ncols]);
        out.push_row(&row, matrix.labels()[i]);
    }
    Ok(out)
}

fn central_difference(col: &[f64]) -> Vec<f64> {
    let n = col.len();
    (0..n)
        .map(|t| {
            let prev = col[t.saturating_sub(1)];
            let next = col[(t + 1).min(n - 1)];
            (next - prev) / 2.0
        })
        .collect()
}

/// Full pipeline for one recording: 105-column matrix, one row per frame,
/// labeled 1 when the frame center falls inside a cough segment.
pub fn extract_feature_matrix(audio: &AudioBuffer, labels: &LabelTrack) -> Result<FeatureMatrix> {
    let duration = audio.duration();
    for seg in &labels.segments {
        if seg.end > duration + 1e-9 || seg.start >= duration {
            return Err(Error::SegmentOutOfRange {
                start: seg.start,
                end: seg.end,
                duration,
            });
        }
    }
    let mut extractor = Extractor::new();
    let base = extractor.base_features(audio)?;
    let full = append_derivatives(&base)?;
    let frame_labels: Vec<u8> = (0..full.nrows())
        .map(|k| {
            let center = (k * HOP + FRAME_LEN / 2) as f64 / audio.sample_rate as f64;
            labels.contains(center) as u8
        })
        .collect();
    Ok(full.with_labels(frame_labels))
}

/// Spectrum bin count sanity shared by the submodules.
pub(crate) fn check_spectrum_len(spectrum: &[f64]) {
    debug_assert_eq!(spectrum.len(), SPECTRUM_LEN);
}
