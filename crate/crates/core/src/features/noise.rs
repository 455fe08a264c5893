//! Noise measures: band-limited harmonic-to-noise ratios, cepstral peak
//! prominence, band spectral flatness, zero-crossing rate and chirp group
//! delay.

use rustfft::num_complex::Complex;

use super::{Extractor, CEPSTRUM_FFT, LOG_FLOOR};
use crate::signal::TARGET_RATE;

/// Quefrency search range, 50-500 Hz pitch at 16 kHz.
const Q_LO: usize = TARGET_RATE as usize / 500;
const Q_HI: usize = TARGET_RATE as usize / 50;
/// Radius of the evaluation circle for the chirp group delay.
const CHIRP_RHO: f64 = 0.99;

/// Upper band edges for the four HNR measures, Hz.
const HNR_BANDS: [f64; 4] = [500.0, 1500.0, 2500.0, 3500.0];
/// (low, high) edges of the four flatness bands, Hz.
const FLATNESS_BANDS: [(f64, f64); 4] =
    [(250.0, 500.0), (500.0, 1000.0), (1000.0, 2000.0), (2000.0, 4000.0)];

/// Returns
/// `[hnr05, hnr15, hnr25, hnr35, cpp, flatness x4, zcr, chirp_gd]`.
///
/// A silent frame yields the documented degenerate outputs: 0 dB HNR and
/// CPP, flatness 1, zero ZCR and group delay.
pub(super) fn noise_measures(ex: &mut Extractor, raw_frame: &[f64], spectrum: &[f64]) -> [f64; 11] {
    super::check_spectrum_len(spectrum);
    let mut out = [0.0; 11];
    out[9] = zero_crossing_rate(raw_frame);

    let total: f64 = spectrum.iter().sum();
    if total <= LOG_FLOOR {
        for slot in &mut out[5..9] {
            *slot = 1.0;
        }
        return out;
    }

    for (i, (lo, hi)) in FLATNESS_BANDS.iter().enumerate() {
        out[5 + i] = band_flatness(spectrum, *lo, *hi);
    }

    // cepstral path on the windowed frame, zero-padded to CEPSTRUM_FFT
    let windowed: Vec<f64> = raw_frame.iter().zip(ex.window()).map(|(s, w)| s * w).collect();
    let mut buf: Vec<Complex<f64>> = windowed
        .iter()
        .map(|&s| Complex::new(s, 0.0))
        .collect();
    buf.resize(CEPSTRUM_FFT, Complex::new(0.0, 0.0));
    ex.fft_long(&mut buf);
    let log_mag: Vec<f64> = buf.iter().map(|c| c.norm().max(LOG_FLOOR).ln()).collect();

    let mut cep_buf: Vec<Complex<f64>> =
        log_mag.iter().map(|&l| Complex::new(l, 0.0)).collect();
    ex.ifft_long(&mut cep_buf);
    let cepstrum: Vec<f64> = cep_buf.iter().map(|c| c.re / CEPSTRUM_FFT as f64).collect();

    let (q_peak, _) = cepstral_peak(&cepstrum);
    out[4] = cepstral_peak_prominence(&cepstrum, q_peak);

    for (i, hi) in HNR_BANDS.iter().enumerate() {
        out[i] = band_hnr(&log_mag, q_peak, *hi);
    }

    out[10] = chirp_group_delay(ex, &windowed);
    out
}

/// Fraction of adjacent sample pairs with a strict sign change.
pub fn zero_crossing_rate(frame: &[f64]) -> f64 {
    if frame.len() < 2 {
        return 0.0;
    }
    let changes = frame
        .windows(2)
        .filter(|pair| pair[0] * pair[1] < 0.0)
        .count();
    changes as f64 / (frame.len() - 1) as f64
}

/// Geometric over arithmetic mean of the band magnitudes; 1 for a silent
/// band by the degenerate-frame rule.
fn band_flatness(spectrum: &[f64], lo_hz: f64, hi_hz: f64) -> f64 {
    let bin_hz = TARGET_RATE as f64 / crate::signal::FFT_SIZE as f64;
    let lo = (lo_hz / bin_hz).round() as usize;
    let hi = ((hi_hz / bin_hz).round() as usize).min(spectrum.len());
    let band = &spectrum[lo..hi];
    let arith = band.iter().sum::<f64>() / band.len() as f64;
    if arith <= LOG_FLOOR {
        return 1.0;
    }
    let log_mean = band.iter().map(|&a| a.ln()).sum::<f64>() / band.len() as f64;
    (log_mean.exp() / arith).clamp(0.0, 1.0)
}

/// Highest cepstral value in the pitch quefrency range.
#[allow(clippy::needless_range_loop)]
fn cepstral_peak(cepstrum: &[f64]) -> (usize, f64) {
    let mut best = (Q_LO, f64::NEG_INFINITY);
    for q in Q_LO..=Q_HI {
        if cepstrum[q] > best.1 {
            best = (q, cepstrum[q]);
        }
    }
    best
}

/// Peak height above the least-squares regression line of the dB cepstrum
/// over the pitch quefrency range.
#[allow(clippy::needless_range_loop)]
fn cepstral_peak_prominence(cepstrum: &[f64], q_peak: usize) -> f64 {
    let db = 20.0 / std::f64::consts::LN_10;
    let n = (Q_HI - Q_LO + 1) as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for q in Q_LO..=Q_HI {
        let x = q as f64;
        let y = db * cepstrum[q];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    db * cepstrum[q_peak] - (slope * q_peak as f64 + intercept)
}

/// Harmonic-to-noise ratio in dB over [0, hi_hz]: spectral power in a comb
/// of width f0/2 around each harmonic of the cepstrally detected period,
/// against the power in the remaining (between-harmonic) bins.
fn band_hnr(log_mag: &[f64], q0: usize, hi_hz: f64) -> f64 {
    let bin_hz = TARGET_RATE as f64 / CEPSTRUM_FFT as f64;
    let f0 = TARGET_RATE as f64 / q0 as f64;
    let half_width = f0 / 4.0;
    let hi = ((hi_hz / bin_hz).round() as usize).min(CEPSTRUM_FFT / 2);
    let mut harmonic = 0.0;
    let mut noise = 0.0;
    for (k, &l) in log_mag.iter().enumerate().take(hi + 1) {
        let f = k as f64 * bin_hz;
        let h = (f / f0).round();
        let power = (2.0 * l).exp();
        if h >= 1.0 && (f - h * f0).abs() <= half_width {
            harmonic += power;
        } else {
            noise += power;
        }
    }
    10.0 * ((harmonic + LOG_FLOOR) / (noise + LOG_FLOOR)).log10()
}

/// Mean group delay (samples) over 0-8 kHz of the frame's z-transform
/// evaluated on a circle of radius `CHIRP_RHO`.
fn chirp_group_delay(ex: &mut Extractor, windowed: &[f64]) -> f64 {
    let mut weighted = vec![Complex::new(0.0, 0.0); CEPSTRUM_FFT];
    let mut ramped = vec![Complex::new(0.0, 0.0); CEPSTRUM_FFT];
    let mut w = 1.0;
    let inv_rho = 1.0 / CHIRP_RHO;
    for (n, &s) in windowed.iter().enumerate() {
        let v = s * w;
        weighted[n] = Complex::new(v, 0.0);
        ramped[n] = Complex::new(n as f64 * v, 0.0);
        w *= inv_rho;
    }
    ex.fft_long(&mut weighted);
    ex.fft_long(&mut ramped);

    let max_mag = weighted
        .iter()
        .take(CEPSTRUM_FFT / 2 + 1)
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    if max_mag <= LOG_FLOOR {
        return 0.0;
    }
    let threshold = 1e-8 * max_mag;
    let mut sum = 0.0;
    let mut count = 0usize;
    for k in 0..=CEPSTRUM_FFT / 2 {
        if weighted[k].norm() > threshold {
            sum += (ramped[k] / weighted[k]).re;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
