//! Mel filterbank and cepstral coefficients.

use super::LOG_FLOOR;

/// Triangular mel filterbank on the HTK scale `2595 log10(1 + f/700)`.
pub struct MelFilterbank {
    /// Per filter: (first bin, triangle weights from that bin on).
    filters: Vec<(usize, Vec<f64>)>,
    num_filters: usize,
}

impl MelFilterbank {
    pub fn new(num_filters: usize, fft_size: usize, sample_rate: f64, lo_hz: f64, hi_hz: f64) -> Self {
        let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
        let inv_mel = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
        let mel_lo = mel(lo_hz);
        let mel_hi = mel(hi_hz);
        let edges: Vec<f64> = (0..num_filters + 2)
            .map(|j| inv_mel(mel_lo + j as f64 * (mel_hi - mel_lo) / (num_filters + 1) as f64))
            .collect();
        let bin_hz = sample_rate / fft_size as f64;
        let nbins = fft_size / 2 + 1;

        let filters = (0..num_filters)
            .map(|m| {
                let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
                let mut first = None;
                let mut weights = Vec::new();
                for k in 0..nbins {
                    let f = k as f64 * bin_hz;
                    let w = if f <= left || f >= right {
                        0.0
                    } else if f <= center {
                        (f - left) / (center - left)
                    } else {
                        (right - f) / (right - center)
                    };
                    if w > 0.0 {
                        if first.is_none() {
                            first = Some(k);
                        }
                        weights.push(w);
                    } else if first.is_some() {
                        break;
                    }
                }
                (first.unwrap_or(0), weights)
            })
            .collect();
        Self {
            filters,
            num_filters,
        }
    }

    pub fn num_filters(&self) -> usize {
        self.num_filters
    }

    /// Filter energies of a magnitude spectrum (power-domain accumulation).
    pub fn energies(&self, spectrum: &[f64]) -> Vec<f64> {
        self.filters
            .iter()
            .map(|(first, weights)| {
                weights
                    .iter()
                    .zip(&spectrum[*first..])
                    .map(|(w, m)| w * m * m)
                    .sum()
            })
            .collect()
    }
}

/// 13 cepstral coefficients from mel filter energies: floored log then
/// orthonormal DCT-II.
pub fn mfcc_from_energies(energies: &[f64]) -> [f64; 13] {
    let m = energies.len();
    let logs: Vec<f64> = energies.iter().map(|&e| e.max(LOG_FLOOR).ln()).collect();
    let mut out = [0.0; 13];
    for (i, slot) in out.iter_mut().enumerate() {
        let scale = if i == 0 {
            (1.0 / m as f64).sqrt()
        } else {
            (2.0 / m as f64).sqrt()
        };
        let sum: f64 = logs
            .iter()
            .enumerate()
            .map(|(j, &l)| l * (std::f64::consts::PI * i as f64 * (j as f64 + 0.5) / m as f64).cos())
            .sum();
        *slot = scale * sum;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SPECTRUM_LEN;

    #[test]
    fn zero_spectrum_gives_floor_constant() {
        let bank = MelFilterbank::new(26, 512, 16_000.0, 0.0, 8000.0);
        let coeffs = mfcc_from_energies(&bank.energies(&vec![0.0; SPECTRUM_LEN]));
        let expected_c0 = 26.0 * super::LOG_FLOOR.ln() / 26f64.sqrt();
        assert!((coeffs[0] - expected_c0).abs() < 1e-9, "c0 = {}", coeffs[0]);
        for &c in &coeffs[1..] {
            assert!(c.abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_gain_only_shifts_c0() {
        let spectrum: Vec<f64> = (0..SPECTRUM_LEN)
            .map(|k| 1.0 + (k as f64 * 0.1).sin().abs())
            .collect();
        let doubled: Vec<f64> = spectrum.iter().map(|m| 2.0 * m).collect();
        let bank = MelFilterbank::new(26, 512, 16_000.0, 0.0, 8000.0);
        let a = mfcc_from_energies(&bank.energies(&spectrum));
        let b = mfcc_from_energies(&bank.energies(&doubled));
        // power doubles twice: log shift is ln 4, spread over c0 only
        let expected_shift = 26.0 * 4f64.ln() / 26f64.sqrt();
        assert!((b[0] - a[0] - expected_shift).abs() < 1e-9);
        for i in 1..13 {
            assert!((a[i] - b[i]).abs() < 1e-9, "c{i} moved: {} vs {}", a[i], b[i]);
        }
    }


    #[test]
    fn white_noise_regression_snapshot() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let frame: Vec<f64> = (0..400).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let audio = crate::signal::AudioBuffer::new(frame, 16_000);
        let frames =
            crate::signal::magnitude_spectrum(crate::signal::frame_signal(&audio).unwrap());
        let bank = MelFilterbank::new(26, 512, 16_000.0, 0.0, 8000.0);
        let coeffs = mfcc_from_energies(&bank.energies(&frames.spectra[0]));
        // frozen reproducibility snapshot
        let expected = [
            29.128703490473068,
            -4.597996890677891,
            -0.9030535724044653,
            -0.49078300628711985,
            0.0005722676947631938,
            -0.7287877017254195,
            0.4770820086150559,
            0.15966790203683637,
            -0.2515758147702588,
            -0.5689364418283274,
            -0.510638704456517,
            -0.08035791958842024,
            0.15513873480503487,
        ];
        for (i, (&got, &want)) in coeffs.iter().zip(&expected).enumerate() {
            assert!((got - want).abs() < 1e-9, "c{i}: {got} vs {want}");
            assert!(got.abs() < 40.0, "c{i} unbounded");
        }
    }

    #[test]
    fn filters_cover_band_without_gaps() {
        let bank = MelFilterbank::new(26, 512, 16_000.0, 0.0, 8000.0);
        // every interior bin between the first and last filter peak gets
        // some weight
        let flat = vec![1.0; SPECTRUM_LEN];
        let energies = bank.energies(&flat);
        assert_eq!(energies.len(), 26);
        assert!(energies.iter().all(|&e| e > 0.0));
    }
}

