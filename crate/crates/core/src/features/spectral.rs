//! Spectral shape descriptors: centroid, spread, decrease, variation, flux.

use super::LOG_FLOOR;

/// Returns `[centroid_hz, spread_hz, decrease, variation, flux]`.
///
/// Variation is one minus the normalized cross-correlation of two successive
/// magnitude spectra; flux is the Euclidean distance between the unit-norm
/// spectra (both zero for the first frame). An all-zero spectrum yields the
/// documented floor values.
pub fn spectral_shape(current: &[f64], previous: Option<&[f64]>, bin_hz: f64) -> [f64; 5] {
    super::check_spectrum_len(current);
    let total: f64 = current.iter().sum();

    let (centroid, spread, decrease) = if total <= LOG_FLOOR {
        (0.0, 0.0, 0.0)
    } else {
        let centroid = current
            .iter()
            .enumerate()
            .map(|(k, &a)| k as f64 * bin_hz * a)
            .sum::<f64>()
            / total;
        let spread = (current
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let d = k as f64 * bin_hz - centroid;
                a * d * d
            })
            .sum::<f64>()
            / total)
            .sqrt();
        let tail: f64 = current[1..].iter().sum();
        let decrease = if tail <= LOG_FLOOR {
            0.0
        } else {
            current[1..]
                .iter()
                .enumerate()
                .map(|(i, &a)| (a - current[0]) / (i + 1) as f64)
                .sum::<f64>()
                / tail
        };
        (centroid, spread, decrease)
    };

    let (variation, flux) = match previous {
        None => (0.0, 0.0),
        Some(prev) => {
            let norm_cur = l2(current);
            let norm_prev = l2(prev);
            if norm_cur <= LOG_FLOOR || norm_prev <= LOG_FLOOR {
                (0.0, 0.0)
            } else {
                let dot: f64 = current.iter().zip(prev).map(|(a, b)| a * b).sum();
                let variation = 1.0 - dot / (norm_cur * norm_prev);
                let flux = current
                    .iter()
                    .zip(prev)
                    .map(|(a, b)| {
                        let d = a / norm_cur - b / norm_prev;
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt();
                (variation, flux)
            }
        }
    };

    [centroid, spread, decrease, variation, flux]
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{self, AudioBuffer, SPECTRUM_LEN};

    const BIN_HZ: f64 = 31.25;

    #[test]
    fn flat_spectrum_centroid_is_band_middle() {
        let flat = vec![1.0; SPECTRUM_LEN];
        let shape = spectral_shape(&flat, None, BIN_HZ);
        assert!((shape[0] - 4000.0).abs() < 1e-9, "centroid {}", shape[0]);
    }

    #[test]
    fn pure_tone_centroid_within_one_bin() {
        let audio = AudioBuffer::new(
            (0..400)
                .map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 16_000.0).sin())
                .collect(),
            16_000,
        );
        let frames = signal::magnitude_spectrum(signal::frame_signal(&audio).unwrap());
        let shape = spectral_shape(&frames.spectra[0], None, BIN_HZ);
        assert!((shape[0] - 1000.0).abs() <= BIN_HZ, "centroid {}", shape[0]);
    }

    #[test]
    fn zero_spectrum_floors() {
        let zero = vec![0.0; SPECTRUM_LEN];
        let shape = spectral_shape(&zero, Some(&zero), BIN_HZ);
        assert_eq!(shape, [0.0; 5]);
    }

    #[test]
    fn identical_spectra_have_zero_variation_and_flux() {
        let spectrum: Vec<f64> = (0..SPECTRUM_LEN).map(|k| 1.0 + (k % 7) as f64).collect();
        let shape = spectral_shape(&spectrum, Some(&spectrum), BIN_HZ);
        assert!(shape[3].abs() < 1e-12, "variation {}", shape[3]);
        assert!(shape[4].abs() < 1e-9, "flux {}", shape[4]);
    }

    #[test]
    fn first_frame_has_zero_variation_and_flux() {
        let spectrum = vec![1.0; SPECTRUM_LEN];
        let shape = spectral_shape(&spectrum, None, BIN_HZ);
        assert_eq!(shape[3], 0.0);
        assert_eq!(shape[4], 0.0);
    }

    #[test]
    fn variation_and_flux_are_gain_invariant() {
        let a: Vec<f64> = (0..SPECTRUM_LEN).map(|k| 1.0 + (k as f64 * 0.3).sin().abs()).collect();
        let b: Vec<f64> = (0..SPECTRUM_LEN).map(|k| 1.0 + (k as f64 * 0.11).cos().abs()).collect();
        let scaled: Vec<f64> = a.iter().map(|x| 7.5 * x).collect();
        let s1 = spectral_shape(&a, Some(&b), BIN_HZ);
        let s2 = spectral_shape(&scaled, Some(&b), BIN_HZ);
        assert!((s1[3] - s2[3]).abs() < 1e-12);
        assert!((s1[4] - s2[4]).abs() < 1e-12);
    }
}
