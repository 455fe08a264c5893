//! Energy measures, loudness and fundamental frequency.

use super::{MelFilterbank, LOG_FLOOR};
use crate::signal::TARGET_RATE;

/// F0 search range in Hz.
const F0_MIN: f64 = 70.0;
const F0_MAX: f64 = 400.0;
/// Normalized autocorrelation peak below this is unvoiced.
const VOICING_THRESHOLD: f64 = 0.35;
/// Loudness compression exponent over mel band energies.
const LOUDNESS_EXPONENT: f64 = 0.23;

/// Returns `[energy_rms, energy_log, energy_teager, energy_0_4000,
/// loudness, f0, voicing]`.
///
/// `f0` is 0 for unvoiced frames (autocorrelation peak below the voicing
/// threshold); `voicing` is the raw peak value and is not a registry
/// feature.
pub(super) fn prosody(
    mel: &MelFilterbank,
    raw_frame: &[f64],
    spectrum: &[f64],
    neighborhood: &[f64],
) -> [f64; 7] {
    super::check_spectrum_len(spectrum);
    let n = raw_frame.len() as f64;
    let sum_sq: f64 = raw_frame.iter().map(|s| s * s).sum();
    let energy_rms = (sum_sq / n).sqrt();
    let energy_log = (sum_sq + LOG_FLOOR).ln();
    let energy_teager = if raw_frame.len() < 3 {
        0.0
    } else {
        raw_frame
            .windows(3)
            .map(|w| w[1] * w[1] - w[0] * w[2])
            .sum::<f64>()
            / (raw_frame.len() - 2) as f64
    };

    let bin_hz = TARGET_RATE as f64 / crate::signal::FFT_SIZE as f64;
    let hi = (4000.0 / bin_hz).round() as usize;
    let energy_band: f64 = spectrum[..=hi].iter().map(|a| a * a).sum();

    let loudness = mel
        .energies(spectrum)
        .iter()
        .map(|&e| e.powf(LOUDNESS_EXPONENT))
        .sum();

    let (f0, voicing) = estimate_f0(neighborhood);

    [
        energy_rms,
        energy_log,
        energy_teager,
        energy_band,
        loudness,
        f0,
        voicing,
    ]
}

/// Normalized autocorrelation pitch estimate over the 70-400 Hz lag range
/// with parabolic peak refinement. Returns `(f0_hz_or_0, peak_value)`.
pub fn estimate_f0(signal: &[f64]) -> (f64, f64) {
    let rate = TARGET_RATE as f64;
    let lag_min = (rate / F0_MAX).round() as usize;
    let lag_max = (rate / F0_MIN).floor() as usize;
    let m = signal.len();
    if m < lag_max + 2 {
        return (0.0, 0.0);
    }

    // prefix sums of squares for O(1) energy terms per lag
    let mut prefix_sq = Vec::with_capacity(m + 1);
    prefix_sq.push(0.0);
    let mut acc = 0.0;
    for &s in signal {
        acc += s * s;
        prefix_sq.push(acc);
    }
    let energy = |a: usize, b: usize| prefix_sq[b] - prefix_sq[a]; // [a, b)

    let corr: Vec<f64> = (lag_min..=lag_max)
        .map(|lag| {
            let span = m - lag;
            let e0 = energy(0, span);
            let el = energy(lag, m);
            if e0 <= LOG_FLOOR || el <= LOG_FLOOR {
                return 0.0;
            }
            let cross: f64 = (0..span).map(|i| signal[i] * signal[i + lag]).sum();
            cross / (e0 * el).sqrt()
        })
        .collect();

    let r_max = corr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let voicing = r_max.max(0.0);
    if voicing < VOICING_THRESHOLD {
        return (0.0, voicing);
    }

    // an exactly periodic signal correlates equally well at every multiple
    // of its period; take the shortest near-maximal local peak
    let mut best_idx = corr.len() - 1;
    for i in 0..corr.len() {
        let is_peak = (i == 0 || corr[i] >= corr[i - 1])
            && (i + 1 == corr.len() || corr[i] >= corr[i + 1]);
        if is_peak && corr[i] >= 0.95 * r_max {
            best_idx = i;
            break;
        }
    }

    // parabolic refinement around the integer-lag peak
    let lag = (lag_min + best_idx) as f64;
    let delta = if best_idx > 0 && best_idx + 1 < corr.len() {
        let (a, b, c) = (corr[best_idx - 1], corr[best_idx], corr[best_idx + 1]);
        let denom = a - 2.0 * b + c;
        if denom.abs() < 1e-12 {
            0.0
        } else {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        }
    } else {
        0.0
    };
    ((rate / (lag + delta)).clamp(F0_MIN, F0_MAX), voicing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SPECTRUM_LEN;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bank() -> MelFilterbank {
        MelFilterbank::new(26, 512, 16_000.0, 0.0, 8000.0)
    }

    fn sine(freq: f64, amp: f64, len: usize) -> Vec<f64> {
        (0..len)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 16_000.0).sin())
            .collect()
    }

    #[test]
    fn zero_frame_zero_outputs() {
        let frame = vec![0.0; 400];
        let spectrum = vec![0.0; SPECTRUM_LEN];
        let hood = vec![0.0; 1680];
        let out = prosody(&bank(), &frame, &spectrum, &hood);
        assert_eq!(out[0], 0.0); // rms
        assert_eq!(out[2], 0.0); // teager
        assert_eq!(out[5], 0.0); // f0
    }

    #[test]
    fn f0_of_200hz_sine_within_2hz() {
        let hood = sine(200.0, 1.0, 1680);
        let (f0, voicing) = estimate_f0(&hood);
        assert!(voicing > 0.9, "voicing {voicing}");
        assert!((f0 - 200.0).abs() <= 2.0, "f0 {f0}");
    }

    #[test]
    fn f0_tracks_other_frequencies() {
        for target in [90.0, 151.0, 333.0] {
            let hood = sine(target, 0.8, 1680);
            let (f0, _) = estimate_f0(&hood);
            assert!((f0 - target).abs() <= 2.0, "target {target}, got {f0}");
        }
    }

    #[test]
    fn white_noise_is_unvoiced() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let hood: Vec<f64> = (0..1680).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let (f0, voicing) = estimate_f0(&hood);
        assert_eq!(f0, 0.0, "voicing was {voicing}");
    }

    #[test]
    fn energy_homogeneity_under_gain() {
        let frame = sine(350.0, 0.4, 400);
        let doubled: Vec<f64> = frame.iter().map(|s| 2.0 * s).collect();
        let spectrum = vec![0.0; SPECTRUM_LEN];
        let hood = vec![0.0; 1680];
        let a = prosody(&bank(), &frame, &spectrum, &hood);
        let b = prosody(&bank(), &doubled, &spectrum, &hood);
        assert!((b[0] - 2.0 * a[0]).abs() < 1e-12, "rms not doubled");
        assert!((b[1] - a[1] - 4f64.ln()).abs() < 1e-9, "log energy shift");
    }
}
