//! Signal frontend: resampling to 16 kHz and the 25 ms / 10 ms Hanning
//! analysis grid with per-frame magnitude spectra.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// Everything downstream runs at this rate.
pub const TARGET_RATE: u32 = 16_000;
/// 25 ms at 16 kHz.
pub const FRAME_LEN: usize = 400;
/// 10 ms at 16 kHz.
pub const HOP: usize = 160;
/// Zero-padded FFT length for the 400-sample frames (bin spacing 31.25 Hz).
pub const FFT_SIZE: usize = 512;
/// One-sided spectrum length.
pub const SPECTRUM_LEN: usize = FFT_SIZE / 2 + 1;

const SUPPORTED_RATES: [u32; 4] = [16_000, 32_000, 44_100, 48_000];

/// Mono audio in [-1, 1] at a known sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Windowed frames plus (optionally) their magnitude spectra.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    /// Hanning-windowed frames, `frame_length` samples each.
    pub frames: Vec<Vec<f64>>,
    pub frame_length: usize,
    pub hop: usize,
    pub sample_rate: u32,
    /// One magnitude spectrum per frame once [`magnitude_spectrum`] has run;
    /// empty straight after framing.
    pub spectra: Vec<Vec<f64>>,
    pub fft_size: usize,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Start sample index of frame `k` in the source signal.
    pub fn frame_start(&self, k: usize) -> usize {
        k * self.hop
    }

    /// Center time of frame `k` in seconds.
    pub fn frame_center(&self, k: usize) -> f64 {
        (self.frame_start(k) + self.frame_length / 2) as f64 / self.sample_rate as f64
    }

    /// Frequency of spectrum bin `i` in Hz.
    pub fn bin_hz(&self, i: usize) -> f64 {
        i as f64 * self.sample_rate as f64 / self.fft_size as f64
    }
}

/// Symmetric Hanning window, `w[n] = 0.5 (1 - cos(2 pi n / (L - 1)))`.
pub fn hanning(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len)
        .map(|n| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos()))
        .collect()
}

/// Resample to 16 kHz with a Kaiser-windowed sinc polyphase filter
/// (beta = 8, 64 taps per phase). 16 kHz input is returned unchanged.
pub fn resample_to_16k(audio: &AudioBuffer) -> Result<AudioBuffer> {
    if !SUPPORTED_RATES.contains(&audio.sample_rate) {
        return Err(Error::UnsupportedSampleRate(audio.sample_rate));
    }
    if audio.sample_rate == TARGET_RATE {
        return Ok(audio.clone());
    }
    let (up, down) = reduce_ratio(TARGET_RATE as u64, audio.sample_rate as u64);
    let taps = polyphase_taps(up, down);
    let n = audio.samples.len();
    let out_len = ((n as u64 * up).div_ceil(down)) as usize;
    let half = TAPS_PER_PHASE as isize / 2;

    let mut out = Vec::with_capacity(out_len);
    for m in 0..out_len as u64 {
        let num = m * down;
        let base = (num / up) as isize;
        let phase = (num % up) as usize;
        let coeffs = &taps[phase];
        let mut acc = 0.0;
        for (t, &c) in coeffs.iter().enumerate() {
            let idx = base + (t as isize - half + 1);
            if idx >= 0 && (idx as usize) < n {
                acc += c * audio.samples[idx as usize];
            }
        }
        out.push(acc);
    }
    Ok(AudioBuffer::new(out, TARGET_RATE))
}

const TAPS_PER_PHASE: usize = 64;
const KAISER_BETA: f64 = 8.0;

fn reduce_ratio(a: u64, b: u64) -> (u64, u64) {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    let g = gcd(a, b);
    (a / g, b / g)
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half_x = x / 2.0;
    for k in 1..64 {
        term *= (half_x / k as f64) * (half_x / k as f64);
        sum += term;
        if term < sum * 1e-16 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// One row of Kaiser-sinc taps per output phase, each normalized to unit DC
/// gain so constant signals survive the rate change exactly.
fn polyphase_taps(up: u64, down: u64) -> Vec<Vec<f64>> {
    // Cutoff at the output Nyquist, expressed in cycles per input sample.
    let cutoff = 0.5 * (up as f64 / down as f64).min(1.0);
    let half = TAPS_PER_PHASE as f64 / 2.0;
    let i0_beta = bessel_i0(KAISER_BETA);
    (0..up)
        .map(|phase| {
            let frac = phase as f64 * down as f64 / up as f64;
            let frac = frac - frac.floor();
            let mut row: Vec<f64> = (0..TAPS_PER_PHASE)
                .map(|t| {
                    let x = (t as isize - TAPS_PER_PHASE as isize / 2 + 1) as f64 - frac;
                    let u = x / half;
                    if u.abs() >= 1.0 {
                        0.0
                    } else {
                        let window = bessel_i0(KAISER_BETA * (1.0 - u * u).sqrt()) / i0_beta;
                        2.0 * cutoff * sinc(2.0 * cutoff * x) * window
                    }
                })
                .collect();
            let gain: f64 = row.iter().sum();
            for c in &mut row {
                *c /= gain;
            }
            row
        })
        .collect()
}

/// Slice a 16 kHz signal into Hanning-windowed 400-sample frames every 160
/// samples; trailing samples that do not fill a frame are dropped.
pub fn frame_signal(audio: &AudioBuffer) -> Result<FrameSequence> {
    if audio.sample_rate != TARGET_RATE {
        return Err(Error::UnsupportedSampleRate(audio.sample_rate));
    }
    let n = audio.samples.len();
    if n < FRAME_LEN {
        return Err(Error::AudioTooShort {
            got: n,
            need: FRAME_LEN,
        });
    }
    let window = hanning(FRAME_LEN);
    let count = (n - FRAME_LEN) / HOP + 1;
    let frames = (0..count)
        .map(|k| {
            let start = k * HOP;
            audio.samples[start..start + FRAME_LEN]
                .iter()
                .zip(&window)
                .map(|(s, w)| s * w)
                .collect()
        })
        .collect();
    Ok(FrameSequence {
        frames,
        frame_length: FRAME_LEN,
        hop: HOP,
        sample_rate: audio.sample_rate,
        spectra: Vec::new(),
        fft_size: FFT_SIZE,
    })
}

/// Fill `spectra` with the one-sided magnitude spectrum of every frame
/// (zero-padded 512-point FFT).
pub fn magnitude_spectrum(mut frames: FrameSequence) -> FrameSequence {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(frames.fft_size);
    let mut buf = vec![Complex::new(0.0, 0.0); frames.fft_size];
    frames.spectra = frames
        .frames
        .iter()
        .map(|frame| {
            for (slot, &s) in buf.iter_mut().zip(frame.iter()) {
                *slot = Complex::new(s, 0.0);
            }
            for slot in buf.iter_mut().skip(frame.len()) {
                *slot = Complex::new(0.0, 0.0);
            }
            fft.process(&mut buf);
            buf[..frames.fft_size / 2 + 1]
                .iter()
                .map(|c| c.norm())
                .collect()
        })
        .collect();
    frames
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine(freq: f64, rate: u32, secs: f64) -> AudioBuffer {
        let n = (secs * rate as f64).round() as usize;
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioBuffer::new(samples, rate)
    }

    /// Independent peak-frequency oracle: zero-padded DFT of the whole signal.
    fn dominant_frequency(audio: &AudioBuffer) -> f64 {
        let fft_size = 16384;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(fft_size);
        let mut buf: Vec<Complex<f64>> = audio
            .samples
            .iter()
            .take(fft_size)
            .map(|&s| Complex::new(s, 0.0))
            .collect();
        buf.resize(fft_size, Complex::new(0.0, 0.0));
        fft.process(&mut buf);
        let peak = buf[..fft_size / 2]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap();
        peak as f64 * audio.sample_rate as f64 / fft_size as f64
    }

    #[test]
    fn resample_identity_at_16k() {
        let audio = sine(440.0, 16_000, 0.1);
        let out = resample_to_16k(&audio).unwrap();
        assert_eq!(out, audio);
    }

    #[test]
    fn resample_output_length() {
        for rate in [32_000u32, 44_100, 48_000] {
            let audio = sine(440.0, rate, 1.0);
            let out = resample_to_16k(&audio).unwrap();
            assert!(
                (out.samples.len() as i64 - 16_000).abs() <= 1,
                "{} -> {} samples",
                rate,
                out.samples.len()
            );
            assert_eq!(out.sample_rate, 16_000);
        }
    }

    #[test]
    fn resample_preserves_tone_frequency() {
        let audio = sine(1000.0, 44_100, 1.0);
        let out = resample_to_16k(&audio).unwrap();
        let freq = dominant_frequency(&out);
        // one oracle bin = 16000 / 16384 Hz
        assert!((freq - 1000.0).abs() <= 1.0, "peak at {freq} Hz");
    }

    #[test]
    fn resample_rejects_unsupported_rate() {
        let audio = sine(440.0, 22_050, 0.5);
        match resample_to_16k(&audio) {
            Err(Error::UnsupportedSampleRate(22_050)) => {}
            other => panic!("expected UnsupportedSampleRate, got {other:?}"),
        }
    }

    #[test]
    fn resample_keeps_dc_level() {
        let audio = AudioBuffer::new(vec![0.5; 48_000], 48_000);
        let out = resample_to_16k(&audio).unwrap();
        // interior samples, away from the zero-padded edges
        for &s in &out.samples[100..out.samples.len() - 100] {
            assert!((s - 0.5).abs() < 1e-9, "dc drifted to {s}");
        }
    }

    #[test]
    fn frame_count_one_second() {
        let audio = AudioBuffer::new(vec![0.0; 16_000], 16_000);
        let frames = frame_signal(&audio).unwrap();
        assert_eq!(frames.len(), 98);
    }

    #[test]
    fn frame_count_exact_single_frame() {
        let audio = AudioBuffer::new(vec![0.0; 400], 16_000);
        let frames = frame_signal(&audio).unwrap();
        assert_eq!(frames.len(), 1);
    }

    #[test]
    fn framing_rejects_short_audio() {
        let audio = AudioBuffer::new(vec![0.0; 399], 16_000);
        assert!(matches!(
            frame_signal(&audio),
            Err(Error::AudioTooShort { got: 399, need: 400 })
        ));
    }

    #[test]
    fn constant_signal_frames_equal_window() {
        let audio = AudioBuffer::new(vec![1.0; 1200], 16_000);
        let frames = frame_signal(&audio).unwrap();
        let window = hanning(FRAME_LEN);
        for frame in &frames.frames {
            assert_eq!(frame, &window);
        }
    }

    #[test]
    fn window_is_symmetric() {
        let w = hanning(FRAME_LEN);
        for n in 0..FRAME_LEN {
            assert!((w[n] - w[FRAME_LEN - 1 - n]).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_starts_on_hop_grid() {
        let audio = AudioBuffer::new(vec![0.0; 4000], 16_000);
        let frames = frame_signal(&audio).unwrap();
        for k in 0..frames.len() {
            assert_eq!(frames.frame_start(k), k * 160);
        }
    }

    #[test]
    fn zero_frame_gives_zero_spectrum() {
        let audio = AudioBuffer::new(vec![0.0; 400], 16_000);
        let frames = magnitude_spectrum(frame_signal(&audio).unwrap());
        assert_eq!(frames.spectra.len(), 1);
        assert_eq!(frames.spectra[0].len(), SPECTRUM_LEN);
        assert!(frames.spectra[0].iter().all(|&m| m == 0.0));
    }

    #[test]
    fn sine_frame_peaks_at_expected_bin() {
        let audio = sine(1000.0, 16_000, 0.025);
        let frames = magnitude_spectrum(frame_signal(&audio).unwrap());
        let peak = frames.spectra[0]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        assert_eq!(peak, 32); // round(1000 / (16000 / 512))
    }

    #[test]
    fn parseval_holds_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let samples: Vec<f64> = (0..800).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let audio = AudioBuffer::new(samples, 16_000);
            let frames = magnitude_spectrum(frame_signal(&audio).unwrap());
            for (frame, spectrum) in frames.frames.iter().zip(&frames.spectra) {
                let time_energy: f64 = frame.iter().map(|s| s * s).sum();
                // two-sided spectrum energy from the one-sided magnitudes
                let mut spec_energy = spectrum[0] * spectrum[0]
                    + spectrum[SPECTRUM_LEN - 1] * spectrum[SPECTRUM_LEN - 1];
                for m in &spectrum[1..SPECTRUM_LEN - 1] {
                    spec_energy += 2.0 * m * m;
                }
                spec_energy /= FFT_SIZE as f64;
                assert!(
                    (time_energy - spec_energy).abs() <= 1e-6 * time_energy.max(1e-12),
                    "parseval violated: {time_energy} vs {spec_energy}"
                );
            }
        }
    }

    #[test]
    fn spectrum_nonnegative_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let frames = magnitude_spectrum(frame_signal(&AudioBuffer::new(samples, 16_000)).unwrap());
        for spectrum in &frames.spectra {
            assert!(spectrum.iter().all(|&m| m >= 0.0));
        }
    }
}
