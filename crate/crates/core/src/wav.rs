//! Minimal PCM WAV I/O: 16-bit signed little-endian, mono or stereo.
//! Stereo is averaged to mono; samples are normalized to [-1, 1] by
//! division by 32768.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::AudioBuffer;

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format {
        format: "WAV",
        msg: msg.into(),
    }
}

/// Decode a 16-bit PCM WAV byte stream.
pub fn decode(bytes: &[u8]) -> Result<AudioBuffer> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(format_err("missing RIFF/WAVE header"));
    }

    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_end = (pos + 8 + size).min(bytes.len());
        let body = &bytes[pos + 8..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(format_err("fmt chunk too short"));
                }
                fmt = Some((
                    u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    u16::from_le_bytes(body[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word-aligned
        pos = pos + 8 + size + (size & 1);
    }

    let (format, channels, rate, bits) = fmt.ok_or_else(|| format_err("no fmt chunk"))?;
    let data = data.ok_or_else(|| format_err("no data chunk"))?;
    if format != 1 {
        return Err(format_err(format!("unsupported format tag {format} (PCM only)")));
    }
    if bits != 16 {
        return Err(format_err(format!("unsupported bit depth {bits} (16-bit only)")));
    }
    if channels == 0 || channels > 2 {
        return Err(format_err(format!("unsupported channel count {channels}")));
    }

    let ch = channels as usize;
    let frames = data.len() / (2 * ch);
    let mut samples = Vec::with_capacity(frames);
    for f in 0..frames {
        let mut acc = 0.0;
        for c in 0..ch {
            let off = (f * ch + c) * 2;
            let v = i16::from_le_bytes(data[off..off + 2].try_into().unwrap());
            acc += v as f64 / 32768.0;
        }
        samples.push(acc / ch as f64);
    }
    Ok(AudioBuffer::new(samples, rate))
}

pub fn read(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Encode mono 16-bit PCM. Samples are clamped to [-1, 1].
pub fn encode(audio: &AudioBuffer) -> Vec<u8> {
    let n = audio.samples.len();
    let data_len = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&audio.sample_rate.to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &audio.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write(path: impl AsRef<Path>, audio: &AudioBuffer) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode(audio))?;
    Ok(())
}
