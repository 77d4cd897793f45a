//! Minimal RIFF/WAVE reader and 16-bit PCM writer.
//!
//! Only what the pipeline needs: PCM 16-bit or IEEE float 32-bit, mono or
//! stereo. Every error carries the byte offset at which parsing stopped.

use super::{AudioClip, AudioError};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    format: u16,
    channels: u16,
    rate: u32,
    bits: u16,
}

fn read_u16(bytes: &[u8], at: usize) -> Option<u16> {
    bytes.get(at..at + 2).map(|b| u16::from_le_bytes([b[0], b[1]]))
}

fn read_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

fn malformed(offset: usize, reason: impl Into<String>) -> AudioError {
    AudioError::Malformed {
        offset,
        reason: reason.into(),
    }
}

/// Decode a WAV file into a mono clip. Stereo is downmixed by channel mean.
///
/// The returned clip has an empty id; use [`AudioClip::with_id`] to name it.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    if bytes.len() < 12 {
        return Err(malformed(bytes.len(), "file shorter than RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed(0, "missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed(8, "missing WAVE form type"));
    }

    let mut pos = 12;
    let mut fmt: Option<FmtChunk> = None;
    loop {
        if pos + 8 > bytes.len() {
            return Err(malformed(pos, "no data chunk found"));
        }
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4).expect("bounds checked") as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body + 16 > bytes.len() {
                    return Err(malformed(body, "fmt chunk too short"));
                }
                let mut format = read_u16(bytes, body).unwrap();
                let channels = read_u16(bytes, body + 2).unwrap();
                let rate = read_u32(bytes, body + 4).unwrap();
                let bits = read_u16(bytes, body + 14).unwrap();
                if format == FORMAT_EXTENSIBLE {
                    // the sub-format GUID starts with the real format tag
                    format = read_u16(bytes, body + 24)
                        .ok_or_else(|| malformed(body + 24, "extensible fmt chunk too short"))?;
                }
                fmt = Some(FmtChunk {
                    format,
                    channels,
                    rate,
                    bits,
                });
            }
            b"data" => {
                let fmt = fmt.ok_or_else(|| malformed(pos, "data chunk before fmt chunk"))?;
                return decode_data(bytes, body, size, fmt);
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body + size + (size & 1);
    }
}

fn decode_data(bytes: &[u8], body: usize, size: usize, fmt: FmtChunk) -> Result<AudioClip, AudioError> {
    let fmt_at = 20;
    let width = match (fmt.format, fmt.bits) {
        (FORMAT_PCM, 16) => 2,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (format, bits) => {
            return Err(AudioError::Unsupported {
                offset: fmt_at,
                what: format!("format tag {format} with {bits} bits per sample"),
            })
        }
    };
    if !(1..=2).contains(&fmt.channels) {
        return Err(AudioError::Unsupported {
            offset: fmt_at + 2,
            what: format!("{} channels", fmt.channels),
        });
    }
    if fmt.rate == 0 {
        return Err(malformed(fmt_at + 4, "sample rate is zero"));
    }
    let available = bytes.len() - body;
    if size > available {
        return Err(AudioError::Truncated {
            offset: bytes.len(),
            expected: size,
            found: available,
        });
    }
    let frame_bytes = width * fmt.channels as usize;
    let data = &bytes[body..body + size - size % frame_bytes];

    let decode_one = |chunk: &[u8]| -> f32 {
        if width == 2 {
            i16::from_le_bytes([chunk[0], chunk[1]]) as f32 / 32768.0
        } else {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if v.is_finite() {
                v.clamp(-1.0, 1.0)
            } else {
                0.0
            }
        }
    };

    let samples = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f32 = frame.chunks_exact(width).map(decode_one).sum();
            sum / fmt.channels as f32
        })
        .collect();

    Ok(AudioClip::new(String::new(), samples, fmt.rate))
}

/// Encode a clip as a mono 16-bit PCM WAV file. Samples are clamped to [-1, 1].
pub fn encode_wav16(clip: &AudioClip) -> Vec<u8> {
    let data_len = clip.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.rate.to_le_bytes());
    out.extend_from_slice(&(clip.rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &clip.samples {
        out.extend_from_slice(&quantize16(s).to_le_bytes());
    }
    out
}

pub(crate) fn quantize16(s: f32) -> i16 {
    (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}
