//! Minimal RIFF/WAVE codec.
//!
//! Reads PCM16, PCM24 and IEEE float32 files with one or two channels;
//! writes pcm16 or float32. Anything else (compression, other bit depths,
//! more channels) is rejected as unsupported rather than guessed at.
//!
//! Conversion conventions, fixed so fixtures stay portable:
//! - pcm16 decode: `x / 32768`; encode: `round(x * 32768)` clamped to
//!   [-32768, 32767]. Round-trip error is at most 1/32768.
//! - pcm24 decode: `x / 8388608`.
//! - float32 round-trips bit-exactly for samples that are f32 values.
//! - Samples are not clamped on read; out-of-range float32 content is
//!   preserved and only handled at mix time.

use std::fs;
use std::path::Path;

use crate::audio::{AudioBuffer, MonoBuffer, StereoBuffer};
use crate::error::{Error, Result};

/// Sample encodings `write_wav` can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

/// Reads a WAV file into float samples.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    decode(&bytes).map_err(|e| e.in_file(path))
}

/// Writes a buffer as a WAV file in the given encoding.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let bytes = match buffer {
        AudioBuffer::Mono(b) => encode(b.sample_rate, &[&b.samples], encoding),
        AudioBuffer::Stereo(b) => encode(b.sample_rate, &[&b.left, &b.right], encoding),
    };
    fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

struct Fmt {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn decode(bytes: &[u8]) -> Result<AudioBuffer> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::CorruptHeader {
            detail: "not a RIFF/WAVE file".into(),
        });
    }

    let mut fmt: Option<Fmt> = None;
    let mut data: Option<(usize, u64)> = None; // (offset, declared size)
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id: [u8; 4] = bytes[pos..pos + 4].try_into().unwrap();
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as u64;
        let body = pos + 8;
        match &id {
            b"fmt " => {
                if size < 16 || body + 16 > bytes.len() {
                    return Err(Error::CorruptHeader {
                        detail: "fmt chunk too short".into(),
                    });
                }
                let f = &bytes[body..body + 16];
                fmt = Some(Fmt {
                    format_tag: u16::from_le_bytes([f[0], f[1]]),
                    channels: u16::from_le_bytes([f[2], f[3]]),
                    sample_rate: u32::from_le_bytes([f[4], f[5], f[6], f[7]]),
                    bits_per_sample: u16::from_le_bytes([f[14], f[15]]),
                });
            }
            b"data" => {
                data = Some((body, size));
            }
            _ => {} // skip unknown chunks (LIST, fact, ...)
        }
        // chunks are word-aligned: odd sizes carry a pad byte
        pos = body.saturating_add(size as usize).saturating_add((size & 1) as usize);
    }

    let fmt = fmt.ok_or_else(|| Error::CorruptHeader {
        detail: "missing fmt chunk".into(),
    })?;
    let (data_off, declared) = data.ok_or_else(|| Error::CorruptHeader {
        detail: "missing data chunk".into(),
    })?;

    if fmt.channels == 0 || fmt.channels > 2 {
        return Err(Error::UnsupportedFormat {
            detail: format!("{} channels (only 1 or 2 supported)", fmt.channels),
        });
    }
    let bytes_per_sample = match (fmt.format_tag, fmt.bits_per_sample) {
        (FORMAT_PCM, 16) => 2usize,
        (FORMAT_PCM, 24) => 3,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (tag, bits) => {
            return Err(Error::UnsupportedFormat {
                detail: format!("format tag {tag} with {bits} bits per sample"),
            });
        }
    };
    if fmt.sample_rate == 0 {
        return Err(Error::CorruptHeader {
            detail: "sample rate is zero".into(),
        });
    }

    let available = (bytes.len() - data_off) as u64;
    if declared > available {
        return Err(Error::TruncatedData {
            expected: declared,
            found: available,
        });
    }
    let frame = bytes_per_sample * fmt.channels as usize;
    if declared as usize % frame != 0 {
        return Err(Error::TruncatedData {
            expected: (declared as usize).next_multiple_of(frame) as u64,
            found: declared,
        });
    }

    let payload = &bytes[data_off..data_off + declared as usize];
    let mut interleaved = Vec::with_capacity(payload.len() / bytes_per_sample);
    match bytes_per_sample {
        2 => {
            for s in payload.chunks_exact(2) {
                let v = i16::from_le_bytes([s[0], s[1]]);
                interleaved.push(v as f64 / 32768.0);
            }
        }
        3 => {
            for s in payload.chunks_exact(3) {
                // sign-extend the 24-bit little-endian value
                let v = i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8;
                interleaved.push(v as f64 / 8388608.0);
            }
        }
        4 => {
            for s in payload.chunks_exact(4) {
                interleaved.push(f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64);
            }
        }
        _ => unreachable!(),
    }

    if fmt.channels == 1 {
        Ok(AudioBuffer::Mono(MonoBuffer::new(fmt.sample_rate, interleaved)))
    } else {
        let mut left = Vec::with_capacity(interleaved.len() / 2);
        let mut right = Vec::with_capacity(interleaved.len() / 2);
        for pair in interleaved.chunks_exact(2) {
            left.push(pair[0]);
            right.push(pair[1]);
        }
        Ok(AudioBuffer::Stereo(StereoBuffer {
            sample_rate: fmt.sample_rate,
            left,
            right,
        }))
    }
}

/// Encodes one sample for pcm16: round(x * 32768) clamped to i16 range.
fn to_pcm16(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

fn encode(sample_rate: u32, channels: &[&[f64]], encoding: WavEncoding) -> Vec<u8> {
    let ch = channels.len() as u16;
    let frames = channels[0].len();
    let (format_tag, bits) = match encoding {
        WavEncoding::Pcm16 => (FORMAT_PCM, 16u16),
        WavEncoding::Float32 => (FORMAT_IEEE_FLOAT, 32u16),
    };
    let block_align = ch * bits / 8;
    let byte_rate = sample_rate * block_align as u32;
    let data_len = frames * block_align as usize;

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format_tag.to_le_bytes());
    out.extend_from_slice(&ch.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for i in 0..frames {
        for chan in channels {
            match encoding {
                WavEncoding::Pcm16 => out.extend_from_slice(&to_pcm16(chan[i]).to_le_bytes()),
                WavEncoding::Float32 => out.extend_from_slice(&(chan[i] as f32).to_le_bytes()),
            }
        }
    }
    out
}
