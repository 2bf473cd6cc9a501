//! In-memory audio buffers.
//!
//! Samples are full-scale floats with nominal range [-1, 1], stored as f64.
//! Keeping the working precision at f64 lets the renderer and the metrics
//! hold their tight tolerances (the equal-power identity is checked to 1e-9
//! relative on rendered samples); WAV files still store pcm16 or float32.

use crate::error::{Error, Result};

/// Single-channel audio at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoBuffer {
    /// Sample rate in Hz.
    pub sample_rate: u32,
    /// Amplitude samples.
    pub samples: Vec<f64>,
}

impl MonoBuffer {
    pub fn new(sample_rate: u32, samples: Vec<f64>) -> MonoBuffer {
        MonoBuffer {
            sample_rate,
            samples,
        }
    }

    /// A buffer of `len` zero samples.
    pub fn silent(sample_rate: u32, len: usize) -> MonoBuffer {
        MonoBuffer::new(sample_rate, vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Two-channel audio at a fixed sample rate. Left and right always have the
/// same length.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoBuffer {
    /// Sample rate in Hz.
    pub sample_rate: u32,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl StereoBuffer {
    /// Builds a stereo buffer, rejecting channels of different lengths.
    pub fn new(sample_rate: u32, left: Vec<f64>, right: Vec<f64>) -> Result<StereoBuffer> {
        if left.len() != right.len() {
            return Err(Error::LengthMismatch {
                expected: left.len(),
                found: right.len(),
            });
        }
        Ok(StereoBuffer {
            sample_rate,
            left,
            right,
        })
    }

    /// A buffer of `len` zero samples per channel.
    pub fn silent(sample_rate: u32, len: usize) -> StereoBuffer {
        StereoBuffer {
            sample_rate,
            left: vec![0.0; len],
            right: vec![0.0; len],
        }
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.left.len() as f64 / self.sample_rate as f64
    }

    /// Largest absolute sample value across both channels (0.0 when empty).
    pub fn peak(&self) -> f64 {
        self.left
            .iter()
            .chain(self.right.iter())
            .fold(0.0_f64, |acc, s| acc.max(s.abs()))
    }

    /// The same audio with left and right exchanged.
    pub fn swapped(&self) -> StereoBuffer {
        StereoBuffer {
            sample_rate: self.sample_rate,
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

/// A decoded audio file: one or two channels.
#[derive(Debug, Clone, PartialEq)]
pub enum AudioBuffer {
    Mono(MonoBuffer),
    Stereo(StereoBuffer),
}

impl AudioBuffer {
    pub fn sample_rate(&self) -> u32 {
        match self {
            AudioBuffer::Mono(b) => b.sample_rate,
            AudioBuffer::Stereo(b) => b.sample_rate,
        }
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        match self {
            AudioBuffer::Mono(b) => b.len(),
            AudioBuffer::Stereo(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> u16 {
        match self {
            AudioBuffer::Mono(_) => 1,
            AudioBuffer::Stereo(_) => 2,
        }
    }
}

impl From<MonoBuffer> for AudioBuffer {
    fn from(b: MonoBuffer) -> AudioBuffer {
        AudioBuffer::Mono(b)
    }
}

impl From<StereoBuffer> for AudioBuffer {
    fn from(b: StereoBuffer) -> AudioBuffer {
        AudioBuffer::Stereo(b)
    }
}
