//! Object trajectories: per-frame presence, normalized position and mass.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;

/// One frame of an object track.
///
/// `w` and `h` are the mask centroid normalized to [-1, 1] per axis (left
/// and top edges map to -1); `mass` is the pixel count of the mask. When
/// `present` is false the detector produced nothing for this frame and the
/// remaining values are normalized to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample")]
pub struct TrackSample {
    #[serde(rename = "k")]
    pub index: u32,
    pub present: bool,
    pub w: f64,
    pub h: f64,
    pub mass: f64,
}

impl TrackSample {
    /// A present detection.
    pub fn present(index: u32, w: f64, h: f64, mass: f64) -> TrackSample {
        TrackSample {
            index,
            present: true,
            w,
            h,
            mass,
        }
    }

    /// A missing detection.
    pub fn absent(index: u32) -> TrackSample {
        TrackSample {
            index,
            present: false,
            w: 0.0,
            h: 0.0,
            mass: 0.0,
        }
    }
}

#[derive(Deserialize)]
struct RawSample {
    k: u32,
    present: bool,
    #[serde(default)]
    w: Option<f64>,
    #[serde(default)]
    h: Option<f64>,
    #[serde(default)]
    mass: Option<f64>,
}

impl TryFrom<RawSample> for TrackSample {
    type Error = String;

    fn try_from(raw: RawSample) -> std::result::Result<TrackSample, String> {
        if !raw.present {
            return Ok(TrackSample::absent(raw.k));
        }
        let need = |field: &str, v: Option<f64>| {
            v.ok_or_else(|| format!("present sample is missing `{field}`"))
        };
        let w = need("w", raw.w)?;
        let h = need("h", raw.h)?;
        let mass = need("mass", raw.mass)?;
        if !w.is_finite() || !h.is_finite() {
            return Err("present sample needs finite w and h".into());
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err("present sample needs mass > 0".into());
        }
        Ok(TrackSample::present(raw.k, w, h, mass))
    }
}

/// A per-frame object trajectory at a video frame rate.
///
/// Samples are listed in strictly increasing frame order. The list may be
/// sparse; a missing index means the same thing as an explicit sample with
/// `present: false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTrack {
    /// Video frame rate the samples are indexed against.
    pub fps: f64,
    pub samples: Vec<TrackSample>,
}

impl ObjectTrack {
    /// Checks structural invariants: positive frame rate, strictly
    /// increasing frame indices, and sane present samples.
    pub fn validate(&self) -> Result<()> {
        self.validate_at("")
    }

    pub(crate) fn validate_at(&self, prefix: &str) -> Result<()> {
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::Schema {
                pointer: format!("{prefix}/fps"),
                message: format!("frame rate must be positive, got {}", self.fps),
            });
        }
        for (i, pair) in self.samples.windows(2).enumerate() {
            if pair[1].index <= pair[0].index {
                return Err(Error::Invariant {
                    location: format!("{prefix}/samples/{}", i + 1),
                    message: "frame indices must be strictly increasing".into(),
                });
            }
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.present {
                if !s.w.is_finite() || !s.h.is_finite() {
                    return Err(Error::Invariant {
                        location: format!("{prefix}/samples/{i}"),
                        message: "present sample needs finite w and h".into(),
                    });
                }
                if !(s.mass > 0.0) || !s.mass.is_finite() {
                    return Err(Error::Invariant {
                        location: format!("{prefix}/samples/{i}"),
                        message: "present sample needs mass > 0".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Number of frames the track spans: one past the last frame index.
    pub fn frame_count(&self) -> u32 {
        self.samples.last().map_or(0, |s| s.index + 1)
    }

    /// Duration covered by the track, in seconds.
    pub fn duration_s(&self) -> f64 {
        self.frame_count() as f64 / self.fps
    }

    /// Number of present samples.
    pub fn present_count(&self) -> usize {
        self.samples.iter().filter(|s| s.present).count()
    }

    /// The track with every frame index from 0 through the last one given an
    /// explicit slot; missing slots become absent samples.
    pub fn dense(&self) -> ObjectTrack {
        let count = self.frame_count();
        let mut samples = Vec::with_capacity(count as usize);
        let mut it = self.samples.iter().peekable();
        for k in 0..count {
            match it.peek() {
                Some(s) if s.index == k => {
                    samples.push(**s);
                    it.next();
                }
                _ => samples.push(TrackSample::absent(k)),
            }
        }
        ObjectTrack {
            fps: self.fps,
            samples,
        }
    }
}

/// Reads a track JSON file and validates it.
pub fn read_track(path: impl AsRef<Path>) -> Result<ObjectTrack> {
    let path = path.as_ref();
    let track: ObjectTrack = json::read_file(path)?;
    track.validate().map_err(|e| e.in_file(path))?;
    Ok(track)
}

/// Writes a track as JSON. The written file reads back identical.
pub fn write_track(track: &ObjectTrack, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    track.validate().map_err(|e| e.in_file(path))?;
    json::write_file(track, path)
}
