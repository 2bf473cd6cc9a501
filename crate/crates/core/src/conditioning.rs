//! Track conditioning: turn raw per-frame trajectories into stable,
//! gap-free control signals on the audio sampling grid.
//!
//! The stages run in a fixed order: [`smooth`], [`fill_gaps`],
//! [`extrapolate`], [`persist_mass`], [`upsample`]. [`condition`] composes
//! them. Reordering the stages changes results, so callers wanting custom
//! pipelines should compose the stage functions themselves.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::mask::MaskSequence;
use crate::track::{ObjectTrack, TrackSample};

/// Parameters for the conditioning pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditioningConfig {
    /// Half-width H of the smoothing window, in frames. The window spans
    /// 2H+1 frames with triangular weights.
    pub smooth_half_width: u32,
    /// Number of recent per-frame deltas averaged into the extrapolation
    /// velocity.
    pub velocity_window: u32,
    /// |w| at or above which a frame counts as edge contact when no mask
    /// sequence is available.
    pub edge_threshold: f64,
    /// Audio sample rate the track is upsampled to, in Hz.
    pub audio_rate: u32,
}

impl Default for ConditioningConfig {
    fn default() -> ConditioningConfig {
        ConditioningConfig {
            smooth_half_width: 2,
            velocity_window: 5,
            edge_threshold: 0.85,
            audio_rate: 48000,
        }
    }
}

impl ConditioningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.velocity_window < 1 {
            return Err(Error::Schema {
                pointer: "/conditioning/velocity_window".into(),
                message: "velocity window must be at least 1 frame".into(),
            });
        }
        if !(self.edge_threshold > 0.0 && self.edge_threshold <= 1.0) {
            return Err(Error::Schema {
                pointer: "/conditioning/edge_threshold".into(),
                message: format!(
                    "edge threshold must be in (0, 1], got {}",
                    self.edge_threshold
                ),
            });
        }
        if self.audio_rate == 0 {
            return Err(Error::Schema {
                pointer: "/conditioning/audio_rate".into(),
                message: "audio rate must be positive".into(),
            });
        }
        Ok(())
    }
}

/// A trajectory resampled to the audio grid, ready for rendering.
///
/// All three sequences have the same length. `w_clipped` is `w_raw`
/// clamped to [-1, 1] per sample; `w_raw` keeps off-frame excursions so
/// distance attenuation can see how far out the object went. `m_max` is
/// the largest mass in the conditioned frame-rate track and normalizes
/// mass into a loudness factor downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedTrack {
    pub audio_rate: u32,
    pub m_max: f64,
    pub w_raw: Vec<f64>,
    pub w_clipped: Vec<f64>,
    pub mass: Vec<f64>,
}

impl ConditionedTrack {
    pub fn n_samples(&self) -> usize {
        self.w_raw.len()
    }
}

/// Densified view used by the stages: value triple per frame, or None
/// when absent.
fn dense_values(track: &ObjectTrack) -> Vec<Option<(f64, f64, f64)>> {
    let mut values = vec![None; track.frame_count() as usize];
    for s in &track.samples {
        if s.present {
            values[s.index as usize] = Some((s.w, s.h, s.mass));
        }
    }
    values
}

/// Triangular-weighted moving average over present neighbors.
///
/// Each present sample is replaced by the average of the present samples
/// within `half_width` frames, weighted by (H+1-|d|) and renormalized
/// over the neighbors that exist. Absent samples pass through untouched.
/// Accumulation is centered on the sample's own value and walks
/// symmetric offset pairs, so a constant stretch and a half_width of 0
/// are exact identities, and mirrored inputs smooth to exactly mirrored
/// outputs.
pub fn smooth(track: &ObjectTrack, half_width: u32) -> ObjectTrack {
    let values = dense_values(track);
    let h = half_width as i64;
    let samples = track
        .samples
        .iter()
        .map(|s| {
            if !s.present {
                return *s;
            }
            let k = s.index as i64;
            let center = (s.w, s.h, s.mass);
            let mut num = (0.0, 0.0, 0.0);
            let mut den = (h + 1) as f64;
            for d in 1..=h {
                let weight = (h + 1 - d) as f64;
                for neighbor in [k + d, k - d] {
                    let Some(&Some(v)) = usize::try_from(neighbor)
                        .ok()
                        .and_then(|i| values.get(i))
                        .map(|v| v)
                    else {
                        continue;
                    };
                    num.0 += weight * (v.0 - center.0);
                    num.1 += weight * (v.1 - center.1);
                    num.2 += weight * (v.2 - center.2);
                    den += weight;
                }
            }
            TrackSample::present(
                s.index,
                center.0 + num.0 / den,
                center.1 + num.1 / den,
                center.2 + num.2 / den,
            )
        })
        .collect();
    ObjectTrack {
        fps: track.fps,
        samples,
    }
}

/// Linear interpolation across interior gaps.
///
/// Every absent frame strictly between two present frames becomes present
/// with w, h, and mass interpolated by frame index. Leading and trailing
/// absences are left for [`extrapolate`]. The output is dense: every
/// frame index from 0 through the last gets a slot.
pub fn fill_gaps(track: &ObjectTrack) -> Result<ObjectTrack> {
    let dense = track.dense();
    if dense.present_count() == 0 {
        return Err(Error::NoReliableFrames);
    }
    let mut samples = dense.samples;
    let present: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.present)
        .map(|(i, _)| i)
        .collect();
    for pair in present.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b == a + 1 {
            continue;
        }
        let (sa, sb) = (samples[a], samples[b]);
        let span = (b - a) as f64;
        for k in a + 1..b {
            let t = (k - a) as f64 / span;
            samples[k] = TrackSample::present(
                samples[k].index,
                sa.w + t * (sb.w - sa.w),
                sa.h + t * (sb.h - sa.h),
                sa.mass + t * (sb.mass - sa.mass),
            );
        }
    }
    Ok(ObjectTrack {
        fps: track.fps,
        samples,
    })
}

/// Constant-velocity extension into leading and trailing absent runs.
///
/// The velocity is the mean per-frame delta of the last (or first) D
/// present frames, D = min(velocity_window, present frames - 1); a track
/// with a single present frame extends at zero velocity. Positions may
/// leave [-1, 1]; that is how off-frame motion is represented, and
/// nothing is clipped here. Extended frames reuse the nearest reliable
/// mass.
pub fn extrapolate(track: &ObjectTrack, velocity_window: u32) -> Result<ObjectTrack> {
    let dense = track.dense();
    if dense.present_count() == 0 {
        return Err(Error::NoReliableFrames);
    }
    let mut samples = dense.samples;
    let first = samples.iter().position(|s| s.present).unwrap();
    let last = samples.iter().rposition(|s| s.present).unwrap();
    let span = last - first;
    let d = (velocity_window as usize).min(span);

    let (s_first, s_last) = (samples[first], samples[last]);
    let (lead_vw, lead_vh, trail_vw, trail_vh) = if d == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let steps = d as f64;
        (
            (samples[first + d].w - s_first.w) / steps,
            (samples[first + d].h - s_first.h) / steps,
            (s_last.w - samples[last - d].w) / steps,
            (s_last.h - samples[last - d].h) / steps,
        )
    };

    for k in 0..first {
        let back = (first - k) as f64;
        samples[k] = TrackSample::present(
            samples[k].index,
            s_first.w - back * lead_vw,
            s_first.h - back * lead_vh,
            s_first.mass,
        );
    }
    for k in last + 1..samples.len() {
        let ahead = (k - last) as f64;
        samples[k] = TrackSample::present(
            samples[k].index,
            s_last.w + ahead * trail_vw,
            s_last.h + ahead * trail_vh,
            s_last.mass,
        );
    }
    Ok(ObjectTrack {
        fps: track.fps,
        samples,
    })
}

/// Mass hold during edge contact and off-frame stretches.
///
/// A frame is flagged when its mask touches the image border (when masks
/// are available; otherwise when |w| reaches `edge_threshold`) or when it
/// sits off-frame (|w| > 1). Within each maximal flagged run the mass is
/// held at the last value before the run, or at the first value after it
/// when the run starts at frame 0. A fully flagged track keeps its masses.
pub fn persist_mass(
    track: &ObjectTrack,
    masks: Option<&MaskSequence>,
    edge_threshold: f64,
) -> ObjectTrack {
    let mut samples = track.dense().samples;
    let flagged: Vec<bool> = samples
        .iter()
        .map(|s| {
            if !s.present {
                return false;
            }
            let edge = match masks {
                Some(m) => m.frame(s.index).is_some_and(|f| {
                    f.runs.iter().any(|run| {
                        run.row == 0
                            || run.row == m.height - 1
                            || run.col_start == 0
                            || run.col_start + run.length == m.width
                    })
                }),
                None => s.w.abs() >= edge_threshold,
            };
            edge || s.w.abs() > 1.0
        })
        .collect();

    let mut k = 0;
    while k < samples.len() {
        if !flagged[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < samples.len() && flagged[k] {
            k += 1;
        }
        let end = k;
        let anchor = if start > 0 {
            Some(start - 1)
        } else if end < samples.len() {
            Some(end)
        } else {
            None
        };
        if let Some(anchor) = anchor {
            if samples[anchor].present {
                let held = samples[anchor].mass;
                for s in &mut samples[start..end] {
                    if s.present {
                        s.mass = held;
                    }
                }
            }
        }
    }
    ObjectTrack {
        fps: track.fps,
        samples,
    }
}

/// Linear resampling from the video frame grid to the audio grid.
///
/// Frame k lands on sample round(k * audio_rate / fps); samples between
/// frame knots are linearly interpolated and samples outside the knot
/// range hold the nearest endpoint. The output has
/// round(scene_duration * audio_rate) samples regardless of how many
/// frames the track covers.
pub fn upsample(
    track: &ObjectTrack,
    scene_duration: f64,
    audio_rate: u32,
) -> Result<ConditionedTrack> {
    let n = (scene_duration * audio_rate as f64).round();
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::BadDuration {
            duration_s: scene_duration,
        });
    }
    let n = n as usize;
    let knots: Vec<&TrackSample> = track.samples.iter().filter(|s| s.present).collect();
    if knots.is_empty() {
        return Err(Error::NoReliableFrames);
    }
    let m_max = knots.iter().map(|s| s.mass).fold(f64::MIN, f64::max);
    if !(m_max > 0.0) {
        return Err(Error::ZeroMaxMass);
    }

    let rate = audio_rate as f64;
    let position = |s: &TrackSample| (s.index as f64 * rate / track.fps).round() as usize;

    let mut w_raw = vec![0.0; n];
    let mut mass = vec![0.0; n];
    let first_pos = position(knots[0]);
    for i in 0..first_pos.min(n) {
        w_raw[i] = knots[0].w;
        mass[i] = knots[0].mass;
    }
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (pa, pb) = (position(a), position(b));
        if pb <= pa {
            continue;
        }
        let span = (pb - pa) as f64;
        for i in pa..pb.min(n) {
            let t = (i - pa) as f64 / span;
            w_raw[i] = a.w + t * (b.w - a.w);
            mass[i] = a.mass + t * (b.mass - a.mass);
        }
    }
    let last = knots[knots.len() - 1];
    for i in position(last).min(n)..n {
        w_raw[i] = last.w;
        mass[i] = last.mass;
    }

    let w_clipped = w_raw.iter().map(|&w| w.clamp(-1.0, 1.0)).collect();
    Ok(ConditionedTrack {
        audio_rate,
        m_max,
        w_raw,
        w_clipped,
        mass,
    })
}

/// The full conditioning pipeline in its fixed stage order.
pub fn condition(
    track: &ObjectTrack,
    masks: Option<&MaskSequence>,
    scene_duration: f64,
    config: &ConditioningConfig,
) -> Result<ConditionedTrack> {
    config.validate()?;
    let smoothed = smooth(track, config.smooth_half_width);
    let filled = fill_gaps(&smoothed)?;
    let extended = extrapolate(&filled, config.velocity_window)?;
    let persisted = persist_mass(&extended, masks, config.edge_threshold);
    upsample(&persisted, scene_duration, config.audio_rate)
}

#[derive(Serialize, Deserialize)]
struct DumpSidecar {
    n_samples: usize,
    audio_rate: u32,
    m_max: f64,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes a conditioned track as its debug dump: little-endian float32
/// planar arrays (w_raw, then w_clipped, then mass) plus a JSON sidecar
/// at `<path>.json` with {n_samples, audio_rate, m_max}. Values are
/// narrowed to float32; the dump is for inspection, not for lossless
/// round-trips of float64 content.
pub fn write_dump(track: &ConditionedTrack, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = track.n_samples();
    let mut bytes = Vec::with_capacity(n * 12);
    for plane in [&track.w_raw, &track.w_clipped, &track.mass] {
        for &v in plane.iter() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))?;
    json::write_file(
        &DumpSidecar {
            n_samples: n,
            audio_rate: track.audio_rate,
            m_max: track.m_max,
        },
        &sidecar_path(path),
    )
}

/// Reads a debug dump written by [`write_dump`].
pub fn read_dump(path: impl AsRef<Path>) -> Result<ConditionedTrack> {
    let path = path.as_ref();
    let sidecar: DumpSidecar = json::read_file(&sidecar_path(path))?;
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    let expected = sidecar.n_samples as u64 * 12;
    if bytes.len() as u64 != expected {
        return Err(Error::TruncatedData {
            expected,
            found: bytes.len() as u64,
        }
        .in_file(path));
    }
    let mut planes = bytes.chunks_exact(4).map(|c| {
        f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64
    });
    let mut take = |n: usize| planes.by_ref().take(n).collect::<Vec<f64>>();
    let w_raw = take(sidecar.n_samples);
    let w_clipped = take(sidecar.n_samples);
    let mass = take(sidecar.n_samples);
    Ok(ConditionedTrack {
        audio_rate: sidecar.audio_rate,
        m_max: sidecar.m_max,
        w_raw,
        w_clipped,
        mass,
    })
}
