//! Stereo evaluation: where does the energy sit, does it track the
//! object, and is the file really stereo at all.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::audio::StereoBuffer;
use crate::conditioning::ConditionedTrack;
use crate::error::{Error, Result};
use crate::track::ObjectTrack;

/// Default half-width of the center bin on the [-1, 1] axis.
pub const DEFAULT_CENTER_BAND: f64 = 0.05;

/// Default mean-absolute-difference threshold below which a file counts
/// as effectively mono.
pub const DEFAULT_MONO_THRESHOLD: f64 = 1e-5;

/// Energy sums below 1e-10 per sample mark a window as silent: silence
/// carries no spatial evidence, so such windows are skipped rather than
/// forced into the center bin.
const SILENCE_FLOOR: f64 = 1e-10;

/// Spatial bin of one video frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinLabel {
    Left,
    Center,
    Right,
    Skipped,
}

/// Per-frame bin labels at a video frame rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSequence {
    pub fps: f64,
    pub bins: Vec<BinLabel>,
}

/// Per-video-frame audio position estimate.
///
/// The audio is cut into windows of round(sample_rate / fps) samples (the
/// last window may be short). Per window, with E_L and E_R the summed
/// squared samples per channel: a silent window (E_L + E_R below the
/// silence floor) yields None; otherwise the balance
/// b = (E_R - E_L) / (E_R + E_L) is mapped through asin(b) / (pi/2).
/// That mapping exactly inverts the equal-power pan law, so rendering at
/// a position and estimating it back is an identity up to windowing.
/// Swapping the channels negates every estimate bit for bit.
pub fn energy_center(audio: &StereoBuffer, fps: f64) -> Result<Vec<Option<f64>>> {
    if audio.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let window = (audio.sample_rate as f64 / fps).round();
    if !(window >= 1.0) || !window.is_finite() {
        return Err(Error::Invariant {
            location: "fps".into(),
            message: format!(
                "no analysis window: {} Hz audio at {} frames/s",
                audio.sample_rate, fps
            ),
        });
    }
    let window = window as usize;
    let mut centers = Vec::with_capacity(audio.len().div_ceil(window));
    for (l, r) in audio.left.chunks(window).zip(audio.right.chunks(window)) {
        let e_l: f64 = l.iter().map(|&x| x * x).sum();
        let e_r: f64 = r.iter().map(|&x| x * x).sum();
        if e_l + e_r < SILENCE_FLOOR * l.len() as f64 {
            centers.push(None);
            continue;
        }
        let balance = ((e_r - e_l) / (e_r + e_l)).clamp(-1.0, 1.0);
        centers.push(Some(balance.asin() / FRAC_PI_2));
    }
    Ok(centers)
}

/// Bins one position: within `center_band` of zero (inclusive) is Center,
/// below is Left, above is Right; a missing position is Skipped.
pub fn quantize_bin(position: Option<f64>, center_band: f64) -> BinLabel {
    match position {
        None => BinLabel::Skipped,
        Some(p) if p.abs() <= center_band => BinLabel::Center,
        Some(p) if p < 0.0 => BinLabel::Left,
        Some(_) => BinLabel::Right,
    }
}

/// Bins a position sequence at a frame rate.
pub fn quantize_bins(positions: &[Option<f64>], center_band: f64, fps: f64) -> BinSequence {
    BinSequence {
        fps,
        bins: positions
            .iter()
            .map(|&p| quantize_bin(p, center_band))
            .collect(),
    }
}

/// Bin-alignment score with in-frame/off-frame splits.
///
/// A split with no qualifying frames is None, never 0: a score of 0 means
/// every frame mismatched, which is a very different claim from "there
/// were no off-frame frames to check".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasReport {
    /// Match fraction over frames where the object position satisfies
    /// |w| <= 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_frame: Option<f64>,
    /// Match fraction over frames where |w| > 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub off_frame: Option<f64>,
    /// Match fraction over all evaluated frames.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined: Option<f64>,
    /// Frames excluded because the audio window was silent or the object
    /// had no data there.
    pub frames_skipped: usize,
}

fn duration_gate(track_s: f64, audio_s: f64, fps: f64) -> Result<()> {
    if (track_s - audio_s).abs() > 1.0 / fps + 1e-9 {
        return Err(Error::DurationMismatch { track_s, audio_s });
    }
    Ok(())
}

fn bas_core(
    object_w: impl Fn(usize) -> Option<f64>,
    audio: &StereoBuffer,
    fps: f64,
    center_band: f64,
) -> Result<BasReport> {
    let centers = energy_center(audio, fps)?;
    let mut skipped = 0usize;
    let (mut in_match, mut in_total) = (0usize, 0usize);
    let (mut off_match, mut off_total) = (0usize, 0usize);
    for (k, &center) in centers.iter().enumerate() {
        let (Some(w), Some(a)) = (object_w(k), center) else {
            skipped += 1;
            continue;
        };
        let object_bin = quantize_bin(Some(w.clamp(-1.0, 1.0)), center_band);
        let audio_bin = quantize_bin(Some(a), center_band);
        let matched = (object_bin == audio_bin) as usize;
        if w.abs() <= 1.0 {
            in_match += matched;
            in_total += 1;
        } else {
            off_match += matched;
            off_total += 1;
        }
    }
    let fraction = |m: usize, t: usize| (t > 0).then(|| m as f64 / t as f64);
    Ok(BasReport {
        in_frame: fraction(in_match, in_total),
        off_frame: fraction(off_match, off_total),
        combined: fraction(in_match + off_match, in_total + off_total),
        frames_skipped: skipped,
    })
}

/// Bin-alignment score between a raw frame-rate track and stereo audio.
///
/// Per frame, the object's position (clipped to [-1, 1]) and the audio's
/// energy-center estimate are quantized into Left/Center/Right bins; the
/// score is the fraction of frames whose bins agree. Frames with silent
/// audio or no object detection are excluded from every count. The track
/// and audio must cover the same duration within one frame.
pub fn bas(track: &ObjectTrack, audio: &StereoBuffer, center_band: f64) -> Result<BasReport> {
    duration_gate(track.duration_s(), audio.duration_s(), track.fps)?;
    let dense = track.dense();
    let object_w = |k: usize| {
        dense
            .samples
            .get(k)
            .filter(|s| s.present)
            .map(|s| s.w)
    };
    bas_core(object_w, audio, track.fps, center_band)
}

/// Bin-alignment score for a conditioned (audio-rate) track.
///
/// The track is decimated back to the video frame rate by sampling it at
/// round(k * audio_rate / fps), so the object and audio sequences share
/// a clock. The raw (unclipped) position decides the in-frame/off-frame
/// split; the clipped position decides the bin.
pub fn bas_conditioned(
    ct: &ConditionedTrack,
    fps: f64,
    audio: &StereoBuffer,
    center_band: f64,
) -> Result<BasReport> {
    let track_s = ct.n_samples() as f64 / ct.audio_rate as f64;
    duration_gate(track_s, audio.duration_s(), fps)?;
    let rate = ct.audio_rate as f64;
    let object_w = |k: usize| {
        let i = (k as f64 * rate / fps).round() as usize;
        ct.w_raw.get(i).copied()
    };
    bas_core(object_w, audio, fps, center_band)
}

/// How stereo a track is: sum of |L-R| over sum of |L|+|R|.
///
/// Identical channels score exactly 0, a fully hard-panned track scores
/// exactly 1, and independent noise lands near 1/sqrt(2). All-silent
/// audio scores 0 by convention. The score does not change under global
/// gain.
pub fn stereo_score(audio: &StereoBuffer) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..audio.len() {
        let (l, r) = (audio.left[i], audio.right[i]);
        num += (l - r).abs();
        den += l.abs() + r.abs();
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Verdict of the effective-mono check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonoReport {
    pub mean_abs_diff: f64,
    pub is_mono: bool,
}

/// Flags files whose channels are nearly identical.
///
/// mean_abs_diff is the average |L-R| on full-scale floats; the file is
/// mono when it is strictly below the threshold, so a file sitting
/// exactly at the threshold is kept as stereo.
pub fn mono_check(audio: &StereoBuffer, threshold: f64) -> MonoReport {
    let n = audio.len();
    let sum: f64 = (0..n).map(|i| (audio.left[i] - audio.right[i]).abs()).sum();
    let mean_abs_diff = if n == 0 { 0.0 } else { sum / n as f64 };
    MonoReport {
        mean_abs_diff,
        is_mono: mean_abs_diff < threshold,
    }
}

/// All per-file metrics in one report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bas: Option<BasReport>,
    pub stereo_score: f64,
    pub mono: MonoReport,
}
