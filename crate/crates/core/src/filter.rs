//! Corpus selection: keep videos whose scenes carry a single, clearly
//! placed or clearly moving object of usable size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::SceneManifest;
use crate::mask::{analyze_masks, read_masks};
use crate::track::ObjectTrack;

/// Thresholds of the selection predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Videos with more scenes than this are rejected outright.
    pub max_scenes: usize,
    /// Minimum position range (max w - min w) that counts as movement,
    /// on the [-1, 1] axis.
    pub motion_threshold: f64,
    /// Minimum mean |w| that counts as sitting off-center.
    pub offcenter_threshold: f64,
    /// Objects at or below this mean area fraction of the frame are too
    /// small.
    pub min_area_frac: f64,
    /// Objects at or above this mean area fraction are too large.
    pub max_area_frac: f64,
}

impl Default for FilterConfig {
    fn default() -> FilterConfig {
        FilterConfig {
            max_scenes: 3,
            motion_threshold: 0.3,
            offcenter_threshold: 0.3,
            min_area_frac: 0.02,
            max_area_frac: 0.60,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("motion_threshold", self.motion_threshold),
            ("offcenter_threshold", self.offcenter_threshold),
            ("min_area_frac", self.min_area_frac),
            ("max_area_frac", self.max_area_frac),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(Error::Schema {
                    pointer: format!("/filter/{name}"),
                    message: format!("{name} must be positive, got {value}"),
                });
            }
        }
        if self.min_area_frac >= self.max_area_frac {
            return Err(Error::Schema {
                pointer: "/filter/min_area_frac".into(),
                message: format!(
                    "min_area_frac {} must be below max_area_frac {}",
                    self.min_area_frac, self.max_area_frac
                ),
            });
        }
        Ok(())
    }
}

/// Why a video was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    TooManyScenes { count: usize, max: usize },
    NoQualifyingObject { scene: usize },
    ObjectTooSmall { scene: usize, object: String },
    ObjectTooLarge { scene: usize, object: String },
}

/// Outcome of the predicate for one video. An accepted video carries no
/// reasons; a rejected one lists every check that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub video_id: String,
    pub accepted: bool,
    pub reasons: Vec<RejectReason>,
}

struct TrackStats {
    mean_area: f64,
    mean_abs_w: f64,
    range_w: f64,
}

fn track_stats(track: &ObjectTrack, frame_pixels: f64) -> Option<TrackStats> {
    let mut count = 0usize;
    let mut mass_sum = 0.0;
    let mut abs_sum = 0.0;
    let mut min_w = f64::INFINITY;
    let mut max_w = f64::NEG_INFINITY;
    for s in track.samples.iter().filter(|s| s.present) {
        count += 1;
        mass_sum += s.mass;
        abs_sum += s.w.abs();
        min_w = min_w.min(s.w);
        max_w = max_w.max(s.w);
    }
    if count == 0 {
        return None;
    }
    // Masses are pixel counts, so the sum is exact and the mean area
    // fraction is rounded once; a track parked exactly on an area
    // threshold compares predictably against it.
    Some(TrackStats {
        mean_area: mass_sum / (count as f64 * frame_pixels),
        mean_abs_w: abs_sum / count as f64,
        range_w: max_w - min_w,
    })
}

/// Applies the selection predicate to one video.
///
/// A video is accepted when it has at most `max_scenes` scenes and at
/// least one scene holds exactly one object whose mean area fraction
/// lies strictly inside (min_area_frac, max_area_frac) and which either
/// sits off-center on average (mean |w| above the threshold) or moves
/// (position range above the threshold). Rejection reasons are granular:
/// an out-of-size sole object is reported as too small or too large; any
/// other way a scene fails is reported as having no qualifying object.
pub fn filter_video(manifest: &SceneManifest, cfg: &FilterConfig) -> Result<FilterVerdict> {
    cfg.validate()?;
    manifest.validate()?;
    let frame_pixels = manifest.width as f64 * manifest.height as f64;

    let mut reasons = Vec::new();
    if manifest.scenes.len() > cfg.max_scenes {
        reasons.push(RejectReason::TooManyScenes {
            count: manifest.scenes.len(),
            max: cfg.max_scenes,
        });
    }

    let mut any_qualifies = false;
    for (i, scene) in manifest.scenes.iter().enumerate() {
        if scene.objects.len() != 1 {
            reasons.push(RejectReason::NoQualifyingObject { scene: i });
            continue;
        }
        let object = &scene.objects[0];
        let track = load_track(manifest, i, object)?;
        let Some(stats) = track_stats(&track, frame_pixels) else {
            reasons.push(RejectReason::NoQualifyingObject { scene: i });
            continue;
        };

        let mut area_ok = true;
        if stats.mean_area <= cfg.min_area_frac {
            area_ok = false;
            reasons.push(RejectReason::ObjectTooSmall {
                scene: i,
                object: object.id.clone(),
            });
        } else if stats.mean_area >= cfg.max_area_frac {
            area_ok = false;
            reasons.push(RejectReason::ObjectTooLarge {
                scene: i,
                object: object.id.clone(),
            });
        }
        let moving_or_offcenter = stats.mean_abs_w > cfg.offcenter_threshold
            || stats.range_w > cfg.motion_threshold;
        if !moving_or_offcenter {
            reasons.push(RejectReason::NoQualifyingObject { scene: i });
        }
        if area_ok && moving_or_offcenter {
            any_qualifies = true;
        }
    }

    let accepted = any_qualifies && manifest.scenes.len() <= cfg.max_scenes;
    Ok(FilterVerdict {
        video_id: manifest.video_id.clone(),
        accepted,
        reasons: if accepted { Vec::new() } else { reasons },
    })
}

fn load_track(
    manifest: &SceneManifest,
    scene: usize,
    object: &crate::manifest::SceneObject,
) -> Result<ObjectTrack> {
    if let Some(track) = &object.track {
        return Ok(track.clone());
    }
    let missing = || Error::MissingTrack {
        scene,
        object: object.id.clone(),
    };
    let Some(path) = &object.masks_path else {
        return Err(missing());
    };
    let masks = read_masks(manifest.resolve(path)).map_err(|_| missing())?;
    analyze_masks(&masks).map_err(|_| missing())
}
