//! Run-length pixel masks and their reduction to centroid trajectories.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::track::{ObjectTrack, TrackSample};

/// A horizontal run of mask pixels: `length` pixels starting at
/// `(row, col_start)`. Serialized as the array `[row, col_start, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(u32, u32, u32)", into = "(u32, u32, u32)")]
pub struct Run {
    pub row: u32,
    pub col_start: u32,
    pub length: u32,
}

impl From<(u32, u32, u32)> for Run {
    fn from((row, col_start, length): (u32, u32, u32)) -> Run {
        Run {
            row,
            col_start,
            length,
        }
    }
}

impl From<Run> for (u32, u32, u32) {
    fn from(run: Run) -> (u32, u32, u32) {
        (run.row, run.col_start, run.length)
    }
}

/// One frame of mask runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskFrame {
    #[serde(rename = "k")]
    pub index: u32,
    pub runs: Vec<Run>,
}

/// Per-frame run-length masks for one object across a scene.
///
/// Frames may be sparse; a frame index absent from `frames` means no
/// detection there. An empty run list likewise counts as no detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSequence {
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub frames: Vec<MaskFrame>,
}

impl MaskSequence {
    /// Checks structural invariants: geometry, frame ordering, run bounds
    /// and per-frame run disjointness.
    pub fn validate(&self) -> Result<()> {
        if self.width < 1 || self.height < 1 {
            return Err(Error::Schema {
                pointer: "/width".into(),
                message: format!(
                    "frame geometry must be at least 1x1, got {}x{}",
                    self.width, self.height
                ),
            });
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::Schema {
                pointer: "/fps".into(),
                message: format!("frame rate must be positive, got {}", self.fps),
            });
        }
        for (i, pair) in self.frames.windows(2).enumerate() {
            if pair[1].index <= pair[0].index {
                return Err(Error::Invariant {
                    location: format!("/frames/{}", i + 1),
                    message: "frame indices must be strictly increasing".into(),
                });
            }
        }
        for (i, frame) in self.frames.iter().enumerate() {
            for (j, run) in frame.runs.iter().enumerate() {
                let location = format!("/frames/{i}/runs/{j}");
                if run.length < 1 {
                    return Err(Error::Invariant {
                        location,
                        message: "run length must be at least 1".into(),
                    });
                }
                if run.row >= self.height {
                    return Err(Error::Invariant {
                        location,
                        message: format!(
                            "row {} is outside a height of {}",
                            run.row, self.height
                        ),
                    });
                }
                if run.col_start as u64 + run.length as u64 > self.width as u64 {
                    return Err(Error::Invariant {
                        location,
                        message: format!(
                            "run [{}, {}, {}] extends past a width of {}",
                            run.row, run.col_start, run.length, self.width
                        ),
                    });
                }
            }
            if let Some(j) = first_overlap(&frame.runs) {
                return Err(Error::Invariant {
                    location: format!("/frames/{i}/runs/{j}"),
                    message: "runs within a frame must not overlap".into(),
                });
            }
        }
        Ok(())
    }

    /// Frame lookup by index.
    pub fn frame(&self, k: u32) -> Option<&MaskFrame> {
        self.frames
            .binary_search_by_key(&k, |f| f.index)
            .ok()
            .map(|i| &self.frames[i])
    }
}

/// Index of a run that overlaps an earlier run in the same row, if any.
fn first_overlap(runs: &[Run]) -> Option<usize> {
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by_key(|&i| (runs[i].row, runs[i].col_start));
    for pair in order.windows(2) {
        let (a, b) = (runs[pair[0]], runs[pair[1]]);
        if a.row == b.row && a.col_start + a.length > b.col_start {
            return Some(pair[0].max(pair[1]));
        }
    }
    None
}

/// Reduces masks to a per-frame trajectory: pixel count as mass and the
/// mean of pixel centers mapped to [-1, 1] per axis as position.
///
/// Every frame from 0 through the last listed index gets a sample; frames
/// absent from the sequence, or present with zero pixels, come out as
/// `present: false`. Positions use pixel centers (column c covers
/// [c, c+1), its center is c + 0.5), so a full-frame mask sits exactly at
/// (0, 0) and any non-empty mask sits strictly inside (-1, 1).
pub fn analyze_masks(masks: &MaskSequence) -> Result<ObjectTrack> {
    masks.validate()?;
    let count = masks.frames.last().map_or(0, |f| f.index + 1);
    let mut samples = Vec::with_capacity(count as usize);
    let mut it = masks.frames.iter().peekable();
    for k in 0..count {
        let frame = match it.peek() {
            Some(f) if f.index == k => {
                let f = *f;
                it.next();
                f
            }
            _ => {
                samples.push(TrackSample::absent(k));
                continue;
            }
        };
        if frame.runs.is_empty() {
            samples.push(TrackSample::absent(k));
            continue;
        }
        let mut mass: u64 = 0;
        let mut col_sum: u64 = 0;
        let mut row_sum: u64 = 0;
        for run in &frame.runs {
            let len = run.length as u64;
            mass += len;
            // Sum of the integer columns covered by the run.
            col_sum += len * run.col_start as u64 + len * (len - 1) / 2;
            row_sum += run.row as u64 * len;
        }
        let m = mass as f64;
        let cx = (col_sum as f64 + 0.5 * m) / m;
        let cy = (row_sum as f64 + 0.5 * m) / m;
        let w = 2.0 * cx / masks.width as f64 - 1.0;
        let h = 2.0 * cy / masks.height as f64 - 1.0;
        samples.push(TrackSample::present(k, w, h, m));
    }
    Ok(ObjectTrack {
        fps: masks.fps,
        samples,
    })
}

/// True when any run in frame `k` touches the image border.
pub fn edge_contact(masks: &MaskSequence, k: u32) -> Result<bool> {
    let frame = masks.frame(k).ok_or(Error::FrameNotFound { frame: k })?;
    Ok(frame.runs.iter().any(|run| {
        run.row == 0
            || run.row == masks.height - 1
            || run.col_start == 0
            || run.col_start + run.length == masks.width
    }))
}

/// Reads a masks JSON file and validates it.
pub fn read_masks(path: impl AsRef<Path>) -> Result<MaskSequence> {
    let path = path.as_ref();
    let masks: MaskSequence = json::read_file(path)?;
    masks.validate().map_err(|e| e.in_file(path))?;
    Ok(masks)
}

/// Writes masks as JSON. The written file reads back identical.
pub fn write_masks(masks: &MaskSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    masks.validate().map_err(|e| e.in_file(path))?;
    json::write_file(masks, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(width: u32, height: u32, frames: Vec<MaskFrame>) -> MaskSequence {
        MaskSequence {
            width,
            height,
            fps: 25.0,
            frames,
        }
    }

    fn frame(index: u32, runs: &[(u32, u32, u32)]) -> MaskFrame {
        MaskFrame {
            index,
            runs: runs.iter().map(|&r| Run::from(r)).collect(),
        }
    }

    #[test]
    fn full_frame_mask_is_centered() {
        let runs: Vec<(u32, u32, u32)> = (0..4).map(|r| (r, 0, 4)).collect();
        let masks = seq(4, 4, vec![frame(0, &runs)]);
        let track = analyze_masks(&masks).unwrap();
        let s = track.samples[0];
        assert!(s.present);
        assert_eq!(s.mass, 16.0);
        assert_eq!(s.w, 0.0);
        assert_eq!(s.h, 0.0);
    }

    #[test]
    fn single_run_counts_pixels() {
        let masks = seq(4, 4, vec![frame(0, &[(0, 0, 4)])]);
        let track = analyze_masks(&masks).unwrap();
        assert_eq!(track.samples[0].mass, 4.0);
    }

    #[test]
    fn opposite_edge_pixels_average_to_center() {
        let masks = seq(224, 224, vec![frame(0, &[(10, 0, 1), (10, 223, 1)])]);
        let track = analyze_masks(&masks).unwrap();
        assert_eq!(track.samples[0].w, 0.0);
        assert_eq!(track.samples[0].mass, 2.0);
    }

    #[test]
    fn corner_pixel_position() {
        let masks = seq(224, 224, vec![frame(0, &[(0, 0, 1)])]);
        let track = analyze_masks(&masks).unwrap();
        let s = track.samples[0];
        let expected = 2.0 * 0.5 / 224.0 - 1.0;
        assert_eq!(s.w, expected);
        assert_eq!(s.h, expected);
        assert!((s.w + 0.995536).abs() < 1e-6);
        assert_eq!(s.mass, 1.0);
    }

    #[test]
    fn skipped_and_empty_frames_are_absent() {
        let masks = seq(8, 8, vec![frame(1, &[]), frame(3, &[(2, 2, 2)])]);
        let track = analyze_masks(&masks).unwrap();
        assert_eq!(track.samples.len(), 4);
        assert!(!track.samples[0].present);
        assert!(!track.samples[1].present);
        assert!(!track.samples[2].present);
        assert!(track.samples[3].present);
    }

    #[test]
    fn run_past_the_right_edge_is_rejected() {
        let masks = seq(4, 4, vec![frame(0, &[(0, 2, 3)])]);
        let err = masks.validate().unwrap_err();
        match err {
            Error::Invariant { location, .. } => assert_eq!(location, "/frames/0/runs/0"),
            other => panic!("expected invariant violation, got {other}"),
        }
    }

    #[test]
    fn overlapping_runs_are_rejected() {
        let masks = seq(8, 8, vec![frame(0, &[(3, 0, 4), (3, 2, 2)])]);
        let err = masks.validate().unwrap_err();
        match err {
            Error::Invariant { location, .. } => assert_eq!(location, "/frames/0/runs/1"),
            other => panic!("expected invariant violation, got {other}"),
        }
    }

    #[test]
    fn abutting_runs_are_fine() {
        let masks = seq(8, 8, vec![frame(0, &[(3, 0, 4), (3, 4, 2)])]);
        masks.validate().unwrap();
    }

    #[test]
    fn row_outside_the_frame_is_rejected() {
        let masks = seq(4, 4, vec![frame(0, &[(4, 0, 1)])]);
        assert!(matches!(
            masks.validate(),
            Err(Error::Invariant { .. })
        ));
    }

    #[test]
    fn unsorted_frames_are_rejected() {
        let masks = seq(4, 4, vec![frame(2, &[(0, 0, 1)]), frame(1, &[(0, 0, 1)])]);
        match masks.validate().unwrap_err() {
            Error::Invariant { location, .. } => assert_eq!(location, "/frames/1"),
            other => panic!("expected invariant violation, got {other}"),
        }
    }

    #[test]
    fn edge_contact_cases() {
        let masks = seq(
            10,
            10,
            vec![
                frame(0, &[(0, 5, 3)]),
                frame(1, &[(2, 2, 5), (6, 3, 4)]),
                frame(2, &[(4, 0, 2)]),
                frame(3, &[(4, 8, 2)]),
                frame(4, &[(9, 4, 1)]),
            ],
        );
        assert!(edge_contact(&masks, 0).unwrap());
        assert!(!edge_contact(&masks, 1).unwrap());
        assert!(edge_contact(&masks, 2).unwrap());
        assert!(edge_contact(&masks, 3).unwrap());
        assert!(edge_contact(&masks, 4).unwrap());
        assert!(matches!(
            edge_contact(&masks, 7),
            Err(Error::FrameNotFound { frame: 7 })
        ));
    }

    #[test]
    fn round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("masks.json");
        let masks = seq(224, 224, vec![frame(0, &[(12, 40, 16), (13, 40, 18)])]);
        write_masks(&masks, &path).unwrap();
        assert_eq!(read_masks(&path).unwrap(), masks);
    }

    #[test]
    fn wire_format_uses_run_triples() {
        let masks = seq(224, 224, vec![frame(0, &[(12, 40, 16)])]);
        let json = serde_json::to_value(&masks).unwrap();
        assert_eq!(json["frames"][0]["k"], 0);
        assert_eq!(json["frames"][0]["runs"][0], serde_json::json!([12, 40, 16]));
    }
}
