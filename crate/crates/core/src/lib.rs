//! Object-aware stereo rendering and evaluation.
//!
//! The pipeline turns per-object segmentation data and mono stems into a
//! stereo mix whose image follows each object across the frame, then
//! measures how well a mix (this one or any other) matches the motion:
//!
//! 1. [`mask`] reduces run-length masks to horizontal trajectories.
//! 2. [`conditioning`] cleans a trajectory and lifts it to audio rate.
//! 3. [`spatial`] pans and attenuates stems and mixes whole scenes.
//! 4. [`metrics`] scores stereo audio against a trajectory.
//! 5. [`filter`] decides which clips are worth rendering at all.
//! 6. [`synth`] builds closed-form test scenes with known answers.
//!
//! File formats (JSON tracks, masks, manifests, and WAV audio) live in
//! [`track`], [`mask`], [`manifest`], and [`wav`].

pub mod audio;
pub mod conditioning;
pub mod error;
pub mod filter;
pub mod manifest;
pub mod mask;
pub mod metrics;
pub mod spatial;
pub mod synth;
pub mod track;
pub mod wav;

pub(crate) mod json;

// Compile and run every code block in the guide as a doc-test, so the
// book cannot drift from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/masks.md")]
    mod masks {}
    #[doc = include_str!("../../../book/src/conditioning.md")]
    mod conditioning {}
    #[doc = include_str!("../../../book/src/rendering.md")]
    mod rendering {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/filtering.md")]
    mod filtering {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
}

pub use audio::{AudioBuffer, MonoBuffer, StereoBuffer};
pub use conditioning::{condition, ConditionedTrack, ConditioningConfig};
pub use error::{Error, Result};
pub use filter::{filter_video, FilterConfig, FilterVerdict, RejectReason};
pub use manifest::{read_manifest, write_manifest, SceneManifest};
pub use mask::{analyze_masks, read_masks, write_masks, MaskSequence};
pub use metrics::{bas, mono_check, stereo_score, BasReport, BinLabel};
pub use spatial::{pan_gains, render_object, render_video, MixConfig, PanGains};
pub use track::{read_track, write_track, ObjectTrack, TrackSample};
