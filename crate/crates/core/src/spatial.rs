//! Stereo rendering: equal-power panning, mass-driven loudness, per-object
//! rendering, scene mixing, and whole-video composition.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::audio::{AudioBuffer, MonoBuffer, StereoBuffer};
use crate::conditioning::{condition, ConditionedTrack, ConditioningConfig};
use crate::error::{Error, Result};
use crate::manifest::SceneManifest;
use crate::mask::{analyze_masks, read_masks};
use crate::track::ObjectTrack;
use crate::wav::read_wav;

/// Left/right gains for one panning position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanGains {
    pub g_left: f64,
    pub g_right: f64,
}

/// Equal-power panning gains for a position in [-1, 1].
///
/// The law is g_left = cos(pi/4 * (w+1)), g_right = sin(pi/4 * (w+1)),
/// computed here through the identity cos(pi/4 * (w+1)) =
/// sin(pi/4 * (1-w)) so that the endpoints come out exact: w = -1 gives
/// (1, 0), w = +1 gives (0, 1), and negating w swaps the two gains
/// bit for bit. The squared gains always sum to 1 within 1e-12.
pub fn pan_gains(w_clipped: f64) -> Result<PanGains> {
    if !(-1.0..=1.0).contains(&w_clipped) {
        return Err(Error::OutOfRange { value: w_clipped });
    }
    Ok(PanGains {
        g_left: (FRAC_PI_4 * (1.0 - w_clipped)).sin(),
        g_right: (FRAC_PI_4 * (1.0 + w_clipped)).sin(),
    })
}

/// Mass-and-distance loudness factor.
///
/// The object's pixel mass is normalized by the largest mass it ever had,
/// then attenuated once the unclipped position leaves the frame:
/// v = (mass/m_max) / (1 + max(0, |w_raw|-1)^2). An object that slid one
/// full frame-width off screen (w_raw = 2) therefore still sounds at half
/// its in-frame level rather than vanishing.
pub fn loudness(mass: f64, m_max: f64, w_raw: f64) -> Result<f64> {
    if !(m_max > 0.0) {
        return Err(Error::ZeroMaxMass);
    }
    let overshoot = (w_raw.abs() - 1.0).max(0.0);
    Ok((mass / m_max) * (1.0 / (1.0 + overshoot * overshoot)))
}

/// Renders a mono stem into stereo along a conditioned trajectory.
///
/// Per sample n: left[n] = v[n] * g_left[n] * stem[n] and right[n] =
/// v[n] * g_right[n] * stem[n], with gains from the clipped position and
/// loudness from the raw position and mass. The stem must be at the
/// track's sample rate and at least as long as the track; extra samples
/// are dropped.
pub fn render_object(stem: &MonoBuffer, ct: &ConditionedTrack) -> Result<StereoBuffer> {
    if stem.sample_rate != ct.audio_rate {
        return Err(Error::RateMismatch {
            expected: ct.audio_rate,
            found: stem.sample_rate,
        });
    }
    let n = ct.n_samples();
    if stem.samples.len() < n {
        return Err(Error::StemTooShort {
            needed: n,
            found: stem.samples.len(),
        });
    }
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for i in 0..n {
        let v = loudness(ct.mass[i], ct.m_max, ct.w_raw[i])?;
        let gains = pan_gains(ct.w_clipped[i])?;
        let a = stem.samples[i];
        left.push(v * gains.g_left * a);
        right.push(v * gains.g_right * a);
    }
    StereoBuffer::new(ct.audio_rate, left, right)
}

/// Mix parameters for combining object stems with background ambience.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixConfig {
    /// Linear gain applied to the background bed (default 0.25, about
    /// -12 dB under the objects).
    pub background_gain: f64,
    /// Peak amplitude the mix may reach before normalization kicks in.
    pub peak_ceiling: f64,
    /// When true, a mix peaking above the ceiling is scaled down globally
    /// to hit the ceiling; hard clipping is never applied.
    pub normalize_on_clip: bool,
}

impl Default for MixConfig {
    fn default() -> MixConfig {
        MixConfig {
            background_gain: 0.25,
            peak_ceiling: 0.99,
            normalize_on_clip: true,
        }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.background_gain >= 0.0) {
            return Err(Error::Schema {
                pointer: "/mix/background_gain".into(),
                message: format!(
                    "background gain must be nonnegative, got {}",
                    self.background_gain
                ),
            });
        }
        if !(self.peak_ceiling > 0.0 && self.peak_ceiling <= 1.0) {
            return Err(Error::Schema {
                pointer: "/mix/peak_ceiling".into(),
                message: format!("peak ceiling must be in (0, 1], got {}", self.peak_ceiling),
            });
        }
        Ok(())
    }
}

/// Peak and RMS of one rendered stem, measured over both channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StemLevels {
    pub peak: f64,
    pub rms: f64,
}

/// What the mixer did: the global scale applied (1.0 when the mix stayed
/// under the ceiling), the final output peak, and per-stem levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixReport {
    pub scale: f64,
    pub mix_peak: f64,
    pub stems: Vec<StemLevels>,
}

fn stem_levels(stem: &StereoBuffer) -> StemLevels {
    let mut sum_sq = 0.0;
    for i in 0..stem.len() {
        sum_sq += stem.left[i] * stem.left[i] + stem.right[i] * stem.right[i];
    }
    let denom = (stem.len() * 2).max(1) as f64;
    StemLevels {
        peak: stem.peak(),
        rms: (sum_sq / denom).sqrt(),
    }
}

/// Sums object stems and a gain-scaled background into one stereo track.
///
/// All object stems must share one length and sample rate; the background
/// is truncated or zero-padded to that length (a mono background feeds
/// both channels equally). Summation order is fixed: stems in list order,
/// then the background, so the mix is deterministic. If the summed peak
/// exceeds the ceiling and normalization is on, the whole mix is scaled
/// by ceiling/peak and that factor is reported.
pub fn mix_scene(
    object_stems: &[StereoBuffer],
    background: &AudioBuffer,
    cfg: &MixConfig,
) -> Result<(StereoBuffer, MixReport)> {
    cfg.validate()?;
    let sample_rate = object_stems
        .first()
        .map(|s| s.sample_rate)
        .unwrap_or_else(|| background.sample_rate());
    for stem in object_stems {
        if stem.sample_rate != sample_rate {
            return Err(Error::RateMismatch {
                expected: sample_rate,
                found: stem.sample_rate,
            });
        }
    }
    if background.sample_rate() != sample_rate {
        return Err(Error::RateMismatch {
            expected: sample_rate,
            found: background.sample_rate(),
        });
    }
    let n = object_stems
        .first()
        .map(|s| s.len())
        .unwrap_or_else(|| background.len());
    for stem in object_stems {
        if stem.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: stem.len(),
            });
        }
    }

    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    for stem in object_stems {
        for i in 0..n {
            left[i] += stem.left[i];
            right[i] += stem.right[i];
        }
    }
    let g = cfg.background_gain;
    match background {
        AudioBuffer::Mono(bg) => {
            for i in 0..n.min(bg.samples.len()) {
                left[i] += g * bg.samples[i];
                right[i] += g * bg.samples[i];
            }
        }
        AudioBuffer::Stereo(bg) => {
            for i in 0..n.min(bg.len()) {
                left[i] += g * bg.left[i];
                right[i] += g * bg.right[i];
            }
        }
    }

    let mut mix = StereoBuffer::new(sample_rate, left, right)?;
    let peak = mix.peak();
    let mut scale = 1.0;
    if peak > cfg.peak_ceiling && cfg.normalize_on_clip {
        scale = cfg.peak_ceiling / peak;
        for v in mix.left.iter_mut().chain(mix.right.iter_mut()) {
            *v *= scale;
        }
    }
    let report = MixReport {
        scale,
        mix_peak: mix.peak(),
        stems: object_stems.iter().map(stem_levels).collect(),
    };
    Ok((mix, report))
}

/// Truncates or zero-pads a background buffer to the scene length.
fn fit_background(bg: AudioBuffer, n: usize) -> AudioBuffer {
    match bg {
        AudioBuffer::Mono(mut b) => {
            b.samples.resize(n, 0.0);
            AudioBuffer::Mono(b)
        }
        AudioBuffer::Stereo(mut b) => {
            b.left.resize(n, 0.0);
            b.right.resize(n, 0.0);
            AudioBuffer::Stereo(b)
        }
    }
}

/// Renders every scene of a manifest and lays the mixes onto one
/// continuous timeline.
///
/// Object trajectories come from inline tracks or from mask files (which
/// are analyzed on the fly), get conditioned, and drive the rendering of
/// their mono stems; each scene is mixed with its background and written
/// at round(start_s * audio_rate). Gaps between scenes stay silent. The
/// total length is round(last end_s * audio_rate) samples. Errors are
/// annotated with the scene index and object id they came from.
pub fn render_video(
    manifest: &SceneManifest,
    ccfg: &ConditioningConfig,
    mcfg: &MixConfig,
) -> Result<(StereoBuffer, Vec<MixReport>)> {
    manifest.validate()?;
    ccfg.validate()?;
    mcfg.validate()?;
    let rate = ccfg.audio_rate;
    let total = manifest
        .scenes
        .last()
        .map_or(0, |s| (s.end_s * rate as f64).round() as usize);
    let mut out = StereoBuffer::silent(rate, total);
    let mut reports = Vec::with_capacity(manifest.scenes.len());

    for (i, scene) in manifest.scenes.iter().enumerate() {
        let duration = scene.end_s - scene.start_s;
        let mut stems = Vec::with_capacity(scene.objects.len());
        for object in &scene.objects {
            let annotate = |e: Error| e.in_scene(i, Some(&object.id));
            let (track, masks) = load_trajectory(manifest, object).map_err(annotate)?;
            let ct = condition(&track, masks.as_ref(), duration, ccfg).map_err(annotate)?;
            let stem = match read_wav(manifest.resolve(&object.stem_path)).map_err(annotate)? {
                AudioBuffer::Mono(m) => m,
                AudioBuffer::Stereo(_) => {
                    return Err(annotate(Error::UnsupportedFormat {
                        detail: "object stems must be mono".into(),
                    }));
                }
            };
            stems.push(render_object(&stem, &ct).map_err(annotate)?);
        }

        let n = stems
            .first()
            .map(|s| s.len())
            .unwrap_or((duration * rate as f64).round() as usize);
        let background = read_wav(manifest.resolve(&scene.background.ambience_path))
            .map_err(|e| e.in_scene(i, None))?;
        if background.sample_rate() != rate {
            return Err(Error::RateMismatch {
                expected: rate,
                found: background.sample_rate(),
            }
            .in_scene(i, None));
        }
        let background = fit_background(background, n);
        let (mix, report) = mix_scene(&stems, &background, mcfg).map_err(|e| e.in_scene(i, None))?;
        reports.push(report);

        let offset = (scene.start_s * rate as f64).round() as usize;
        let count = mix.len().min(total.saturating_sub(offset));
        out.left[offset..offset + count].copy_from_slice(&mix.left[..count]);
        out.right[offset..offset + count].copy_from_slice(&mix.right[..count]);
    }
    Ok((out, reports))
}

fn load_trajectory(
    manifest: &SceneManifest,
    object: &crate::manifest::SceneObject,
) -> Result<(ObjectTrack, Option<crate::mask::MaskSequence>)> {
    if let Some(track) = &object.track {
        return Ok((track.clone(), None));
    }
    if let Some(path) = &object.masks_path {
        let masks = read_masks(manifest.resolve(path))?;
        let track = analyze_masks(&masks)?;
        return Ok((track, Some(masks)));
    }
    Err(Error::Schema {
        pointer: "".into(),
        message: "object needs either an inline track or a masks_path".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn constant_ct(n: usize, w: f64, mass_frac: f64) -> ConditionedTrack {
        ConditionedTrack {
            audio_rate: 48000,
            m_max: 1000.0,
            w_raw: vec![w; n],
            w_clipped: vec![w.clamp(-1.0, 1.0); n],
            mass: vec![mass_frac * 1000.0; n],
        }
    }

    #[test]
    fn pan_endpoints_are_exact() {
        let hard_left = pan_gains(-1.0).unwrap();
        assert_eq!(hard_left.g_left, 1.0);
        assert_eq!(hard_left.g_right, 0.0);
        let hard_right = pan_gains(1.0).unwrap();
        assert_eq!(hard_right.g_left, 0.0);
        assert_eq!(hard_right.g_right, 1.0);
    }

    #[test]
    fn pan_center_is_equal_split() {
        let center = pan_gains(0.0).unwrap();
        assert!((center.g_left - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((center.g_right - SQRT_2 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pan_at_half_right() {
        let g = pan_gains(0.5).unwrap();
        assert!((g.g_left - (67.5f64).to_radians().cos()).abs() < 1e-12);
        assert!((g.g_right - (67.5f64).to_radians().sin()).abs() < 1e-12);
        assert!((g.g_left - 0.38268).abs() < 1e-5);
        assert!((g.g_right - 0.92388).abs() < 1e-5);
    }

    #[test]
    fn pan_mirror_swaps_gains_bitwise() {
        for &w in &[0.0, 0.25, 0.5, 0.7177, 0.9, 1.0] {
            let a = pan_gains(w).unwrap();
            let b = pan_gains(-w).unwrap();
            assert_eq!(a.g_left.to_bits(), b.g_right.to_bits());
            assert_eq!(a.g_right.to_bits(), b.g_left.to_bits());
        }
    }

    #[test]
    fn pan_rejects_out_of_range() {
        assert!(matches!(pan_gains(1.01), Err(Error::OutOfRange { .. })));
        assert!(matches!(pan_gains(f64::NAN), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn loudness_worked_examples() {
        assert_eq!(loudness(1000.0, 1000.0, 0.5).unwrap(), 1.0);
        assert_eq!(loudness(500.0, 1000.0, 1.5).unwrap(), 0.4);
        assert_eq!(loudness(1000.0, 1000.0, 2.0).unwrap(), 0.5);
        assert_eq!(loudness(1000.0, 1000.0, -2.0).unwrap(), 0.5);
    }

    #[test]
    fn loudness_needs_positive_max_mass() {
        assert!(matches!(loudness(1.0, 0.0, 0.0), Err(Error::ZeroMaxMass)));
    }

    #[test]
    fn render_hard_left_silences_the_right_channel() {
        let stem = MonoBuffer::new(48000, vec![0.1, -0.2, 0.3]);
        let ct = constant_ct(3, -1.0, 1.0);
        let out = render_object(&stem, &ct).unwrap();
        assert_eq!(out.left, stem.samples);
        assert!(out.right.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn render_center_splits_power_equally() {
        let stem = MonoBuffer::new(48000, vec![0.5, -0.5, 0.25]);
        let ct = constant_ct(3, 0.0, 1.0);
        let out = render_object(&stem, &ct).unwrap();
        for i in 0..3 {
            assert_eq!(out.left[i], out.right[i]);
            let a = stem.samples[i];
            let sum = out.left[i] * out.left[i] + out.right[i] * out.right[i];
            assert!((sum - a * a).abs() <= 1e-9 * a * a);
        }
    }

    #[test]
    fn render_mirror_swaps_channels_exactly() {
        let stem = MonoBuffer::new(48000, vec![0.3, 0.1, -0.4, 0.9]);
        let ct = ConditionedTrack {
            audio_rate: 48000,
            m_max: 100.0,
            w_raw: vec![0.3, -0.8, 1.4, 0.0],
            w_clipped: vec![0.3, -0.8, 1.0, 0.0],
            mass: vec![100.0, 60.0, 80.0, 100.0],
        };
        let mirrored = ConditionedTrack {
            audio_rate: 48000,
            m_max: 100.0,
            w_raw: ct.w_raw.iter().map(|w| -w).collect(),
            w_clipped: ct.w_clipped.iter().map(|w| -w).collect(),
            mass: ct.mass.clone(),
        };
        let a = render_object(&stem, &ct).unwrap();
        let b = render_object(&stem, &mirrored).unwrap();
        for i in 0..stem.len() {
            assert_eq!(a.left[i].to_bits(), b.right[i].to_bits());
            assert_eq!(a.right[i].to_bits(), b.left[i].to_bits());
        }
    }

    #[test]
    fn render_off_frame_object_stays_audible() {
        let stem = MonoBuffer::new(48000, vec![1.0; 8]);
        let ct = ConditionedTrack {
            audio_rate: 48000,
            m_max: 1000.0,
            w_raw: vec![1.5; 8],
            w_clipped: vec![1.0; 8],
            mass: vec![1000.0; 8],
        };
        let out = render_object(&stem, &ct).unwrap();
        // Half a frame-width off screen: attenuated to 0.8, not silent.
        assert!((out.right[0] - 0.8).abs() < 1e-12);
        assert!(out.left.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn render_checks_rate_and_length() {
        let ct = constant_ct(10, 0.0, 1.0);
        let wrong_rate = MonoBuffer::new(44100, vec![0.0; 10]);
        assert!(matches!(
            render_object(&wrong_rate, &ct),
            Err(Error::RateMismatch {
                expected: 48000,
                found: 44100
            })
        ));
        let short = MonoBuffer::new(48000, vec![0.0; 9]);
        assert!(matches!(
            render_object(&short, &ct),
            Err(Error::StemTooShort {
                needed: 10,
                found: 9
            })
        ));
        let long = MonoBuffer::new(48000, vec![0.1; 32]);
        assert_eq!(render_object(&long, &ct).unwrap().len(), 10);
    }

    #[test]
    fn mix_single_stem_over_silence_is_identity() {
        let stem = StereoBuffer::new(48000, vec![0.1, 0.2], vec![-0.1, 0.0]).unwrap();
        let bg = AudioBuffer::Mono(MonoBuffer::silent(48000, 2));
        let (mix, report) = mix_scene(&[stem.clone()], &bg, &MixConfig::default()).unwrap();
        assert_eq!(mix.left, stem.left);
        assert_eq!(mix.right, stem.right);
        assert_eq!(report.scale, 1.0);
    }

    #[test]
    fn mix_normalizes_when_over_the_ceiling() {
        let stem = StereoBuffer::new(48000, vec![0.6; 4], vec![0.6; 4]).unwrap();
        let bg = AudioBuffer::Mono(MonoBuffer::silent(48000, 4));
        let (mix, report) =
            mix_scene(&[stem.clone(), stem], &bg, &MixConfig::default()).unwrap();
        assert!((report.scale - 0.825).abs() < 1e-15);
        assert!((mix.peak() - 0.99).abs() < 1e-15);
        assert!((report.mix_peak - 0.99).abs() < 1e-15);
    }

    #[test]
    fn mix_spreads_a_mono_background() {
        let bg = AudioBuffer::Mono(MonoBuffer::new(48000, vec![0.1; 5]));
        let (mix, report) = mix_scene(&[], &bg, &MixConfig::default()).unwrap();
        assert_eq!(mix.len(), 5);
        for i in 0..5 {
            assert_eq!(mix.left[i], 0.025);
            assert_eq!(mix.right[i], 0.025);
        }
        assert!(report.stems.is_empty());
    }

    #[test]
    fn mix_pads_and_truncates_the_background() {
        let stem = StereoBuffer::silent(48000, 6);
        let long_bg = AudioBuffer::Mono(MonoBuffer::new(48000, vec![0.4; 10]));
        let (mix, _) = mix_scene(&[stem.clone()], &long_bg, &MixConfig::default()).unwrap();
        assert_eq!(mix.len(), 6);
        let short_bg = AudioBuffer::Mono(MonoBuffer::new(48000, vec![0.4; 3]));
        let (mix, _) = mix_scene(&[stem], &short_bg, &MixConfig::default()).unwrap();
        assert_eq!(mix.len(), 6);
        assert_eq!(mix.left[5], 0.0);
    }

    #[test]
    fn mix_rejects_mismatched_inputs() {
        let a = StereoBuffer::silent(48000, 4);
        let b = StereoBuffer::silent(48000, 5);
        let bg = AudioBuffer::Mono(MonoBuffer::silent(48000, 4));
        assert!(matches!(
            mix_scene(&[a.clone(), b], &bg, &MixConfig::default()),
            Err(Error::LengthMismatch { .. })
        ));
        let wrong_rate = AudioBuffer::Mono(MonoBuffer::silent(44100, 4));
        assert!(matches!(
            mix_scene(&[a], &wrong_rate, &MixConfig::default()),
            Err(Error::RateMismatch { .. })
        ));
    }

    #[test]
    fn mix_reports_stem_levels() {
        let stem = StereoBuffer::new(48000, vec![0.5; 4], vec![0.5; 4]).unwrap();
        let bg = AudioBuffer::Mono(MonoBuffer::silent(48000, 4));
        let (_, report) = mix_scene(&[stem], &bg, &MixConfig::default()).unwrap();
        assert_eq!(report.stems.len(), 1);
        assert_eq!(report.stems[0].peak, 0.5);
        assert!((report.stems[0].rms - 0.5).abs() < 1e-12);
    }
}
