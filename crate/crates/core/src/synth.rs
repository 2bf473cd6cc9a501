//! Deterministic synthetic scenes: parametric trajectories with known
//! closed forms, simple test stems, and the bin sequence the mix is
//! expected to produce. These cases are the end-to-end oracle for the
//! renderer and the metrics.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::{AudioBuffer, MonoBuffer};
use crate::error::{Error, Result};
use crate::manifest::{Background, Scene, SceneManifest, SceneObject};
use crate::metrics::{quantize_bins, BinSequence};
use crate::track::{ObjectTrack, TrackSample};
use crate::wav::{write_wav, WavEncoding};

/// Horizontal motion with a closed-form position w(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    /// Parked at w0.
    Constant { w0: f64 },
    /// Linear from w_start at t=0 to w_end at t=duration.
    LinearSweep { w_start: f64, w_end: f64 },
    /// w(t) = amplitude * sin(2 pi t / period_s).
    Sinusoid { amplitude: f64, period_s: f64 },
    /// Linear from an on-screen start, drifting past the right edge.
    ExitRight { w_start: f64, velocity: f64 },
    /// Linear from an off-screen start left of the frame, drifting in.
    EnterLeft { w_start: f64, velocity: f64 },
}

/// Pixel mass over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MassProfile {
    Constant { m: f64 },
    /// Linear from m0 at t=0 to m1 at t=duration.
    ShrinkTo { m0: f64, m1: f64 },
}

/// Mono test signal for the object stem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StemSpec {
    Sine { freq_hz: f64, amplitude: f64 },
    /// Uniform noise in [-amplitude, amplitude] from a SplitMix64 stream
    /// seeded with `seed`, so the stem is bit-identical everywhere.
    WhiteNoise { amplitude: f64, seed: u64 },
    /// A 1 kHz tone gated on and off at `rate_hz` with a 50% duty cycle.
    /// The off stretches give the metrics silent windows to skip.
    Bursts { rate_hz: f64, amplitude: f64 },
}

/// A fully specified synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePreset {
    pub name: String,
    pub motion: Motion,
    pub duration_s: f64,
    pub mass: MassProfile,
    pub stem: StemSpec,
}

/// The built-in preset names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 5] = [
    "constant",
    "linear-sweep",
    "sinusoid",
    "exit-right",
    "enter-left",
];

/// Looks up a built-in preset by name. Underscores and hyphens are
/// interchangeable.
pub fn preset(name: &str) -> Result<ScenePreset> {
    let canonical = name.replace('_', "-");
    let make = |motion, duration_s, mass, stem| ScenePreset {
        name: canonical.clone(),
        motion,
        duration_s,
        mass,
        stem,
    };
    let p = match canonical.as_str() {
        "constant" => make(
            Motion::Constant { w0: 0.0 },
            2.0,
            MassProfile::Constant { m: 5000.0 },
            StemSpec::Bursts {
                rate_hz: 4.0,
                amplitude: 0.8,
            },
        ),
        "linear-sweep" => make(
            Motion::LinearSweep {
                w_start: -1.0,
                w_end: 1.0,
            },
            4.0,
            MassProfile::Constant { m: 5000.0 },
            StemSpec::Sine {
                freq_hz: 1000.0,
                amplitude: 0.8,
            },
        ),
        "sinusoid" => make(
            Motion::Sinusoid {
                amplitude: 0.8,
                period_s: 8.0,
            },
            8.0,
            MassProfile::Constant { m: 5000.0 },
            StemSpec::WhiteNoise {
                amplitude: 0.5,
                seed: 0x5EED,
            },
        ),
        "exit-right" => make(
            Motion::ExitRight {
                w_start: 0.5,
                velocity: 0.5,
            },
            2.0,
            MassProfile::ShrinkTo {
                m0: 5000.0,
                m1: 2000.0,
            },
            StemSpec::Sine {
                freq_hz: 440.0,
                amplitude: 0.8,
            },
        ),
        "enter-left" => make(
            Motion::EnterLeft {
                w_start: -1.5,
                velocity: 0.5,
            },
            2.0,
            MassProfile::Constant { m: 5000.0 },
            StemSpec::Sine {
                freq_hz: 660.0,
                amplitude: 0.7,
            },
        ),
        _ => {
            return Err(Error::BadPreset {
                message: format!(
                    "unknown preset {name:?}; expected one of {}",
                    PRESET_NAMES.join(", ")
                ),
            });
        }
    };
    Ok(p)
}

impl ScenePreset {
    /// Position at time t, in seconds from scene start.
    pub fn position(&self, t: f64) -> f64 {
        match self.motion {
            Motion::Constant { w0 } => w0,
            Motion::LinearSweep { w_start, w_end } => {
                w_start + (w_end - w_start) * (t / self.duration_s)
            }
            Motion::Sinusoid {
                amplitude,
                period_s,
            } => amplitude * (2.0 * std::f64::consts::PI * t / period_s).sin(),
            Motion::ExitRight { w_start, velocity }
            | Motion::EnterLeft { w_start, velocity } => w_start + velocity * t,
        }
    }

    /// Mass at time t.
    pub fn mass_at(&self, t: f64) -> f64 {
        match self.mass {
            MassProfile::Constant { m } => m,
            MassProfile::ShrinkTo { m0, m1 } => m0 + (m1 - m0) * (t / self.duration_s),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Err(Error::BadPreset { message });
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return bad(format!("duration must be positive, got {}", self.duration_s));
        }
        match self.motion {
            Motion::Sinusoid { period_s, .. } if !(period_s > 0.0) => {
                return bad(format!("sinusoid period must be positive, got {period_s}"));
            }
            Motion::Sinusoid { amplitude, .. } if !(amplitude > 0.0 && amplitude <= 1.5) => {
                return bad(format!("sinusoid amplitude {amplitude} out of range"));
            }
            _ => {}
        }
        let masses = match self.mass {
            MassProfile::Constant { m } => [m, m],
            MassProfile::ShrinkTo { m0, m1 } => [m0, m1],
        };
        if masses.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return bad(format!("masses must be positive, got {masses:?}"));
        }
        let amplitude = match self.stem {
            StemSpec::Sine { amplitude, .. }
            | StemSpec::WhiteNoise { amplitude, .. }
            | StemSpec::Bursts { amplitude, .. } => amplitude,
        };
        if !(amplitude > 0.0 && amplitude <= 1.0) {
            return bad(format!("stem amplitude must be in (0, 1], got {amplitude}"));
        }
        Ok(())
    }
}

/// SplitMix64 step (Steele, Lea, Flood 2014). Chosen because it is tiny,
/// fast, and trivially reproducible in any language with 64-bit integers.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn render_stem(spec: StemSpec, n: usize, audio_rate: u32) -> MonoBuffer {
    let rate = audio_rate as f64;
    let samples = match spec {
        StemSpec::Sine { freq_hz, amplitude } => (0..n)
            .map(|i| {
                amplitude * (2.0 * std::f64::consts::PI * freq_hz * i as f64 / rate).sin()
            })
            .collect(),
        StemSpec::WhiteNoise { amplitude, seed } => {
            let mut state = seed;
            (0..n)
                .map(|_| {
                    let u = (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64;
                    amplitude * (2.0 * u - 1.0)
                })
                .collect()
        }
        StemSpec::Bursts { rate_hz, amplitude } => (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                let on = (t * rate_hz).fract() < 0.5;
                if on {
                    amplitude * (2.0 * std::f64::consts::PI * 1000.0 * t).sin()
                } else {
                    0.0
                }
            })
            .collect(),
    };
    MonoBuffer::new(audio_rate, samples)
}

/// One generated case: everything needed to render it and check the
/// result.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCase {
    pub manifest: SceneManifest,
    pub track: ObjectTrack,
    pub stem: MonoBuffer,
    pub ambience: MonoBuffer,
    pub expected_bins: BinSequence,
}

/// Builds a synthetic case from a preset.
///
/// The track samples the closed-form trajectory at the frame rate with
/// every frame present; the expected bins quantize the same closed form
/// (clipped to [-1, 1]) with the given center band. The manifest holds
/// one scene spanning the preset duration, the track inline, and
/// relative paths "stem.wav" / "ambience.wav" as written by
/// [`write_case`]. The ambience is silent so measurements see only the
/// object.
pub fn synth_case(
    preset: &ScenePreset,
    fps: f64,
    width: u32,
    height: u32,
    audio_rate: u32,
    center_band: f64,
) -> Result<SynthCase> {
    preset.validate()?;
    if !(fps > 0.0) || audio_rate == 0 || width < 1 || height < 1 {
        return Err(Error::BadPreset {
            message: format!(
                "bad geometry: {fps} fps, {audio_rate} Hz, {width}x{height}"
            ),
        });
    }
    let frames = (preset.duration_s * fps).round() as u32;
    if frames < 1 {
        return Err(Error::BadPreset {
            message: format!("duration {} s yields no frames", preset.duration_s),
        });
    }
    let samples: Vec<TrackSample> = (0..frames)
        .map(|k| {
            let t = k as f64 / fps;
            TrackSample::present(k, preset.position(t), 0.0, preset.mass_at(t))
        })
        .collect();
    let track = ObjectTrack { fps, samples };

    let positions: Vec<Option<f64>> = track
        .samples
        .iter()
        .map(|s| Some(s.w.clamp(-1.0, 1.0)))
        .collect();
    let expected_bins = quantize_bins(&positions, center_band, fps);

    let n = (preset.duration_s * audio_rate as f64).round() as usize;
    let stem = render_stem(preset.stem, n, audio_rate);
    let ambience = MonoBuffer::silent(audio_rate, n);

    let manifest = SceneManifest {
        video_id: format!("synth-{}", preset.name),
        fps,
        width,
        height,
        scenes: vec![Scene {
            start_s: 0.0,
            end_s: preset.duration_s,
            background: Background {
                description: "silence".into(),
                ambience_path: PathBuf::from("ambience.wav"),
            },
            objects: vec![SceneObject {
                id: "object-0".into(),
                description: format!("synthetic {} mover", preset.name),
                stem_path: PathBuf::from("stem.wav"),
                track: Some(track.clone()),
                masks_path: None,
            }],
        }],
        base_dir: None,
    };

    Ok(SynthCase {
        manifest,
        track,
        stem,
        ambience,
        expected_bins,
    })
}

/// Writes a case into a directory: stem.wav and ambience.wav (float32),
/// track.json, manifest.json, and expected_bins.json. The manifest's
/// relative paths resolve inside that directory.
pub fn write_case(case: &SynthCase, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    write_wav(
        &AudioBuffer::Mono(case.stem.clone()),
        dir.join("stem.wav"),
        WavEncoding::Float32,
    )?;
    write_wav(
        &AudioBuffer::Mono(case.ambience.clone()),
        dir.join("ambience.wav"),
        WavEncoding::Float32,
    )?;
    crate::track::write_track(&case.track, dir.join("track.json"))?;
    crate::manifest::write_manifest(&case.manifest, dir.join("manifest.json"))?;
    crate::json::write_file(&case.expected_bins, &dir.join("expected_bins.json"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::BinLabel;

    fn case(name: &str) -> SynthCase {
        synth_case(&preset(name).unwrap(), 25.0, 224, 224, 48000, 0.05).unwrap()
    }

    #[test]
    fn constant_preset_sits_in_the_center_bin() {
        let c = case("constant");
        assert_eq!(c.track.samples.len(), 50);
        assert!(c.track.samples.iter().all(|s| s.present && s.w == 0.0));
        assert!(c
            .expected_bins
            .bins
            .iter()
            .all(|&b| b == BinLabel::Center));
        assert_eq!(c.stem.len(), 96000);
        assert_eq!(c.ambience.len(), 96000);
    }

    #[test]
    fn sweep_bins_transition_at_the_analytic_crossings() {
        let c = case("linear-sweep");
        // w(k) = -1 + 0.02 k: the band edges at -0.05 and 0.05 fall
        // between frames 47/48 and 52/53.
        let bins = &c.expected_bins.bins;
        assert_eq!(bins.len(), 100);
        assert_eq!(bins[47], BinLabel::Left);
        assert_eq!(bins[48], BinLabel::Center);
        assert_eq!(bins[52], BinLabel::Center);
        assert_eq!(bins[53], BinLabel::Right);
    }

    #[test]
    fn exit_right_goes_off_frame_after_one_second() {
        let c = case("exit-right");
        for s in &c.track.samples {
            let t = s.index as f64 / 25.0;
            if t > 1.0 {
                assert!(s.w > 1.0, "frame {} should be off-frame", s.index);
            } else {
                assert!(s.w <= 1.0);
            }
        }
        assert!(c.track.samples.iter().any(|s| s.w > 1.0));
        assert!(c
            .expected_bins
            .bins
            .iter()
            .all(|&b| b == BinLabel::Right));
    }

    #[test]
    fn enter_left_starts_off_frame() {
        let c = case("enter-left");
        assert_eq!(c.track.samples[0].w, -1.5);
        assert!(c.track.samples.iter().any(|s| s.w < -1.0));
        let last = c.track.samples.last().unwrap();
        assert!((last.w - (-1.5 + 0.5 * (49.0 / 25.0))).abs() < 1e-12);
        assert!(c.expected_bins.bins.iter().all(|&b| b == BinLabel::Left));
    }

    #[test]
    fn sinusoid_track_is_bounded_and_returns() {
        let c = case("sinusoid");
        assert_eq!(c.track.samples.len(), 200);
        assert!(c.track.samples.iter().all(|s| s.w.abs() <= 0.8));
        assert_eq!(c.track.samples[0].w, 0.0);
    }

    #[test]
    fn noise_stems_are_bit_identical_per_seed() {
        let a = case("sinusoid");
        let b = case("sinusoid");
        assert_eq!(a.stem, b.stem);
        assert!(a.stem.samples.iter().all(|&x| x.abs() <= 0.5));
        assert!(a.stem.samples.iter().any(|&x| x != 0.0));
    }

    #[test]
    fn bursts_alternate_with_silence() {
        let c = case("constant");
        // t in [0.125, 0.25) is an off stretch at 4 Hz.
        let i = (0.18 * 48000.0) as usize;
        assert_eq!(c.stem.samples[i], 0.0);
        assert!(c.stem.samples[100] != 0.0);
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert!(matches!(preset("wander"), Err(Error::BadPreset { .. })));
    }

    #[test]
    fn preset_names_resolve_with_either_separator() {
        assert_eq!(preset("linear_sweep").unwrap(), preset("linear-sweep").unwrap());
        for name in PRESET_NAMES {
            preset(name).unwrap();
        }
    }

    #[test]
    fn invalid_presets_are_rejected() {
        let mut p = preset("constant").unwrap();
        p.duration_s = 0.0;
        assert!(matches!(p.validate(), Err(Error::BadPreset { .. })));

        let mut p = preset("constant").unwrap();
        p.stem = StemSpec::Sine {
            freq_hz: 440.0,
            amplitude: 1.25,
        };
        assert!(matches!(p.validate(), Err(Error::BadPreset { .. })));

        let mut p = preset("exit-right").unwrap();
        p.mass = MassProfile::ShrinkTo { m0: 5000.0, m1: 0.0 };
        assert!(matches!(p.validate(), Err(Error::BadPreset { .. })));
    }

    #[test]
    fn write_case_produces_a_loadable_directory() {
        let dir = tempfile::tempdir().unwrap();
        let c = case("constant");
        write_case(&c, dir.path()).unwrap();
        for file in [
            "stem.wav",
            "ambience.wav",
            "track.json",
            "manifest.json",
            "expected_bins.json",
        ] {
            assert!(dir.path().join(file).is_file(), "{file} missing");
        }
        let manifest = crate::manifest::read_manifest(dir.path().join("manifest.json")).unwrap();
        assert_eq!(manifest, c.manifest);
        let track = crate::track::read_track(dir.path().join("track.json")).unwrap();
        assert_eq!(track, c.track);
    }
}
