//! Scene manifests: the structured description of a video's scenes,
//! sounding objects, audio stems, and background ambience.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::track::ObjectTrack;

/// Background layer of a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub description: String,
    /// WAV file with the ambience bed for the scene.
    pub ambience_path: PathBuf,
}

/// One sounding object inside a scene. Its trajectory is carried either
/// inline as `track` or by reference as `masks_path`; exactly one of the
/// two must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    pub description: String,
    /// WAV file with the object's mono audio stem.
    pub stem_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<ObjectTrack>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks_path: Option<PathBuf>,
}

/// One scene: a time span on the video timeline with its objects and
/// background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub start_s: f64,
    pub end_s: f64,
    pub background: Background,
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Manifest for one video: frame geometry, frame rate, and the scene list.
///
/// Relative paths inside the manifest are resolved against the directory
/// the manifest was read from, kept in `base_dir`. A manifest built in
/// memory has no base directory and resolves paths as written.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneManifest {
    pub video_id: String,
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub scenes: Vec<Scene>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl PartialEq for SceneManifest {
    fn eq(&self, other: &SceneManifest) -> bool {
        // base_dir records where the file was read from, not content.
        self.video_id == other.video_id
            && self.fps == other.fps
            && self.width == other.width
            && self.height == other.height
            && self.scenes == other.scenes
    }
}

impl SceneManifest {
    /// Checks structural invariants: geometry and frame rate, scene time
    /// ranges, ordering and disjointness, per-object track sources, and
    /// inline track validity.
    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::Schema {
                pointer: "/fps".into(),
                message: format!("frame rate must be positive, got {}", self.fps),
            });
        }
        if self.width < 1 || self.height < 1 {
            return Err(Error::Schema {
                pointer: "/width".into(),
                message: format!(
                    "frame geometry must be at least 1x1, got {}x{}",
                    self.width, self.height
                ),
            });
        }
        for (i, scene) in self.scenes.iter().enumerate() {
            if !(scene.start_s >= 0.0)
                || !(scene.end_s > scene.start_s)
                || !scene.end_s.is_finite()
            {
                return Err(Error::BadTimeRange {
                    scene: i,
                    start_s: scene.start_s,
                    end_s: scene.end_s,
                });
            }
        }
        for (i, pair) in self.scenes.windows(2).enumerate() {
            if pair[1].start_s < pair[0].start_s {
                return Err(Error::Invariant {
                    location: format!("/scenes/{}", i + 1),
                    message: "scenes must be sorted by start time".into(),
                });
            }
            if pair[1].start_s < pair[0].end_s {
                return Err(Error::OverlappingScenes {
                    earlier: i,
                    later: i + 1,
                });
            }
        }
        for (i, scene) in self.scenes.iter().enumerate() {
            for (j, object) in scene.objects.iter().enumerate() {
                let pointer = format!("/scenes/{i}/objects/{j}");
                match (&object.track, &object.masks_path) {
                    (None, None) => {
                        return Err(Error::Schema {
                            pointer,
                            message: "object needs either an inline track or a masks_path"
                                .into(),
                        });
                    }
                    (Some(_), Some(_)) => {
                        return Err(Error::Schema {
                            pointer,
                            message: "object has both an inline track and a masks_path"
                                .into(),
                        });
                    }
                    _ => {}
                }
                if let Some(track) = &object.track {
                    track.validate_at(&format!("{pointer}/track"))?;
                }
            }
        }
        Ok(())
    }

    /// Resolves a manifest-relative path against `base_dir`.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        match (&self.base_dir, path.is_relative()) {
            (Some(base), true) => base.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Checks that every referenced file exists and is a file.
    pub fn check_paths(&self) -> Result<()> {
        let check = |pointer: String, path: &Path| -> Result<()> {
            let resolved = self.resolve(path);
            if resolved.is_file() {
                Ok(())
            } else {
                Err(Error::MissingFile {
                    pointer,
                    path: resolved,
                })
            }
        };
        for (i, scene) in self.scenes.iter().enumerate() {
            check(
                format!("/scenes/{i}/background/ambience_path"),
                &scene.background.ambience_path,
            )?;
            for (j, object) in scene.objects.iter().enumerate() {
                check(format!("/scenes/{i}/objects/{j}/stem_path"), &object.stem_path)?;
                if let Some(masks) = &object.masks_path {
                    check(format!("/scenes/{i}/objects/{j}/masks_path"), masks)?;
                }
            }
        }
        Ok(())
    }
}

/// Reads a manifest JSON file, validates it, and checks that every
/// referenced file resolves. Relative paths resolve against the
/// manifest's directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<SceneManifest> {
    let path = path.as_ref();
    let mut manifest: SceneManifest = json::read_file(path)?;
    manifest.base_dir = path.parent().map(Path::to_path_buf);
    manifest.validate().map_err(|e| e.in_file(path))?;
    manifest.check_paths().map_err(|e| e.in_file(path))?;
    Ok(manifest)
}

/// Writes a manifest as JSON after validating it. Referenced files are
/// not required to exist yet.
pub fn write_manifest(manifest: &SceneManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    manifest.validate().map_err(|e| e.in_file(path))?;
    json::write_file(manifest, path)
}
