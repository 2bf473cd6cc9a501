use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the pipeline, from file parsing to
/// metric evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying file or stream I/O failed.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// WAV file uses a codec or layout this crate does not read.
    #[error("unsupported wav format: {detail}")]
    UnsupportedFormat { detail: String },

    /// WAV container is structurally broken.
    #[error("corrupt wav header: {detail}")]
    CorruptHeader { detail: String },

    /// WAV data chunk ends before its declared size.
    #[error("truncated wav data: expected {expected} bytes, found {found}")]
    TruncatedData { expected: u64, found: u64 },

    /// A JSON document does not match its schema. The pointer locates the
    /// offending field ("/scenes/0/objects/1/track").
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    /// Two scenes in a manifest overlap in time.
    #[error("scenes {earlier} and {later} overlap in time")]
    OverlappingScenes { earlier: usize, later: usize },

    /// A scene's time range is empty, negative, or starts before zero.
    #[error("scene {scene}: bad time range [{start_s}, {end_s}]")]
    BadTimeRange {
        scene: usize,
        start_s: f64,
        end_s: f64,
    },

    /// A structural invariant of a parsed document failed. The location is a
    /// JSON pointer into the document.
    #[error("invariant violated at {location}: {message}")]
    Invariant { location: String, message: String },

    /// A file referenced by a manifest does not exist on disk.
    #[error("missing file referenced at {pointer}: {}", path.display())]
    MissingFile { pointer: String, path: PathBuf },

    /// A mask frame index was requested that the sequence does not contain.
    #[error("frame {frame} not present in mask sequence")]
    FrameNotFound { frame: u32 },

    /// A track has no present samples to interpolate or extrapolate from.
    #[error("track has no present samples")]
    NoReliableFrames,

    /// A scene duration rounds to zero output samples.
    #[error("bad duration: {duration_s} s yields no audio samples")]
    BadDuration { duration_s: f64 },

    /// A pan position was outside the clipped range [-1, 1].
    #[error("position {value} outside [-1, 1]")]
    OutOfRange { value: f64 },

    /// Loudness normalization was asked for with a non-positive maximum mass.
    #[error("maximum mass must be positive")]
    ZeroMaxMass,

    /// Two buffers that must share a sample rate do not.
    #[error("sample rate mismatch: expected {expected} Hz, found {found} Hz")]
    RateMismatch { expected: u32, found: u32 },

    /// An object stem is shorter than the scene it must cover.
    #[error("stem too short: need {needed} samples, found {found}")]
    StemTooShort { needed: usize, found: usize },

    /// Two buffers that must share a length do not.
    #[error("length mismatch: expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    /// A track and an audio buffer disagree on duration by more than one
    /// video frame.
    #[error("duration mismatch: track covers {track_s} s, audio covers {audio_s} s")]
    DurationMismatch { track_s: f64, audio_s: f64 },

    /// A metric was asked to analyze an empty buffer.
    #[error("audio buffer is empty")]
    EmptyAudio,

    /// A synthetic scene preset has invalid parameters.
    #[error("bad preset: {message}")]
    BadPreset { message: String },

    /// An object in a manifest has no loadable track.
    #[error("scene {scene}, object {object}: no loadable track")]
    MissingTrack { scene: usize, object: String },

    /// Context wrapper: the underlying error occurred while handling `path`.
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    /// Context wrapper: the underlying error occurred while rendering a
    /// particular scene (and object, when known).
    #[error("scene {scene}{}: {source}", object.as_deref().map(|o| format!(", object {o}")).unwrap_or_default())]
    InScene {
        scene: usize,
        object: Option<String>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the file it came from.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Error {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Wraps the error with the scene (and object) being processed.
    pub fn in_scene(self, scene: usize, object: Option<&str>) -> Error {
        Error::InScene {
            scene,
            object: object.map(str::to_owned),
            source: Box::new(self),
        }
    }

    /// True for errors rooted in the filesystem (missing or unreadable
    /// files) rather than in invalid content. The CLI maps these to exit
    /// code 2 and everything else to exit code 1.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) | Error::MissingFile { .. } => true,
            Error::InFile { source, .. } | Error::InScene { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
