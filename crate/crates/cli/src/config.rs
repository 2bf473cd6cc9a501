//! The effective configuration: defaults, then the config file, then
//! command line flags, each layer overriding the one before it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use stereoscene::conditioning::ConditioningConfig;
use stereoscene::error::{Error, Result};
use stereoscene::filter::FilterConfig;
use stereoscene::metrics::DEFAULT_CENTER_BAND;
use stereoscene::spatial::MixConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalConfig {
    /// Output sample rate in Hz. Authoritative: the conditioning stage
    /// always runs at this rate, whatever a config file says inside
    /// `conditioning`.
    pub audio_rate: u32,
    /// Video frame rate used for metric windows and synthetic scenes.
    pub fps: f64,
    /// Half-width of the center bin when quantizing pan positions.
    pub center_band: f64,
    /// Worker threads for corpus commands.
    pub jobs: usize,
    pub conditioning: ConditioningConfig,
    pub mix: MixConfig,
    pub filter: FilterConfig,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig {
            audio_rate: 48000,
            fps: 25.0,
            center_band: DEFAULT_CENTER_BAND,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            conditioning: ConditioningConfig::default(),
            mix: MixConfig::default(),
            filter: FilterConfig::default(),
        }
    }
}

/// Command line overrides for the scalar fields.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub audio_rate: Option<u32>,
    pub fps: Option<f64>,
    pub center_band: Option<f64>,
    pub jobs: Option<usize>,
}

impl GlobalConfig {
    pub fn load(config_path: Option<&Path>, overrides: Overrides) -> Result<GlobalConfig> {
        let mut cfg = match config_path {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
                serde_json::from_str::<GlobalConfig>(&text)
                    .map_err(|e| {
                        Error::Schema {
                            pointer: "/".into(),
                            message: e.to_string(),
                        }
                        .in_file(path)
                    })?
            }
            None => GlobalConfig::default(),
        };
        if let Some(v) = overrides.audio_rate {
            cfg.audio_rate = v;
        }
        if let Some(v) = overrides.fps {
            cfg.fps = v;
        }
        if let Some(v) = overrides.center_band {
            cfg.center_band = v;
        }
        if let Some(v) = overrides.jobs {
            cfg.jobs = v;
        }
        cfg.conditioning.audio_rate = cfg.audio_rate;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let schema = |pointer: &str, message: String| Error::Schema {
            pointer: pointer.into(),
            message,
        };
        if self.audio_rate == 0 {
            return Err(schema("/audio_rate", "audio rate must be positive".into()));
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(schema("/fps", format!("fps must be positive, got {}", self.fps)));
        }
        if !(0.0..1.0).contains(&self.center_band) {
            return Err(schema(
                "/center_band",
                format!("center band must be in [0, 1), got {}", self.center_band),
            ));
        }
        if self.jobs < 1 {
            return Err(schema("/jobs", "jobs must be at least 1".into()));
        }
        self.conditioning.validate()?;
        self.mix.validate()?;
        self.filter.validate()?;
        Ok(())
    }
}
