//! Command line front end: every subcommand reads files, runs one piece
//! of the pipeline, prints a JSON result on stdout, and reserves stderr
//! for diagnostics. Exit code 0 means success, 1 invalid input, 2 a
//! filesystem problem.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use stereoscene::audio::{AudioBuffer, StereoBuffer};
use stereoscene::conditioning::{condition, write_dump};
use stereoscene::error::{Error, Result};
use stereoscene::filter::{filter_video, FilterVerdict};
use stereoscene::manifest::read_manifest;
use stereoscene::mask::{analyze_masks, read_masks};
use stereoscene::metrics::{bas, mono_check, stereo_score, FileReport, DEFAULT_MONO_THRESHOLD};
use stereoscene::spatial::{render_video, MixReport};
use stereoscene::synth::{preset, synth_case, write_case};
use stereoscene::track::{read_track, write_track};
use stereoscene::wav::{read_wav, write_wav, WavEncoding};

use config::{GlobalConfig, Overrides};

#[derive(Parser)]
#[command(
    name = "stereoscene",
    version,
    about = "Object-aware stereo rendering and evaluation"
)]
struct Cli {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output sample rate in Hz.
    #[arg(long, global = true, value_name = "HZ")]
    audio_rate: Option<u32>,

    /// Video frame rate.
    #[arg(long, global = true, value_name = "FPS")]
    fps: Option<f64>,

    /// Half-width of the center bin for pan quantization.
    #[arg(long, global = true, value_name = "BAND")]
    center_band: Option<f64>,

    /// Worker threads for corpus commands.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a segmentation mask sequence to an object track.
    AnalyzeMasks {
        masks_path: PathBuf,
        out_track_path: PathBuf,
    },
    /// Clean a track, lift it to audio rate, and write the dump.
    Condition {
        track_path: PathBuf,
        duration_s: f64,
        out_path: PathBuf,
        /// Mask sequence for edge-contact mass persistence.
        #[arg(long, value_name = "FILE")]
        masks: Option<PathBuf>,
    },
    /// Render a scene manifest to a stereo WAV file.
    Render {
        manifest_path: PathBuf,
        out_wav_path: PathBuf,
    },
    /// Score stereo audio files.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Judge which videos in a corpus are worth rendering.
    Filter {
        /// Manifest paths or glob patterns.
        #[arg(required = true)]
        manifest_glob: Vec<String>,
    },
    /// Generate a synthetic test scene into a directory.
    Synth {
        preset_name: String,
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Bin alignment between an object track and a stereo file.
    Bas {
        #[arg(long, value_name = "FILE")]
        track: PathBuf,
        #[arg(long, value_name = "FILE")]
        audio: PathBuf,
    },
    /// How stereo each file is, 0 (mono) to 1 (hard-panned).
    StereoScore {
        /// WAV paths or glob patterns.
        #[arg(required = true)]
        paths: Vec<String>,
    },
    /// Whether each file is effectively mono.
    MonoCheck {
        /// WAV paths or glob patterns.
        #[arg(required = true)]
        paths: Vec<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::default().filter_or("STEREOFOLEY_LOG", "warn"),
    )
    .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_io() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = GlobalConfig::load(
        cli.config.as_deref(),
        Overrides {
            audio_rate: cli.audio_rate,
            fps: cli.fps,
            center_band: cli.center_band,
            jobs: cli.jobs,
        },
    )?;

    if cli.print_config {
        emit(&cfg);
        return Ok(());
    }

    let Some(command) = cli.command else {
        return Err(Error::Invariant {
            location: "command line".into(),
            message: "a subcommand is required; see --help".into(),
        });
    };

    match command {
        Command::AnalyzeMasks {
            masks_path,
            out_track_path,
        } => analyze_masks_cmd(&masks_path, &out_track_path),
        Command::Condition {
            track_path,
            duration_s,
            out_path,
            masks,
        } => condition_cmd(&cfg, &track_path, duration_s, &out_path, masks.as_deref()),
        Command::Render {
            manifest_path,
            out_wav_path,
        } => render_cmd(&cfg, &manifest_path, &out_wav_path),
        Command::Metrics(metrics) => match metrics {
            MetricsCommand::Bas { track, audio } => bas_cmd(&cfg, &track, &audio),
            MetricsCommand::StereoScore { paths } => stereo_score_cmd(&cfg, &paths),
            MetricsCommand::MonoCheck { paths } => mono_check_cmd(&cfg, &paths),
        },
        Command::Filter { manifest_glob } => filter_cmd(&cfg, &manifest_glob),
        Command::Synth {
            preset_name,
            out_dir,
        } => synth_cmd(&cfg, &preset_name, &out_dir),
    }
}

fn emit<T: Serialize>(value: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    // A reader that hangs up early (a pager, `head`) is not an error
    // worth crashing over.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

/// Expands each argument as a glob pattern when it contains wildcards,
/// then sorts so corpus output and summaries are reproducible.
fn expand_globs(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pattern in patterns {
        if pattern.contains(['*', '?', '[']) {
            let matches = glob::glob(pattern).map_err(|e| Error::Invariant {
                location: pattern.clone(),
                message: e.to_string(),
            })?;
            let before = out.len();
            for entry in matches {
                out.push(entry.map_err(|e| Error::Io(e.into()))?);
            }
            if out.len() == before {
                return Err(Error::MissingFile {
                    pointer: pattern.clone(),
                    path: pattern.into(),
                });
            }
        } else {
            out.push(PathBuf::from(pattern));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn read_stereo(path: &Path) -> Result<StereoBuffer> {
    match read_wav(path)? {
        AudioBuffer::Stereo(s) => Ok(s),
        AudioBuffer::Mono(_) => Err(Error::UnsupportedFormat {
            detail: "expected stereo audio".into(),
        }
        .in_file(path)),
    }
}

fn corpus<R, F>(cfg: &GlobalConfig, paths: &[PathBuf], per_file: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&Path) -> Result<R> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Invariant {
            location: "/jobs".into(),
            message: e.to_string(),
        })?;
    pool.install(|| {
        paths
            .par_iter()
            .map(|path| {
                log::debug!("processing {}", path.display());
                per_file(path)
            })
            .collect()
    })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[derive(Serialize)]
struct AnalyzeOut<'a> {
    out: &'a Path,
    frames: usize,
    present: usize,
}

fn analyze_masks_cmd(masks_path: &Path, out_track_path: &Path) -> Result<()> {
    log::info!("analyzing masks from {}", masks_path.display());
    let masks = read_masks(masks_path)?;
    let track = analyze_masks(&masks)?;
    write_track(&track, out_track_path)?;
    emit(&AnalyzeOut {
        out: out_track_path,
        frames: track.samples.len(),
        present: track.present_count(),
    });
    Ok(())
}

#[derive(Serialize)]
struct ConditionOut<'a> {
    out: &'a Path,
    n_samples: usize,
    audio_rate: u32,
    m_max: f64,
}

fn condition_cmd(
    cfg: &GlobalConfig,
    track_path: &Path,
    duration_s: f64,
    out_path: &Path,
    masks_path: Option<&Path>,
) -> Result<()> {
    log::info!("conditioning {}", track_path.display());
    let track = read_track(track_path)?;
    let masks = masks_path.map(read_masks).transpose()?;
    let ct = condition(&track, masks.as_ref(), duration_s, &cfg.conditioning)?;
    write_dump(&ct, out_path)?;
    emit(&ConditionOut {
        out: out_path,
        n_samples: ct.n_samples(),
        audio_rate: ct.audio_rate,
        m_max: ct.m_max,
    });
    Ok(())
}

#[derive(Serialize)]
struct RenderOut<'a> {
    out: &'a Path,
    duration_s: f64,
    scenes: Vec<MixReport>,
}

fn render_cmd(cfg: &GlobalConfig, manifest_path: &Path, out_wav_path: &Path) -> Result<()> {
    log::info!("rendering {}", manifest_path.display());
    let manifest = read_manifest(manifest_path)?;
    let (mix, scenes) = render_video(&manifest, &cfg.conditioning, &cfg.mix)?;
    let duration_s = mix.duration_s();
    write_wav(
        &AudioBuffer::Stereo(mix),
        out_wav_path,
        WavEncoding::Float32,
    )?;
    emit(&RenderOut {
        out: out_wav_path,
        duration_s,
        scenes,
    });
    Ok(())
}

fn bas_cmd(cfg: &GlobalConfig, track_path: &Path, audio_path: &Path) -> Result<()> {
    let track = read_track(track_path)?;
    let audio = read_stereo(audio_path)?;
    let report = FileReport {
        bas: Some(bas(&track, &audio, cfg.center_band)?),
        stereo_score: stereo_score(&audio),
        mono: mono_check(&audio, DEFAULT_MONO_THRESHOLD),
    };
    emit(&report);
    Ok(())
}

#[derive(Serialize)]
struct Corpus<Row, Summary> {
    files: Vec<Row>,
    summary: Summary,
}

#[derive(Serialize)]
struct ScoreRow {
    path: PathBuf,
    stereo_score: f64,
}

#[derive(Serialize)]
struct ScoreSummary {
    mean: f64,
    median: f64,
}

fn stereo_score_cmd(cfg: &GlobalConfig, patterns: &[String]) -> Result<()> {
    let paths = expand_globs(patterns)?;
    let files = corpus(cfg, &paths, |path| {
        Ok(ScoreRow {
            path: path.to_path_buf(),
            stereo_score: stereo_score(&read_stereo(path)?),
        })
    })?;
    let mut scores: Vec<f64> = files.iter().map(|r| r.stereo_score).collect();
    scores.sort_by(f64::total_cmp);
    let summary = ScoreSummary {
        mean: scores.iter().sum::<f64>() / scores.len() as f64,
        median: median(&scores),
    };
    emit(&Corpus { files, summary });
    Ok(())
}

#[derive(Serialize)]
struct MonoRow {
    path: PathBuf,
    mean_abs_diff: f64,
    is_mono: bool,
}

#[derive(Serialize)]
struct MonoSummary {
    mean: f64,
    median: f64,
    mono_fraction: f64,
}

fn mono_check_cmd(cfg: &GlobalConfig, patterns: &[String]) -> Result<()> {
    let paths = expand_globs(patterns)?;
    let files = corpus(cfg, &paths, |path| {
        let report = mono_check(&read_stereo(path)?, DEFAULT_MONO_THRESHOLD);
        Ok(MonoRow {
            path: path.to_path_buf(),
            mean_abs_diff: report.mean_abs_diff,
            is_mono: report.is_mono,
        })
    })?;
    let mut diffs: Vec<f64> = files.iter().map(|r| r.mean_abs_diff).collect();
    diffs.sort_by(f64::total_cmp);
    let mono = files.iter().filter(|r| r.is_mono).count();
    let summary = MonoSummary {
        mean: diffs.iter().sum::<f64>() / diffs.len() as f64,
        median: median(&diffs),
        mono_fraction: mono as f64 / files.len() as f64,
    };
    emit(&Corpus { files, summary });
    Ok(())
}

#[derive(Serialize)]
struct FilterRow {
    path: PathBuf,
    #[serde(flatten)]
    verdict: FilterVerdict,
}

#[derive(Serialize)]
struct FilterSummary {
    accepted: usize,
    total: usize,
    acceptance_rate: f64,
}

fn filter_cmd(cfg: &GlobalConfig, patterns: &[String]) -> Result<()> {
    let paths = expand_globs(patterns)?;
    let files = corpus(cfg, &paths, |path| {
        let manifest = read_manifest(path)?;
        Ok(FilterRow {
            path: path.to_path_buf(),
            verdict: filter_video(&manifest, &cfg.filter)?,
        })
    })?;
    let accepted = files.iter().filter(|r| r.verdict.accepted).count();
    let summary = FilterSummary {
        accepted,
        total: files.len(),
        acceptance_rate: accepted as f64 / files.len() as f64,
    };
    emit(&Corpus { files, summary });
    Ok(())
}

#[derive(Serialize)]
struct SynthOut<'a> {
    out_dir: &'a Path,
    preset: String,
    frames: usize,
    stem_samples: usize,
}

fn synth_cmd(cfg: &GlobalConfig, preset_name: &str, out_dir: &Path) -> Result<()> {
    let spec = preset(preset_name)?;
    log::info!("synthesizing preset {} into {}", spec.name, out_dir.display());
    let case = synth_case(&spec, cfg.fps, 224, 224, cfg.audio_rate, cfg.center_band)?;
    write_case(&case, out_dir)?;
    emit(&SynthOut {
        out_dir,
        preset: spec.name,
        frames: case.track.samples.len(),
        stem_samples: case.stem.len(),
    });
    Ok(())
}
