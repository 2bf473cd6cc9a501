//! Black-box tests against the built binary: exit codes, JSON output
//! shapes, config merging, and rerun determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stereoscene"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn synth_render_score_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let synth = run_in(dir.path(), &["synth", "constant", "case"]);
    let report = stdout_json(&synth);
    assert_eq!(report["frames"], 50);

    let render = run_in(dir.path(), &["render", "case/manifest.json", "mix.wav"]);
    let report = stdout_json(&render);
    assert_eq!(report["duration_s"], 2.0);
    assert_eq!(report["scenes"][0]["scale"], 1.0);

    let score = run_in(
        dir.path(),
        &["metrics", "bas", "--track", "case/track.json", "--audio", "mix.wav"],
    );
    let report = stdout_json(&score);
    assert!(report["bas"]["combined"].as_f64().unwrap() >= 0.99);
    assert_eq!(report["stereo_score"], 0.0);
    assert_eq!(report["mono"]["is_mono"], true);
}

#[test]
fn sweep_renders_to_matching_bins() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["synth", "linear-sweep", "case"])
        .status
        .success());
    assert!(run_in(dir.path(), &["render", "case/manifest.json", "mix.wav"])
        .status
        .success());
    let score = run_in(
        dir.path(),
        &["metrics", "bas", "--track", "case/track.json", "--audio", "mix.wav"],
    );
    let report = stdout_json(&score);
    // No ambiguity exclusions here, so a handful of frames that sit on
    // the bin edges may disagree.
    assert!(report["bas"]["combined"].as_f64().unwrap() >= 0.95);
    assert!(report["stereo_score"].as_f64().unwrap() > 0.3);
    assert_eq!(report["mono"]["is_mono"], false);
}

#[test]
fn filter_summarizes_a_corpus_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["constant", "linear-sweep"] {
        assert!(run_in(dir.path(), &["synth", preset, preset]).status.success());
    }

    let first = run_in(dir.path(), &["filter", "*/manifest.json"]);
    let report = stdout_json(&first);
    let files = report["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    assert_eq!(files[0]["path"], "constant/manifest.json");
    assert_eq!(files[0]["accepted"], false);
    assert_eq!(files[0]["reasons"][0]["kind"], "no_qualifying_object");
    assert_eq!(files[1]["path"], "linear-sweep/manifest.json");
    assert_eq!(files[1]["accepted"], true);
    assert_eq!(report["summary"]["acceptance_rate"], 0.5);

    let second = run_in(dir.path(), &["filter", "*/manifest.json"]);
    assert_eq!(first.stdout, second.stdout, "rerun output differs");
}

#[test]
fn corpus_metrics_report_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["constant", "linear-sweep"] {
        assert!(run_in(dir.path(), &["synth", preset, preset]).status.success());
        let manifest = format!("{preset}/manifest.json");
        let wav = format!("{preset}.wav");
        assert!(run_in(dir.path(), &["render", &manifest, &wav]).status.success());
    }

    let mono = run_in(dir.path(), &["metrics", "mono-check", "*.wav"]);
    let report = stdout_json(&mono);
    let files = report["files"].as_array().unwrap();
    assert_eq!(files[0]["path"], "constant.wav");
    assert_eq!(files[0]["is_mono"], true);
    assert_eq!(files[1]["path"], "linear-sweep.wav");
    assert_eq!(files[1]["is_mono"], false);
    assert_eq!(report["summary"]["mono_fraction"], 0.5);

    let spread = run_in(dir.path(), &["metrics", "stereo-score", "*.wav"]);
    let report = stdout_json(&spread);
    assert_eq!(report["files"][0]["stereo_score"], 0.0);
    assert!(report["files"][1]["stereo_score"].as_f64().unwrap() > 0.3);
    assert!(report["summary"]["mean"].as_f64().unwrap() > 0.0);
    assert!(report["summary"]["median"].is_number());
}

#[test]
fn missing_files_exit_two_with_the_culprit_named() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["synth", "constant", "case"]).status.success());
    std::fs::remove_file(dir.path().join("case/stem.wav")).unwrap();
    let render = run_in(dir.path(), &["render", "case/manifest.json", "mix.wav"]);
    assert_eq!(render.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&render.stderr);
    assert!(stderr.contains("/scenes/0/objects/0"), "{stderr}");
    assert!(stderr.contains("stem.wav"), "{stderr}");
}

#[test]
fn invalid_manifests_exit_one_with_a_pointer() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{
            "video_id": "clash",
            "fps": 25.0,
            "width": 224,
            "height": 224,
            "scenes": [
                {
                    "start_s": 0.0, "end_s": 2.0,
                    "background": {"description": "a", "ambience_path": "amb.wav"},
                    "objects": [{"id": "x", "description": "x", "stem_path": "s.wav",
                                 "track": {"fps": 25.0, "samples": [{"k": 0, "present": false}]}}]
                },
                {
                    "start_s": 1.0, "end_s": 3.0,
                    "background": {"description": "b", "ambience_path": "amb.wav"},
                    "objects": [{"id": "y", "description": "y", "stem_path": "s.wav",
                                 "track": {"fps": 25.0, "samples": [{"k": 0, "present": false}]}}]
                }
            ]
        }"#,
    )
    .unwrap();
    let render = run_in(dir.path(), &["render", "bad.json", "mix.wav"]);
    assert_eq!(render.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&render.stderr);
    assert!(stderr.contains("overlap"), "{stderr}");
    assert!(stderr.contains("bad.json"), "{stderr}");
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"fps": 30.0, "audio_rate": 44100}"#,
    )
    .unwrap();
    let output = run_in(
        dir.path(),
        &["--config", "config.json", "--fps", "60", "--print-config"],
    );
    let cfg = stdout_json(&output);
    assert_eq!(cfg["fps"], 60.0);
    assert_eq!(cfg["audio_rate"], 44100);
    assert_eq!(cfg["conditioning"]["audio_rate"], 44100);
    assert_eq!(cfg["center_band"], 0.05);

    let plain = run_in(dir.path(), &["--print-config"]);
    let cfg = stdout_json(&plain);
    assert_eq!(cfg["audio_rate"], 48000);
    assert!(cfg["jobs"].as_u64().unwrap() >= 1);
}

#[test]
fn reruns_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        assert!(run_in(dir.path(), &["synth", "sinusoid", name]).status.success());
        let manifest = format!("{name}/manifest.json");
        let wav = format!("{name}.wav");
        assert!(run_in(dir.path(), &["render", &manifest, &wav]).status.success());
    }
    for file in ["manifest.json", "track.json", "stem.wav", "expected_bins.json"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between reruns");
    }
    let a = std::fs::read(dir.path().join("a.wav")).unwrap();
    let b = std::fs::read(dir.path().join("b.wav")).unwrap();
    assert_eq!(a, b, "rendered audio differs between reruns");
}

#[test]
fn log_level_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["synth", "constant", "case"]).status.success());
    let output = bin()
        .current_dir(dir.path())
        .env("STEREOFOLEY_LOG", "debug")
        .args(["filter", "case/manifest.json"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("processing"), "{stderr}");

    let quiet = run_in(dir.path(), &["filter", "case/manifest.json"]);
    assert!(String::from_utf8_lossy(&quiet.stderr).is_empty());
}

#[test]
fn masks_flow_through_analysis_and_conditioning() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("masks.json"),
        r#"{
            "width": 32, "height": 16, "fps": 25.0,
            "frames": [
                {"k": 0, "runs": [[4, 2, 6], [5, 2, 6]]},
                {"k": 1, "runs": [[4, 6, 6], [5, 6, 6]]},
                {"k": 2, "runs": [[4, 10, 6], [5, 10, 6]]}
            ]
        }"#,
    )
    .unwrap();

    let analyze = run_in(dir.path(), &["analyze-masks", "masks.json", "track.json"]);
    let report = stdout_json(&analyze);
    assert_eq!(report["frames"], 3);
    assert_eq!(report["present"], 3);

    let cond = run_in(
        dir.path(),
        &["condition", "track.json", "0.12", "dump.bin", "--masks", "masks.json"],
    );
    let report = stdout_json(&cond);
    assert_eq!(report["n_samples"], 5760);
    assert!(dir.path().join("dump.bin").is_file());
    assert!(dir.path().join("dump.bin.json").is_file());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(dir.path(), &["metrics"]);
    assert_eq!(output.status.code(), Some(1));

    let unknown = run_in(dir.path(), &["synth", "wander", "out"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("wander"));
}
