//! End-to-end CLI workflows against synthetic recordings.

use std::path::{Path, PathBuf};
use std::process::Output;

fn gg(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_glottisgate"))
        .args(args)
        .output()
        .expect("spawn glottisgate")
}

fn gg_ok(args: &[&str]) -> String {
    let out = gg(args);
    assert!(
        out.status.success(),
        "glottisgate {args:?}: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gg-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn synth_recording(dir: &Path, extra: &[&str]) -> PathBuf {
    let rec = dir.join("rec");
    let mut args = vec![
        "synth", "--frames", "100", "--width", "96", "--height", "96", "--center", "48,48",
        "--a-max", "8", "--b-max", "16",
    ];
    args.extend_from_slice(extra);
    let out = rec.display().to_string();
    args.extend_from_slice(&["--out", &out]);
    gg_ok(&args);
    rec
}

fn first_eval_row(eval_csv: &Path) -> Vec<String> {
    let raw = std::fs::read_to_string(eval_csv).unwrap();
    raw.lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(String::from)
        .collect()
}

#[test]
fn replay_backends_round_trip_through_cli() {
    let dir = workdir("replay");
    let rec = synth_recording(&dir, &["--noise-sigma", "5"]);
    // Replay the synth records and ground-truth masks as predictions.
    let run = dir.join("run");
    gg_ok(&[
        "run",
        "--pipeline",
        "localizer-segmenter",
        "--frames",
        rec.to_str().unwrap(),
        "--detector",
        "replay:records.csv",
        "--segmenter",
        "replay:masks",
        "--out",
        run.to_str().unwrap(),
    ]);
    let eval = dir.join("eval");
    gg_ok(&[
        "eval",
        "--pred",
        run.to_str().unwrap(),
        "--gt",
        rec.join("masks").to_str().unwrap(),
        "--out",
        eval.to_str().unwrap(),
    ]);
    let row = first_eval_row(&eval.join("eval.csv"));
    assert_eq!(row[2], "1", "replayed GT masks under GT boxes score DSC 1");
    assert!(run.join("manifest.json").exists());
    assert!(run.join("masks").join("000000.png").exists());
}

#[test]
fn otsu_pipeline_scores_high_on_clean_synthetic() {
    let dir = workdir("otsu");
    let rec = synth_recording(&dir, &[]);
    let run = dir.join("run");
    gg_ok(&[
        "run",
        "--pipeline",
        "otsu",
        "--frames",
        rec.to_str().unwrap(),
        "--out",
        run.to_str().unwrap(),
    ]);
    let eval = dir.join("eval");
    gg_ok(&[
        "eval",
        "--pred",
        run.to_str().unwrap(),
        "--gt",
        rec.join("masks").to_str().unwrap(),
        "--method",
        "otsu",
        "--out",
        eval.to_str().unwrap(),
    ]);
    let row = first_eval_row(&eval.join("eval.csv"));
    let dsc: f64 = row[2].parse().unwrap();
    assert!(dsc > 0.9, "otsu on noise-free synthetic: DSC {dsc}");
}

#[test]
fn classical_segmenter_spec_selects_classical_pipeline() {
    let dir = workdir("classical-spec");
    let rec = synth_recording(&dir, &[]);
    let run = dir.join("run");
    // `--segmenter otsu` on the localizer pipeline is the Otsu pipeline.
    gg_ok(&[
        "run",
        "--pipeline",
        "localizer-segmenter",
        "--segmenter",
        "otsu",
        "--frames",
        rec.to_str().unwrap(),
        "--out",
        run.to_str().unwrap(),
    ]);
    let manifest = std::fs::read_to_string(run.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"pipeline\": \"otsu\""));
    // But segmenter-only + otsu has no pipeline to select: invalid config.
    let out = gg(&[
        "run",
        "--pipeline",
        "segmenter-only",
        "--segmenter",
        "otsu",
        "--frames",
        rec.to_str().unwrap(),
        "--out",
        dir.join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn motion_pipeline_excludes_init_frames_downstream() {
    let dir = workdir("motion");
    // Occlude the start so initialization sees pure background.
    let rec = synth_recording(&dir, &["--occlude", "0:12", "--f-vib", "100"]);
    let run = dir.join("run");
    gg_ok(&[
        "run",
        "--pipeline",
        "motion",
        "--frames",
        rec.to_str().unwrap(),
        "--motion-init-frames",
        "10",
        "--out",
        run.to_str().unwrap(),
    ]);
    let manifest = std::fs::read_to_string(run.join("manifest.json")).unwrap();
    assert!(manifest.contains("excluded_frame_ids"));
    let parsed: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    let excluded = parsed["config"]["excluded_frame_ids"].as_array().unwrap();
    assert_eq!(excluded.len(), 10);
    // Eval skips them.
    let eval = dir.join("eval");
    gg_ok(&[
        "eval",
        "--pred",
        run.to_str().unwrap(),
        "--gt",
        rec.join("masks").to_str().unwrap(),
        "--out",
        eval.to_str().unwrap(),
    ]);
    let row = first_eval_row(&eval.join("eval.csv"));
    assert_eq!(row[6], "10", "n_excluded");
    let dsc: f64 = row[2].parse().unwrap();
    assert!(dsc > 0.9, "motion on clean appearing ellipse: DSC {dsc}");
}

#[test]
fn crop_pipeline_runs_and_masks_stay_inside_padded_box() {
    let dir = workdir("crop");
    let rec = synth_recording(&dir, &[]);
    let run = dir.join("run");
    gg_ok(&[
        "run",
        "--pipeline",
        "localizer-crop-segmenter",
        "--frames",
        rec.to_str().unwrap(),
        "--out",
        run.to_str().unwrap(),
    ]);
    let eval = dir.join("eval");
    gg_ok(&[
        "eval",
        "--pred",
        run.to_str().unwrap(),
        "--gt",
        rec.join("masks").to_str().unwrap(),
        "--out",
        eval.to_str().unwrap(),
    ]);
    let dsc: f64 = first_eval_row(&eval.join("eval.csv"))[2].parse().unwrap();
    assert!(dsc > 0.9, "crop pipeline DSC {dsc}");
}

#[test]
fn dataset_directory_runs_all_recordings_in_parallel() {
    let dir = workdir("dataset");
    let data = dir.join("data");
    std::fs::create_dir_all(&data).unwrap();
    for (name, seed) in [("a", "1"), ("b", "2"), ("c", "3")] {
        gg_ok(&[
            "synth",
            "--frames",
            "60",
            "--width",
            "64",
            "--height",
            "64",
            "--center",
            "32,32",
            "--a-max",
            "6",
            "--b-max",
            "10",
            "--seed",
            seed,
            "--out",
            data.join(name).to_str().unwrap(),
        ]);
    }
    let run = dir.join("run");
    gg_ok(&[
        "run",
        "--frames",
        data.to_str().unwrap(),
        "--workers",
        "2",
        "--out",
        run.to_str().unwrap(),
    ]);
    for name in ["a", "b", "c"] {
        assert!(run.join(name).join("gaw.csv").exists(), "missing {name}");
        assert!(run.join(name).join("manifest.json").exists());
    }
    assert!(run.join("manifest.json").exists(), "dataset-level manifest");

    // Worker count must not affect the bytes produced.
    let serial = dir.join("run-serial");
    gg_ok(&[
        "run",
        "--frames",
        data.to_str().unwrap(),
        "--workers",
        "1",
        "--out",
        serial.to_str().unwrap(),
    ]);
    for name in ["a", "b", "c"] {
        for file in ["gaw.csv", "frames.csv"] {
            let x = std::fs::read(run.join(name).join(file)).unwrap();
            let y = std::fs::read(serial.join(name).join(file)).unwrap();
            assert_eq!(x, y, "{name}/{file} differs across worker counts");
        }
    }
}

#[test]
fn frame_mode_zeroes_every_missed_frame() {
    let dir = workdir("framemode");
    let rec = synth_recording(&dir, &["--confidence", "seeded:9"]);
    let run = dir.join("run");
    gg_ok(&[
        "run",
        "--frames",
        rec.to_str().unwrap(),
        "--detector",
        "replay:records.csv",
        "--frame-mode",
        "--tau",
        "0.5",
        "--out",
        run.to_str().unwrap(),
    ]);
    let frames_csv = std::fs::read_to_string(run.join("frames.csv")).unwrap();
    assert!(!frames_csv.contains(",held,"), "frame mode never holds");
}

#[test]
fn features_and_compare_workflow() {
    let dir = workdir("cohort");
    let feat = dir.join("feat");
    // Two synthetic cohorts with different vibration regularity.
    for (pid, f_vib, status, seed) in [
        ("h1", "200", "Healthy", "1"),
        ("h2", "210", "Healthy", "2"),
        ("p1", "150", "Polyps", "3"),
        ("p2", "140", "Paralysis", "4"),
    ] {
        let rec = dir.join(pid);
        gg_ok(&[
            "synth",
            "--frames",
            "120",
            "--width",
            "64",
            "--height",
            "64",
            "--center",
            "32,32",
            "--a-max",
            "6",
            "--b-max",
            "10",
            "--f-vib",
            f_vib,
            "--seed",
            seed,
            "--patient-id",
            pid,
            "--status",
            status,
            "--out",
            rec.to_str().unwrap(),
        ]);
        let run = dir.join(format!("run-{pid}"));
        gg_ok(&[
            "run",
            "--frames",
            rec.to_str().unwrap(),
            "--out",
            run.to_str().unwrap(),
        ]);
        gg_ok(&[
            "features",
            "--run",
            run.to_str().unwrap(),
            "--name",
            pid,
            "--out",
            feat.to_str().unwrap(),
        ]);
        assert!(feat.join(format!("{pid}.json")).exists());
        assert!(feat.join(format!("{pid}.svg")).exists());
    }
    std::fs::write(
        dir.join("meta.csv"),
        "patient_id,status,sex\nh1,Healthy,F\nh2,Healthy,F\np1,Polyps,F\np2,Paralysis,F\n",
    )
    .unwrap();
    let cmp = dir.join("cmp");
    let stdout = gg_ok(&[
        "compare",
        "--features",
        feat.join("h1.json").to_str().unwrap(),
        feat.join("h2.json").to_str().unwrap(),
        feat.join("p1.json").to_str().unwrap(),
        feat.join("p2.json").to_str().unwrap(),
        "--meta",
        dir.join("meta.csv").to_str().unwrap(),
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert!(stdout.contains("f0"));
    let report = std::fs::read_to_string(cmp.join("report.csv")).unwrap();
    // 7 features x 2 strata + header.
    assert_eq!(report.lines().count(), 15);
    let txt = std::fs::read_to_string(cmp.join("report.txt")).unwrap();
    assert!(txt.contains("Fisher exact"));
}

#[test]
fn montage_has_expected_grid_dimensions() {
    let dir = workdir("montage");
    let rec = synth_recording(&dir, &[]);
    let run = dir.join("run");
    gg_ok(&[
        "run",
        "--frames",
        rec.to_str().unwrap(),
        "--out",
        run.to_str().unwrap(),
    ]);
    let mont = dir.join("mont");
    gg_ok(&[
        "montage",
        "--run",
        run.to_str().unwrap(),
        "--frames",
        rec.to_str().unwrap(),
        "--panels",
        "12",
        "--out",
        mont.to_str().unwrap(),
    ]);
    let file = std::fs::File::open(mont.join("montage.png")).unwrap();
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let reader = decoder.read_info().unwrap();
    let info = reader.info();
    // 12 panels of 96x96 in a 4x3 grid.
    assert_eq!((info.width, info.height), (384, 288));
}

#[test]
fn hold_sweep_shows_rise_then_plateau_through_cli() {
    let dir = workdir("holdshape");
    let rec = synth_recording(&dir, &["--f-vib", "200", "--fps", "4000"]);
    // Remove detections in 3-frame gaps on open frames (period 20 frames,
    // open phase t mod 20 in 1..=9), so holding bridges the gaps.
    let records = std::fs::read_to_string(rec.join("records.csv")).unwrap();
    let filtered: String = records
        .lines()
        .filter(|line| {
            line.split(',')
                .next()
                .and_then(|id| id.parse::<u64>().ok())
                .map(|id| !matches!(id % 20, 3..=5))
                .unwrap_or(true)
        })
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(rec.join("records-gappy.csv"), filtered).unwrap();
    let out = dir.join("sweep");
    gg_ok(&[
        "sweep-hold",
        "--frames",
        rec.to_str().unwrap(),
        "--detector",
        "replay:records-gappy.csv",
        "--holds",
        "1..8",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("sweep_hold.csv")).unwrap();
    let dsc: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(dsc.len(), 8);
    // Rising while the hold bridges the 3-frame gaps, flat beyond.
    assert!(dsc[3] > dsc[0], "hold 4 {} vs hold 1 {}", dsc[3], dsc[0]);
    for h in 0..3 {
        assert!(dsc[h + 1] >= dsc[h] - 1e-12);
    }
    for h in 3..8 {
        assert!((dsc[h] - dsc[3]).abs() <= 1e-9, "plateau at hold {}", h + 1);
    }
    assert!(out.join("sweep_hold.svg").exists());
}

#[test]
fn sweep_tau_warns_below_capture_floor() {
    let dir = workdir("floorwarn");
    let rec = synth_recording(&dir, &["--confidence", "seeded:4"]);
    let out = gg(&[
        "sweep-tau",
        "--records",
        rec.join("records.csv").to_str().unwrap(),
        "--masks",
        rec.join("masks").to_str().unwrap(),
        "--gt",
        rec.join("masks").to_str().unwrap(),
        "--taus",
        "0.0001,0.5",
        "--out",
        dir.join("sweep").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("capture floor"), "stderr: {stderr}");
}

#[test]
fn exit_codes_match_error_classes() {
    let dir = workdir("exits");
    let rec = synth_recording(&dir, &[]);
    // 2: missing input.
    let out = gg(&[
        "run",
        "--frames",
        "/nonexistent-gg",
        "--out",
        dir.join("o1").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    // 3: invalid config.
    let out = gg(&[
        "run",
        "--frames",
        rec.to_str().unwrap(),
        "--tau",
        "1.5",
        "--out",
        dir.join("o2").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = gg(&[
        "run",
        "--frames",
        rec.to_str().unwrap(),
        "--hold-frames",
        "0",
        "--out",
        dir.join("o3").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    // 4: model runtime absent, with replay guidance.
    let out = gg(&[
        "run",
        "--frames",
        rec.to_str().unwrap(),
        "--detector",
        &format!("model:{}", rec.join("truth.csv").display()),
        "--out",
        dir.join("o4").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replay"));
    // 2: model file missing entirely.
    let out = gg(&[
        "run",
        "--frames",
        rec.to_str().unwrap(),
        "--detector",
        "model:/nonexistent.onnx",
        "--out",
        dir.join("o5").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_covers_every_subcommand() {
    let top = gg_ok(&["--help"]);
    for cmd in [
        "synth",
        "prep-labels",
        "letterbox",
        "run",
        "eval",
        "sweep-tau",
        "sweep-hold",
        "features",
        "compare",
        "montage",
    ] {
        assert!(top.contains(cmd), "top-level help missing {cmd}");
        let sub = gg_ok(&[cmd, "--help"]);
        assert!(sub.contains("--out"), "{cmd} help missing --out");
    }
    // Flags named by the interface contract.
    let run_help = gg_ok(&["run", "--help"]);
    for flag in [
        "--pipeline",
        "--tau",
        "--hold-frames",
        "--drift-clamp-px",
        "--fps",
        "--frame-mode",
        "--detector",
        "--segmenter",
        "--workers",
    ] {
        assert!(run_help.contains(flag), "run help missing {flag}");
    }
}
