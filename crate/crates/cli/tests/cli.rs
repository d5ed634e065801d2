use std::path::Path;
use std::process::{Command, Output};

fn retarget(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retarget"))
        .args(args)
        .output()
        .expect("spawn retarget")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn saliency_writes_map_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let o = retarget(&[
        "saliency",
        "--input",
        "synth:popout-color",
        "--output",
        out_arg(&dir),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.join("saliency.pgm").is_file());
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["method"], "saliency");
    let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn file_inputs_round_trip_through_the_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let o = retarget(&[
        "kim",
        "--input",
        "synth:gray-roi",
        "--output",
        out_arg(&first),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mask = tmp.path().join("mask.pgm");
    let roi = retarget_core::synth::gray_roi(0).mask;
    retarget_core::imaging::io::write_grid(&mask, &roi.to_grid()).unwrap();
    let second = tmp.path().join("second");
    let o = retarget(&[
        "kim",
        "--input",
        first.join("output.png").to_str().unwrap(),
        "--mask",
        mask.to_str().unwrap(),
        "--output",
        out_arg(&second),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(second.join("saliency_after.pgm").is_file());
}

#[test]
fn full_mask_is_degenerate() {
    let tmp = tempfile::tempdir().unwrap();
    let mask = tmp.path().join("full.pgm");
    let img = retarget_core::synth::tile_floor(0).image;
    let (w, h) = img.dims();
    retarget_core::imaging::io::write_grid(&mask, &retarget_core::Grid::filled(w, h, 1.0)).unwrap();
    let input = tmp.path().join("in.png");
    retarget_core::imaging::io::write_image(&input, &img).unwrap();
    let o = retarget(&[
        "rotate",
        "--input",
        input.to_str().unwrap(),
        "--mask",
        mask.to_str().unwrap(),
        "--output",
        out_arg(&tmp.path().join("out")),
    ]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[degenerate]"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = retarget(&[
        "hue",
        "--input",
        "synth:hue-field",
        "--output",
        out_arg(tmp.path()),
        "--set",
        "hue.binz=90",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hue.binz"));
}

#[test]
fn bad_value_type_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[kim]\nreg = \"small\"\n").unwrap();
    let o = retarget(&[
        "kim",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        "synth:gray-roi",
        "--output",
        out_arg(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = retarget(&[
        "saliency",
        "--input",
        "does-not-exist.png",
        "--output",
        out_arg(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("does-not-exist.png"));
}

#[test]
fn nguyen_without_candidates_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = retarget(&[
        "nguyen",
        "--input",
        "synth:camouflage",
        "--output",
        out_arg(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "input = \"missing.png\"\nseed = 1\n").unwrap();
    let dir = tmp.path().join("out");
    let o = retarget(&[
        "saliency",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        "synth:popout-orientation",
        "--seed",
        "4",
        "--output",
        out_arg(&dir),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 4);
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let read = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (
                    p.file_name().unwrap().to_owned(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect();
        v.sort();
        v
    };
    let mut runs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("run{k}"));
        let o = retarget(&[
            "hue",
            "--input",
            "synth:hue-field",
            "--seed",
            "2",
            "--output",
            out_arg(&dir),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        runs.push(read(&dir));
    }
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0].iter().any(|(n, _)| n == "curve.csv"));
}

#[test]
fn feedback_runs_on_defaults_but_not_on_a_missing_channel() {
    let tmp = tempfile::tempdir().unwrap();
    let base = [
        "feedback",
        "--input",
        "synth:segment-strips",
        "--set",
        "iterative.max_iterations=2",
    ];
    let dir = tmp.path().join("a");
    let o = retarget(&[&base[..], &["--output", out_arg(&dir)]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.join("iterations.csv").is_file());
    let dir = tmp.path().join("b");
    let o = retarget(
        &[
            &base[..],
            &[
                "--output",
                out_arg(&dir),
                "--set",
                "iterative.features=[\"sharpness\"]",
            ],
        ]
        .concat(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
