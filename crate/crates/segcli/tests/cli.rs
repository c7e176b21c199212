use std::path::Path;
use std::process::Command;

fn segcli(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_segcli"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SPEC: &str = r#"{"width":32,"height":24,"bands":4,"dtype":"u8","noise_sigma":2.0,"seed":11,
  "background":[40,60,30,150],
  "regions":[{"x":0,"y":12,"width":32,"height":12,"means":[120,30,140,40]}],
  "output_header":"img.hdr","output_data":"img.dat","ground_truth":"truth.pgm"}"#;

const CONFIG: &str = r#"{"input_header":"img.hdr","input_data":"img.dat","output_dir":"out","red_band":2,"nir_band":3}"#;

#[test]
fn generate_then_run() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", SPEC);
    write(dir.path(), "cfg.json", CONFIG);
    let (code, _, err) = segcli(&["gen-synthetic", "--spec", "spec.json"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert!(dir.path().join("truth.pgm").is_file());

    let (code, stdout, err) = segcli(&["run", "--config", "cfg.json", "--k", "3", "--seed", "7", "--neighborhood", "vn4"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("manifest.json"));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["k"], 3);
    assert_eq!(manifest["config"]["prng_seed"], 7);
    assert_eq!(manifest["config"]["neighborhood"], "vn4");
}

#[test]
fn stages_one_at_a_time() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", SPEC);
    write(dir.path(), "cfg.json", CONFIG);
    segcli(&["gen-synthetic", "--spec", "spec.json"], dir.path());
    let (code, _, err) = segcli(&["stage", "label", "--config", "cfg.json"], dir.path());
    assert_eq!(code, 3);
    assert!(err.contains("seeds.json"), "{err}");
    for stage in ["gradient", "seeds", "label", "segment", "vectorize"] {
        let (code, _, err) = segcli(&["--threads", "2", "stage", stage, "--config", "cfg.json"], dir.path());
        assert_eq!(code, 0, "{stage}: {err}");
    }
    assert!(dir.path().join("out/overlay.ppm").is_file());
    assert!(dir.path().join("out/stage_segment.json").is_file());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", r#"{"input_header":"a","input_data":"b","output_dir":"c","red_band":1,"nir_band":1}"#);
    write(dir.path(), "unknown.json", r#"{"input_header":"a","input_data":"b","output_dir":"c","red_band":0,"nir_band":1,"colour":1}"#);
    write(dir.path(), "cfg.json", CONFIG);
    assert_eq!(segcli(&["run", "--config", "bad.json"], dir.path()).0, 2);
    assert_eq!(segcli(&["run", "--config", "unknown.json"], dir.path()).0, 2);
    assert_eq!(segcli(&["run", "--config", "missing.json"], dir.path()).0, 2);
    assert_eq!(segcli(&["run", "--config", "cfg.json", "--quant-levels", "1"], dir.path()).0, 2);
    assert_eq!(segcli(&["frobnicate"], dir.path()).0, 2);
}

#[test]
fn pipeline_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", SPEC);
    write(dir.path(), "cfg.json", CONFIG);
    segcli(&["gen-synthetic", "--spec", "spec.json"], dir.path());
    let (code, _, err) = segcli(&["run", "--config", "cfg.json", "--min-seed-size", "100000"], dir.path());
    assert_eq!(code, 3);
    assert!(err.contains("prune"), "{err}");
    std::fs::remove_file(dir.path().join("img.dat")).unwrap();
    assert_eq!(segcli(&["run", "--config", "cfg.json"], dir.path()).0, 3);
}
