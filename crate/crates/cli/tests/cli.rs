use polarlet::coeffs::CoefficientSet;
use std::path::Path;
use std::process::{Command, Output};

fn polarlet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarlet")).args(args).output().unwrap()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "status {:?}\nstderr: {}", o.status, String::from_utf8_lossy(&o.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_csv_column(path: &Path, col: usize) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap()[col].parse().unwrap()).collect()
}

fn read_coeffs(path: &Path) -> CoefficientSet {
    CoefficientSet::read_from(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn default_phantom_grid_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = polarlet(&["phantom", "--out", p(dir.path())]);
    ok(&o);
    let values = read_csv_column(&dir.path().join("phantom_grid.csv"), 2);
    assert_eq!(values.len(), 512 * 512);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("phantom_grid.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "phantom");
    assert!(side["timings"]["sample"].as_f64().unwrap() >= 0.0);
}

#[test]
fn disk_phantom_peaks_at_its_density() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("disk.json");
    std::fs::write(&cfg, r#"{"phantom": {"ellipses": [{"center": [0, 0], "semi_axes": [1, 1], "density": 1}]}, "samples": 101, "half": 2.0}"#).unwrap();
    ok(&polarlet(&["phantom", "--config", p(&cfg), "--out", p(dir.path())]));
    let values = read_csv_column(&dir.path().join("phantom_grid.csv"), 2);
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    assert!((max - 1.0).abs() < 1e-12);
}

#[test]
fn malformed_config_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"samples\": 64,\n  \"half\": 4.0,,\n}\n").unwrap();
    let o = polarlet(&["phantom", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_with_config_status() {
    assert_eq!(polarlet(&["project", "--theta", "abc"]).status.code(), Some(2));
    assert_eq!(polarlet(&["no-such-command"]).status.code(), Some(2));
    assert!(polarlet(&["--help"]).status.success());
}

#[test]
fn missing_sinogram_is_a_clear_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = polarlet(&["reconstruct", "--sino", p(&missing), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
}

/// Samples a smooth bump on [−3, 3]², band-limited well inside the J = 3 frame, and analyzes it.
fn analyzed(dir: &Path) -> std::path::PathBuf {
    let cfg = dir.join("bump.json");
    std::fs::write(
        &cfg,
        r#"{"phantom": {"ellipses": [{"center": [0.3, -0.2], "semi_axes": [2.6, 2.4], "density": 1, "profile": 8}]}, "samples": 49, "half": 3.0}"#,
    )
    .unwrap();
    ok(&polarlet(&["phantom", "--config", p(&cfg), "--out", p(dir)]));
    ok(&polarlet(&["analyze", "--input", p(&dir.join("phantom_grid.csv")), "--levels", "3", "--out", p(dir), "--self-check"]));
    dir.join("coeffs.pwcs")
}

#[test]
fn coefficient_files_round_trip_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = analyzed(dir.path());
    let grid = dir.path().join("phantom_grid.csv");
    ok(&polarlet(&["synthesize", "--coeffs", p(&coeffs), "--input", p(&grid), "--out", p(dir.path()), "--self-check"]));
    ok(&polarlet(&["threshold", "--coeffs", p(&coeffs), "--threshold", "0", "--out", p(dir.path())]));
    assert_eq!(read_coeffs(&dir.path().join("thresholded.pwcs")), read_coeffs(&coeffs));
}

#[test]
fn empty_coefficients_project_to_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = analyzed(dir.path());
    ok(&polarlet(&["threshold", "--coeffs", p(&coeffs), "--threshold", "1e9", "--out", p(dir.path())]));
    let empty = dir.path().join("thresholded.pwcs");
    assert!(read_coeffs(&empty).is_empty());
    ok(&polarlet(&["project", "--coeffs", p(&empty), "--theta", "30", "--samples", "41", "--out", p(dir.path())]));
    let v = read_csv_column(&dir.path().join("projection.csv"), 1);
    assert_eq!(v.len(), 41);
    assert!(v.iter().all(|&x| x == 0.0));
}

#[test]
fn projection_reruns_from_its_manifest() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("project.json");
    std::fs::write(
        &cfg,
        r#"{"signal": {"kind": "gaussian", "center": [0.5, 0.0], "sigma": 1.0},
            "setup": {"half": 4.0, "levels": 2, "spacing": 0.25, "apron": 8.0, "orientations": [1, 4, 8]},
            "theta": 30.0}"#,
    )
    .unwrap();
    ok(&polarlet(&["project", "--config", p(&cfg), "--region=-1,2", "--out", p(a.path()), "--self-check"]));
    let side = a.path().join("projection.json");
    ok(&polarlet(&["project", "--config", p(&side), "--out", p(b.path())]));
    let first = std::fs::read(a.path().join("projection.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.path().join("projection.csv")).unwrap());
    let ys = read_csv_column(&a.path().join("projection.csv"), 0);
    assert!(ys.iter().all(|&y| (-1.0..=2.0).contains(&y)));
}

#[test]
fn oracle_mismatch_exits_with_numeric_status() {
    // a single level cannot carry the box edges
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("box.json");
    std::fs::write(
        &cfg,
        r#"{"signal": {"kind": "smooth_box", "half": 1.5, "sigma": 0.05},
            "setup": {"half": 4.0, "levels": 0, "spacing": 0.25, "apron": 8.0, "orientations": [1]}}"#,
    )
    .unwrap();
    let o = polarlet(&["project", "--config", p(&cfg), "--out", p(dir.path()), "--self-check"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("projection.csv").exists());
}

#[test]
fn small_tomography_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tomo.json");
    std::fs::write(
        &cfg,
        r#"{"phantom": {"ellipses": [{"center": [0, 0], "semi_axes": [1.0, 0.8], "density": 1, "profile": 3}]},
            "tomography": {"half": 2.0, "levels": 2, "orientations": 24, "samples": 48, "svd_cutoff": 1e-6, "eval_spacing": 0.125}}"#,
    )
    .unwrap();
    ok(&polarlet(&["sino", "--config", p(&cfg), "--out", p(dir.path())]));
    let sino = dir.path().join("sinogram.csv");
    let header = std::fs::read_to_string(&sino).unwrap().lines().next().unwrap().split(',').count();
    assert_eq!(header, 25);
    let regions = dir.path().join("regions.json");
    std::fs::write(&regions, r#"{"2": [{"lo": [-1.5, -1.5], "hi": [1.5, 1.5]}]}"#).unwrap();
    ok(&polarlet(&["reconstruct", "--config", p(&cfg), "--sino", p(&sino), "--regions", p(&regions), "--out", p(dir.path())]));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("reconstruction.json")).unwrap()).unwrap();
    let cols = side["counts"]["columns"].as_u64().unwrap();
    assert!(cols < side["counts"]["full_columns"].as_u64().unwrap());
    let linf = side["metrics"]["error"]["linf"].as_f64().unwrap();
    assert!(linf < 0.2, "{linf}");
    assert!(dir.path().join("reconstruction.pwcs").exists());
    let image = read_csv_column(&dir.path().join("reconstruction.csv"), 2);
    assert_eq!(image.len(), 33 * 33);
}
