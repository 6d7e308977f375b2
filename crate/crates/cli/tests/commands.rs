use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gptcca_core::io::{decode_tensor, encode_tensor};
use gptcca_core::{relative_residual, CpDecomposition};
use nalgebra::DMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn gptcca(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gptcca"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let out = gptcca(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn fails(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = gptcca(dir, args);
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn read_csv(path: &Path) -> DMatrix<f64> {
    let text = fs::read_to_string(path).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    DMatrix::from_row_slice(rows.len(), rows[0].len(), &flat)
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().into(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn synth_views(dir: &Path, shape: &str, samples: &str, rank: &str, seed: &str) -> Vec<String> {
    ok(
        dir,
        &[
            "synth", "multiview", "--shape", shape, "--samples", samples, "--rank", rank,
            "--noise-sigma", "0.3", "--seed", seed, "--out", "mv",
        ],
    );
    (0..shape.split('x').count()).map(|j| format!("mv.view{j}.csv")).collect()
}

#[test]
fn synth_tensor_round_trips_and_matches_its_sidecar() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "tensor", "--shape", "5x4x3", "--rank", "2", "--seed", "4", "--out", "t"]);
    let bytes = fs::read(d.join("t.tnsr")).unwrap();
    let t = decode_tensor(&bytes).unwrap();
    assert_eq!(t.shape(), &[5, 4, 3]);
    assert_eq!(encode_tensor(&t).unwrap(), bytes);

    let factors = (0..3).map(|j| read_csv(&d.join(format!("t.truth.mode{j}.csv")))).collect();
    let weights = read_csv(&d.join("t.truth.weights.csv")).iter().copied().collect();
    let cp = CpDecomposition::new(factors, weights).unwrap();
    assert!(relative_residual(&t, &cp).unwrap() <= 1e-12);
}

#[test]
fn synth_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [a.path(), b.path()] {
        ok(dir, &["synth", "tensor", "--shape", "4x3x3", "--rank", "2", "--noise-sigma", "0.01", "--seed", "9", "--out", "t"]);
        synth_views(dir, "5x4x3", "50", "2", "3");
    }
    assert_eq!(files(a.path()), files(b.path()));
}

#[test]
fn decompose_recovers_exact_tensor() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "tensor", "--shape", "5x4x3", "--rank", "2", "--seed", "1", "--out", "t"]);
    let report = ok(d, &["decompose", "--input", "t.tnsr", "--rank", "2", "--method", "gp", "--out", "x"]);
    assert!(report["gp_residual"].as_f64().unwrap() <= 1e-8);
    assert!(report["residual"].as_f64().unwrap() <= 1e-8);
    for j in 0..3 {
        assert_eq!(read_csv(&d.join(format!("x.mode{j}.csv"))).ncols(), 2);
    }
    assert!(d.join("x.weights.csv").exists());
    let on_disk: Value = serde_json::from_slice(&fs::read(d.join("x.report.json")).unwrap()).unwrap();
    assert_eq!(on_disk, report);
}

#[test]
fn refinement_does_not_increase_the_residual() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "tensor", "--shape", "8x6x5", "--rank", "4", "--noise-sigma", "1e-3", "--seed", "2", "--out", "t"]);
    let report = ok(d, &["decompose", "--input", "t.tnsr", "--rank", "4", "--method", "gp+refine", "--seed", "3", "--out", "x"]);
    let gp = report["gp_residual"].as_f64().unwrap();
    let refined = report["refined_residual"].as_f64().unwrap();
    assert!(refined <= gp, "{refined} > {gp}");
    let als = ok(d, &["decompose", "--input", "t.tnsr", "--rank", "4", "--method", "als", "--out", "y"]);
    assert!(als["gp_residual"].is_null());
    assert!(als["sweeps"]["sweeps_used"].as_u64().unwrap() >= 1);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "tensor", "--shape", "5x4x3", "--rank", "2", "--out", "t"]);

    let (code, msg) = fails(d, &["decompose", "--input", "t.tnsr", "--rank", "0", "--out", "x"]);
    assert_eq!(code, 3);
    assert!(msg.contains("rank"));

    let (code, msg) = fails(d, &["decompose", "--input", "t.tnsr", "--rank", "6", "--method", "gp", "--out", "x"]);
    assert_eq!(code, 3);
    assert!(msg.contains("rank"));

    fs::write(d.join("bad.tnsr"), b"TNSX\x01").unwrap();
    let (code, msg) = fails(d, &["decompose", "--input", "bad.tnsr", "--rank", "2", "--out", "x"]);
    assert_eq!(code, 2);
    assert!(msg.contains("magic"));

    let mut truncated = fs::read(d.join("t.tnsr")).unwrap();
    truncated.truncate(40);
    fs::write(d.join("short.tnsr"), truncated).unwrap();
    let (code, msg) = fails(d, &["decompose", "--input", "short.tnsr", "--rank", "2", "--out", "x"]);
    assert_eq!(code, 2);
    assert!(msg.contains("data"));

    let (code, msg) = fails(d, &["synth", "tensor", "--shape", "5x0", "--rank", "1", "--out", "y"]);
    assert_eq!(code, 2);
    assert!(msg.contains("shape"));
}

#[test]
fn tcca_fit_is_byte_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [a.path(), b.path()] {
        let views = synth_views(dir, "6x5x4", "200", "3", "5");
        let mut args = vec!["tcca-fit", "--views"];
        args.extend(views.iter().map(String::as_str));
        args.extend(["--rank", "3", "--seed", "2", "--out", "model.json"]);
        ok(dir, &args);
    }
    assert_eq!(files(a.path()), files(b.path()));
}

#[test]
fn tcca_validation_errors() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let views = synth_views(d, "6x5x4", "40", "2", "1");
    let (code, msg) = fails(
        d,
        &["tcca-fit", "--views", &views[0], &views[1], &views[2], "--rank", "2", "--pca-dim", "5", "--out", "m.json"],
    );
    assert_eq!(code, 2);
    assert!(msg.contains("pca_dim"));

    let short: String = fs::read_to_string(d.join(&views[1])).unwrap().lines().take(10).map(|l| format!("{l}\n")).collect();
    fs::write(d.join("short.csv"), short).unwrap();
    let (code, msg) = fails(
        d,
        &["tcca-fit", "--views", &views[0], "short.csv", &views[2], "--rank", "2", "--out", "m.json"],
    );
    assert_eq!(code, 2);
    assert!(msg.contains("short.csv") && msg.contains(&views[0]));
}

#[test]
fn transform_reproduces_training_rho() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let views = synth_views(d, "8x6x5", "150", "3", "7");
    for extra in [vec![], vec!["--pca-dim", "4", "--center"]] {
        let mut fit = vec!["tcca-fit", "--views", &views[0], &views[1], &views[2], "--rank", "3", "--out", "model.json"];
        fit.extend(extra);
        let report = ok(d, &fit);
        let rho = report["training_rho"].as_f64().unwrap();
        assert!(rho > report["baseline_rho"].as_f64().unwrap());

        let t = ok(d, &["tcca-transform", "--model", "model.json", "--views", &views[0], &views[1], &views[2], "--out", "z.csv"]);
        let z_rho = t["rho"].as_f64().unwrap();
        assert!((z_rho - rho).abs() <= 1e-10 * rho.abs(), "{z_rho} vs {rho}");
        let z = read_csv(&d.join("z.csv"));
        assert_eq!(z.shape(), (150, 9));
    }
}

#[test]
fn zero_rows_project_to_zero() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let views = synth_views(d, "4x3x3", "60", "2", "8");
    ok(d, &["tcca-fit", "--views", &views[0], &views[1], &views[2], "--rank", "2", "--out", "model.json"]);
    for (j, n) in [4, 3, 3].iter().enumerate() {
        let row = vec!["0"; *n].join(",");
        fs::write(d.join(format!("zero{j}.csv")), format!("{row}\n{row}\n")).unwrap();
    }
    ok(d, &["tcca-transform", "--model", "model.json", "--views", "zero0.csv", "zero1.csv", "zero2.csv", "--out", "z.csv"]);
    let z = read_csv(&d.join("z.csv"));
    assert_eq!(z.shape(), (2, 6));
    assert!(z.iter().all(|&x| x == 0.0));

    let (code, _) = fails(d, &["tcca-transform", "--model", "model.json", "--views", "zero1.csv", "zero1.csv", "zero2.csv", "--out", "z.csv"]);
    assert_eq!(code, 2);
}

#[test]
fn bench_is_reproducible_and_recovers_exact_tensors() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["bench", "--shape", "6x5x4", "--rank", "3", "--noise-sigma", "0", "--trials", "4", "--restarts", "1", "--max-sweeps", "50", "--seed", "11", "--out", "b"];
    let report = ok(a.path(), &args);
    ok(b.path(), &args);
    assert_eq!(files(a.path()), files(b.path()));
    assert!(report["summary"]["gp_exact_rate"].as_f64().unwrap() >= 0.95);
    assert_eq!(report["per_trial"].as_array().unwrap().len(), 4);
    assert!(report.get("timings").is_none());

    let timed = ok(a.path(), &["bench", "--trials", "1", "--restarts", "1", "--max-sweeps", "5", "--timings", "--out", "c"]);
    assert!(timed["timings"].is_array());
}
