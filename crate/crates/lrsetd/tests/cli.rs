use std::path::Path;
use std::process::{Command, Output};

use lrsetd::images::write_image;
use lrsetd::tensor_file::{read_mask, read_tensor, write_mask, write_tensor};
use lrsetd_core::*;
use serde_json::Value;

fn lrsetd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrsetd"))
        .args(args)
        .env_remove("LRSETD_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = lrsetd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn small_image(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("img.ppm");
    let t = DenseTensor::from_fn(&[8, 8, 3], |i| (i[0] * 20 + i[1] * 7 + i[2] * 50) as f64).unwrap();
    write_image(&path, &t).unwrap();
    path
}

#[test]
fn fully_observed_image_is_returned_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let report = dir.path().join("r.json");
    let out = dir.path().join("rec.ppm");
    ok(&["complete", "--input", p(&img), "--preset", "image", "--sample-ratio", "1.0",
         "--ranks", "2,2,2", "--report", p(&report), "--out", p(&out)]);
    let r = json(&report);
    assert_eq!(r["metrics"]["rse"], 0.0);
    assert!(r["metrics"]["nmae"].is_null());
    assert!(r["iterations"].as_u64().unwrap() <= 2);
    assert_eq!(r["missing"], 0);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&img).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let code = |out: Output| out.status.code().unwrap();

    let bad_preset = lrsetd(&["complete", "--input", p(&img), "--preset", "movies", "--sample-ratio", "0.5"]);
    assert_eq!(code(bad_preset.clone()), 2);
    let stderr = String::from_utf8(bad_preset.stderr).unwrap();
    assert!(stderr.starts_with("error: ") && stderr.lines().count() == 1, "{stderr}");

    assert_eq!(code(lrsetd(&["complete", "--input", p(&img)])), 2);
    assert_eq!(code(lrsetd(&["complete", "--input", p(&img), "--sample-ratio", "0.5", "--ranks", "9,1,1"])), 2);
    assert_eq!(code(lrsetd(&["complete", "--input", p(&img), "--sample-ratio", "1.5"])), 2);
    assert_eq!(code(lrsetd(&["complete", "--bogus"])), 2);
    let missing = dir.path().join("missing.lrt");
    assert_eq!(code(lrsetd(&["complete", "--input", p(&missing), "--sample-ratio", "0.5"])), 3);
    let junk = dir.path().join("junk.lrt");
    std::fs::write(&junk, b"LRT1").unwrap();
    assert_eq!(code(lrsetd(&["complete", "--input", p(&junk), "--sample-ratio", "0.5"])), 3);

    let nan = dir.path().join("nan.lrt");
    let mut t = DenseTensor::from_fn(&[3, 3, 3], |i| i[0] as f64).unwrap();
    t.set(&[1, 1, 1], f64::NAN);
    write_tensor(&nan, &t).unwrap();
    assert_eq!(code(lrsetd(&["complete", "--input", p(&nan), "--sample-ratio", "1.0"])), 4);

    let threads = Command::new(env!("CARGO_BIN_EXE_lrsetd"))
        .args(["mask-gen", "--dims", "2,2,2", "--sample-ratio", "1", "--out", p(&dir.path().join("m.lrt"))])
        .env("LRSETD_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(threads), 2);
    assert_eq!(code(lrsetd(&["--help"])), 0);
}

#[test]
fn file_pipeline_matches_in_memory_solve() {
    let dims = [20, 20, 20];
    let truth = SyntheticSpec::new(&dims, &[2, 2, 2], 7).generate().unwrap().reconstruct().unwrap();
    let mask = random_mask(&dims, 0.6, 7).unwrap();
    let mut cfg = SolverConfig::preset(Preset::Image, &dims);
    cfg.ranks = [2, 2, 2];
    let observed = project_assign(&DenseTensor::zeros(&dims).unwrap(), &mask, &truth).unwrap();
    let rep = solve(&observed, &mask, &cfg, None).unwrap();
    let expected = rse(&truth, &rep.recovered).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let (input, mask_file) = (dir.path().join("truth.lrt"), dir.path().join("mask.lrt"));
    let (report, out) = (dir.path().join("r.json"), dir.path().join("rec.lrt"));
    write_tensor(&input, &truth).unwrap();
    write_mask(&mask_file, &mask).unwrap();
    ok(&["complete", "--input", p(&input), "--mask", p(&mask_file), "--preset", "image",
         "--ranks", "2,2,2", "--report", p(&report), "--out", p(&out)]);
    let r = json(&report);
    let got = r["metrics"]["rse"].as_f64().unwrap();
    assert!((got - expected).abs() <= 1e-12, "{got} vs {expected}");
    assert_eq!(r["iterations"].as_u64().unwrap() as usize, rep.iterations);
    assert_eq!(read_tensor(&out).unwrap(), rep.recovered);
}

#[test]
fn mask_gen_then_metrics_on_exact_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let (mask, truth) = (dir.path().join("m.lrt"), dir.path().join("t.lrt"));
    let summary: Value = serde_json::from_str(&ok(&[
        "mask-gen", "--dims", "10,10,10", "--sample-ratio", "0.3", "--seed", "5", "--out", p(&mask),
    ]))
    .unwrap();
    assert_eq!(summary["observed"], 300);
    assert_eq!(read_mask(&mask).unwrap(), random_mask(&[10, 10, 10], 0.3, 5).unwrap());
    write_tensor(&truth, &DenseTensor::from_fn(&[10, 10, 10], |i| 1.0 + i[0] as f64).unwrap()).unwrap();
    let m: Value = serde_json::from_str(&ok(&[
        "metrics", "--truth", p(&truth), "--recovered", p(&truth), "--mask", p(&mask),
    ]))
    .unwrap();
    assert_eq!(m["nmae"], 0.0);
    assert_eq!(m["rse"], 0.0);
    assert_eq!(m["psnr"], "inf");
}

#[test]
fn mask_gen_with_bundled_scenarios_and_templates() {
    let dir = tempfile::tempdir().unwrap();
    let like = dir.path().join("like.lrt");
    write_tensor(&like, &DenseTensor::zeros(&[3, 288, 7]).unwrap()).unwrap();
    let out = dir.path().join("m.lrt");
    ok(&["mask-gen", "--like", p(&like), "--scenario", "11", "--seed", "3", "--out", p(&out)]);
    let mask = read_mask(&out).unwrap();
    assert!(mask.indices().all(|i| i[2] != 4));
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, serde_json::to_string(&MissingSpec::whole_slices(0, vec![1])).unwrap()).unwrap();
    ok(&["mask-gen", "--dims", "3,2,2", "--missing-spec", p(&spec), "--out", p(&out)]);
    assert_eq!(read_mask(&out).unwrap().len(), 8);
}

#[test]
fn hosvd_demo_examples() {
    let dir = tempfile::tempdir().unwrap();
    // a superdiagonal tensor: every unfolding has orthogonal rows, so full-rank HOSVD is exact
    let diag = DenseTensor::from_fn(&[4, 4, 4], |i| {
        if i[0] == i[1] && i[1] == i[2] { (1u32 << i[0]) as f64 } else { 0.0 }
    })
    .unwrap();
    let input = dir.path().join("d.lrt");
    write_tensor(&input, &diag).unwrap();
    let csv = ok(&["hosvd-demo", "--input", p(&input), "--grid", "0"]);
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines, ["tn,sparsity,snr", "0,0.9375,inf"]);

    let img = small_image(dir.path());
    let (table, images) = (dir.path().join("h.csv"), dir.path().join("rec"));
    ok(&["hosvd-demo", "--input", p(&img), "--ranks", "4,4,3", "--grid", "0,0.5",
         "--csv", p(&table), "--out-dir", p(&images)]);
    let text = std::fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(images.join("tn_0.ppm").exists() && images.join("tn_0.5.ppm").exists());
    assert_eq!(lrsetd(&["hosvd-demo", "--input", p(&img), "--grid", "-1"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let (cfg, report, trace) = (dir.path().join("c.json"), dir.path().join("r.json"), dir.path().join("t.csv"));
    std::fs::write(
        &cfg,
        serde_json::json!({
            "input": p(&img), "preset": "image", "sample_ratio": 0.5, "seed": 2,
            "ranks": [3, 3, 2], "max_iter": 50, "tol": 1e-12, "psnr_scope": "full"
        })
        .to_string(),
    )
    .unwrap();
    ok(&["complete", "--config", p(&cfg), "--max-iter", "4", "--report", p(&report), "--trace-csv", p(&trace)]);
    let r = json(&report);
    assert_eq!(r["iterations"], 4);
    assert_eq!(r["termination"], "max_iter");
    assert_eq!(r["solver"]["ranks"], serde_json::json!([3, 3, 2]));
    assert_eq!(r["experiment"]["max_iter"], 4);
    assert!(r["experiment"].get("report").is_none());
    assert!(r["trace"][0].get("seconds").is_none());
    let rows: Vec<String> = std::fs::read_to_string(&trace).unwrap().lines().map(String::from).collect();
    assert_eq!(rows[0], "iteration,rel_change,lagrangian,objective,seconds");
    assert_eq!(rows.len(), 5);
    assert!(rows[1].ends_with(','));

    ok(&["complete", "--config", p(&cfg), "--max-iter", "2", "--timings", "--report", p(&report)]);
    let r = json(&report);
    assert!(r["trace"][1]["seconds"].as_f64().unwrap() >= 0.0);
    assert!(r["seconds"].as_f64().is_some());
}

#[test]
fn traffic_csv_round_trip_through_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("tm.csv"), dir.path().join("rec.csv"));
    let mut body = String::new();
    for pair in 0..4 {
        let row: Vec<String> = (0..12).map(|t| format!("{}", 10.0 + pair as f64 + (t % 6) as f64)).collect();
        body += &row.join(",");
        body.push('\n');
    }
    std::fs::write(&input, body).unwrap();
    let stdout = ok(&["complete", "--input", p(&input), "--tensorize", "otd:4,6,2", "--preset",
        "traffic-wholeday", "--scenario", "1", "--max-iter", "5", "--out", p(&out)]);
    let r: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(r["missing"], 16);
    assert_eq!(r["dims"], serde_json::json!([4, 6, 2]));
    let rec = lrsetd::traffic::read_traffic_csv(&out).unwrap();
    assert_eq!((rec.rows(), rec.cols()), (4, 12));
}
