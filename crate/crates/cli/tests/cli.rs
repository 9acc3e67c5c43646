use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mlood_core::io::{read_matrix, save_matrix};
use mlood_core::Matrix;

fn mlood(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlood"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = mlood(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: [&str; 8] = ["--n-train", "300", "--n-test-in", "120", "--n-test-ood", "120", "--d", "16"];

fn small_pipeline(root: &Path) {
    let task = root.join("task");
    let mut synth = vec!["synth", "--out", p(&task), "--seed", "5"];
    synth.extend(SMALL);
    ok(&synth);
    ok(&["train", "--task", p(&task), "--out", p(&root.join("model.bin")), "--epochs", "20"]);
}

#[test]
fn score_and_eval_pipeline_is_byte_identical_across_runs() {
    let runs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &runs {
        let root = dir.path();
        small_pipeline(root);
        let (task, model) = (root.join("task"), root.join("model.bin"));
        for split in ["test_in", "test_ood"] {
            ok(&[
                "score", "--method", "energy:sum", "--task", p(&task), "--model", p(&model), "--split", split,
                "--out", p(&root.join(format!("{split}.bin"))),
            ]);
        }
        ok(&[
            "eval", "--in", p(&root.join("test_in.bin")), "--ood", p(&root.join("test_ood.bin")),
            "--out", p(&root.join("report.json")), "--csv", p(&root.join("report.csv")),
            "--method", "energy:sum", "--roc", p(&root.join("roc.csv")),
        ]);
    }
    for name in ["model.bin", "train_report.json", "test_in.bin", "test_ood.bin", "report.json", "report.csv", "roc.csv"] {
        let a = fs::read(runs[0].path().join(name)).unwrap();
        let b = fs::read(runs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    let csv = fs::read_to_string(runs[0].path().join("report.csv")).unwrap();
    assert!(csv.starts_with("method,aggregation,fpr95,auroc,aupr,tau,n_in,n_ood\nenergy,sum,"));
}

#[test]
fn eval_of_equal_multisets_is_chance() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..40).map(|i| f64::from(i) * 0.25).collect();
    let mut reversed = values.clone();
    reversed.reverse();
    save_matrix(&dir.path().join("a.csv"), &Matrix::column(values).unwrap()).unwrap();
    save_matrix(&dir.path().join("b.bin"), &Matrix::column(reversed).unwrap()).unwrap();
    let report = dir.path().join("r.json");
    ok(&["eval", "--in", p(&dir.path().join("a.csv")), "--ood", p(&dir.path().join("b.bin")), "--out", p(&report)]);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(report).unwrap()).unwrap();
    assert_eq!(json["auroc"], 0.5);
    assert_eq!(json["n_in"], 40);
}

#[test]
fn failures_are_machine_readable_and_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scores.bin");
    let res = mlood(&["score", "--method", "energy:sum", "--logits", p(&dir.path().join("absent.bin")), "--out", p(&out)]);
    assert!(!res.status.success());
    let err = String::from_utf8(res.stderr).unwrap();
    assert!(err.starts_with("error: code=MissingArtifact message="), "{err}");
    assert!(!out.exists());

    let res = mlood(&["score", "--method", "energy:bogus", "--logits", "x.bin", "--out", p(&out)]);
    assert!(String::from_utf8(res.stderr).unwrap().starts_with("error: code=InvalidSpec"));

    fs::write(dir.path().join("bad.bin"), b"OODX\x01\x01\0\0").unwrap();
    let res = mlood(&["score", "--method", "energy:sum", "--logits", p(&dir.path().join("bad.bin")), "--out", p(&out)]);
    assert!(String::from_utf8(res.stderr).unwrap().starts_with("error: code=BadMagic"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn exactly_one_input_source() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(&dir.path().join("s.bin")).to_string();
    let res = mlood(&["score", "--method", "energy:sum", "--out", &out]);
    assert!(String::from_utf8(res.stderr).unwrap().starts_with("error: code=InvalidConfig"));
    // clap rejects the combination itself
    let res = mlood(&["score", "--method", "energy:sum", "--task", "t", "--logits", "l.bin", "--out", &out]);
    assert!(!res.status.success());
}

#[test]
fn odin_on_logits_warns_on_stderr_only() {
    let dir = tempfile::tempdir().unwrap();
    let logits = dir.path().join("logits.csv");
    save_matrix(&logits, &Matrix::new(2, 3, vec![1.0, -2.0, 3.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
    let out = dir.path().join("s.csv");
    let res = mlood(&["score", "--method", "odin:max@epsilon=0.002", "--logits", p(&logits), "--out", p(&out)]);
    assert!(res.status.success());
    assert!(String::from_utf8(res.stderr).unwrap().contains("forced to 0"));
    assert!(res.stdout.is_empty());
    let s = read_matrix(&out).unwrap();
    assert!((s.get(0, 0) - 0.9525741268224334).abs() < 1e-12);
    assert_eq!(s.get(1, 0), 0.5);
}

#[test]
fn config_file_fills_in_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let task = dir.path().join("task");
    fs::write(&cfg, format!("# small task\nout={}\nn_train=50\nn-test-in=20\nn-test-ood=20\nseed=3\n", task.display())).unwrap();
    ok(&["synth", "--config", p(&cfg), "--n-train", "40"]);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(task.join("task.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["n_train"], 40);
    assert_eq!(meta["config"]["n_test_in"], 20);
    assert_eq!(meta["config"]["seed"], 3);
}

#[test]
fn bench_covers_every_method_and_aggregation() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_pipeline(root);
    let out = root.join("bench.csv");
    ok(&[
        "bench", "--task", p(&root.join("task")), "--model", p(&root.join("model.bin")), "--out", p(&out),
        "--n-per-part", "30", "--trees", "20", "--neighbors", "10", "--tune-dir", p(&root.join("tune")),
    ]);
    let text = fs::read_to_string(out).unwrap();
    let pairs: Vec<String> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(":"))
        .collect();
    let mut expected = vec![
        "energy:max", "energy:sum", "iforest:none", "lof:none", "logit:max", "logit:sum", "mahalanobis:max",
        "mahalanobis:sum", "msp:none", "odin_prob:max", "odin_prob:sum", "sigmoid_prob:max", "sigmoid_prob:sum",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    expected.splice(2..2, (1..=8).map(|k| format!("energy:topk-{k}")));
    assert_eq!(pairs, expected);
    for name in ["odin.json", "mahalanobis_max.json", "mahalanobis_sum.json"] {
        assert!(root.join("tune").join(name).exists());
    }
}

#[test]
fn tune_and_histogram_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    small_pipeline(root);
    let (task, model) = (root.join("task"), root.join("model.bin"));
    let tuned = root.join("odin.json");
    ok(&["tune", "--method", "odin", "--task", p(&task), "--model", p(&model), "--n-per-part", "20", "--out", p(&tuned)]);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&tuned).unwrap()).unwrap();
    assert_eq!(json["grid_trace"].as_array().unwrap().len(), 84);
    let tuned = root.join("maha.json");
    ok(&["tune", "--method", "mahalanobis", "--task", p(&task), "--n-per-part", "20", "--out", p(&tuned)]);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&tuned).unwrap()).unwrap();
    assert_eq!(json["grid_trace"].as_array().unwrap().len(), 6);

    let in_logits = Matrix::new(3, 2, vec![1.0, 2.0, 3.0, -1.0, 0.0, 0.5]).unwrap();
    let ood_logits = Matrix::new(2, 2, vec![-2.0, -3.0, -1.0, 0.0]).unwrap();
    save_matrix(&root.join("li.bin"), &in_logits).unwrap();
    save_matrix(&root.join("lo.bin"), &ood_logits).unwrap();
    save_matrix(&root.join("si.bin"), &Matrix::column(vec![3.0, 2.0, 1.0]).unwrap()).unwrap();
    save_matrix(&root.join("so.bin"), &Matrix::column(vec![0.0, 1.5]).unwrap()).unwrap();
    let hist = root.join("hist.csv");
    ok(&[
        "eval", "--in", p(&root.join("si.bin")), "--ood", p(&root.join("so.bin")), "--out", p(&root.join("r.json")),
        "--histogram", p(&hist), "--in-logits", p(&root.join("li.bin")), "--ood-logits", p(&root.join("lo.bin")),
        "--bins", "4",
    ]);
    let text = fs::read_to_string(hist).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "label,bin,lo,hi,in_count,ood_count");
    assert_eq!(rows.len(), 1 + 2 * 4);
    let (mut ci, mut co) = (0, 0);
    for r in &rows[1..5] {
        let f: Vec<&str> = r.split(',').collect();
        ci += f[4].parse::<usize>().unwrap();
        co += f[5].parse::<usize>().unwrap();
    }
    assert_eq!((ci, co), (3, 2));
}
