use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emoscreen::analytics::EvolutionMatrix;
use emoscreen::io::read_evolution_csv;

fn emoscreen(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emoscreen")).current_dir(cwd).env_remove("EMOSCREEN_SEED").args(args).output().unwrap()
}

fn ok(cwd: &Path, args: &[&str]) -> String {
    let out = emoscreen(cwd, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = emoscreen(dir.path(), &["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
    let out = emoscreen(dir.path(), &["recognize", "--frames-dir", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(emoscreen(dir.path(), &["--help"]).status.success());
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = emoscreen(dir.path(), &["--out", "o", "detect-face", "--image", "absent.pgm"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("emoscreen: error:") && err.contains("absent.pgm"), "{err}");
}

#[test]
fn cost_report_ratios() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--out", "o", "cost-report"]);
    let tsv = fs::read_to_string(dir.path().join("o/cost_report.tsv")).unwrap();
    let mut rows = tsv.lines();
    assert!(rows.next().unwrap().starts_with("layers\tkind\tk"));
    let mut separable = 0;
    for row in rows {
        let f: Vec<&str> = row.split('\t').collect();
        if f[1] != "separable" {
            continue;
        }
        separable += 1;
        let (k, co): (f64, f64) = (f[2].parse().unwrap(), f[4].parse().unwrap());
        let ratio: f64 = f[10].parse().unwrap();
        assert!((ratio - (1.0 / co + 1.0 / (k * k))).abs() < 1e-12, "{row}");
        let (std_macs, sep_macs): (u64, u64) = (f[7].parse().unwrap(), f[8].parse().unwrap());
        assert!((sep_macs as f64 / std_macs as f64 - ratio).abs() < 1e-12);
    }
    assert!(separable >= 10);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/cost_report.json")).unwrap()).unwrap();
    assert_eq!(json["upto"], "block_11_add");
}

#[test]
fn stub_recognition_gives_stochastic_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    ok(
        cwd,
        &[
            "--out",
            "o",
            "synth-cohort",
            "--n-healthy",
            "1",
            "--n-impaired",
            "1",
            "--n-frames",
            "6",
            "--window-start",
            "2",
            "--window-width",
            "2",
            "--with-frames",
        ],
    );
    ok(cwd, &["--out", "o", "recognize", "--cohort", "o/cohort.jsonl", "--stub", "happy"]);
    for id in ["h001", "i001"] {
        let m: EvolutionMatrix = read_evolution_csv(&cwd.join(format!("o/evolution/{id}.csv"))).unwrap();
        assert_eq!(m.n_frames(), 6);
        for c in m.columns() {
            assert!((c.values().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
}

fn full_run(cwd: &Path, out: &str, seed: &str) {
    let o = |rest: &[&str]| {
        let mut args = vec!["--out", out, "--seed", seed];
        args.extend_from_slice(rest);
        ok(cwd, &args)
    };
    let p = |f: &str| format!("{out}/{f}");
    o(&[
        "synth-cohort",
        "--n-healthy",
        "2",
        "--n-impaired",
        "2",
        "--n-frames",
        "10",
        "--window-start",
        "4",
        "--window-width",
        "4",
        "--with-frames",
        "--labeled-frames",
        "2",
    ]);
    o(&["train-emotion", "--frames", &p("train_frames.csv"), "--classifier", "knn"]);
    o(&["recognize", "--cohort", &p("cohort.jsonl"), "--emotion-model", &p("emotion_model.emsm")]);
    o(&["compare-groups", "--cohort", &p("cohort.jsonl"), "--matrices", &p("evolution"), "--window", "4"]);
    o(&[
        "evaluate-mci",
        "--cohort",
        &p("cohort.jsonl"),
        "--matrices",
        &p("evolution"),
        "--window",
        "4",
        "--train-healthy",
        "1",
        "--train-impaired",
        "1",
        "--test-healthy",
        "1",
        "--test-impaired",
        "1",
    ]);
}

#[test]
fn identical_seeds_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    full_run(cwd, "a", "7");
    full_run(cwd, "b", "7");
    let mut names: Vec<String> = fs::read_dir(cwd).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["a", "b"], "outputs must stay under --out");

    let (fa, fb) = (files(&cwd.join("a")), files(&cwd.join("b")));
    assert_eq!(fa, fb);
    let mut compared = 0;
    for f in &fa {
        let ext = f.extension().and_then(|e| e.to_str()).unwrap_or("");
        if matches!(ext, "csv" | "svg" | "pgm" | "emsm") {
            assert_eq!(fs::read(cwd.join("a").join(f)).unwrap(), fs::read(cwd.join("b").join(f)).unwrap(), "{}", f.display());
            compared += 1;
        }
    }
    assert!(fa.iter().any(|f| f.extension().is_some_and(|e| e == "svg")));
    assert!(compared > 20);

    full_run(cwd, "c", "8");
    let differ = files(&cwd.join("a"))
        .iter()
        .filter(|f| f.starts_with("matrices"))
        .any(|f| fs::read(cwd.join("a").join(f)).unwrap() != fs::read(cwd.join("c").join(f)).unwrap());
    assert!(differ, "a different seed should change the cohort");
}
