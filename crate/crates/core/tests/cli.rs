use std::fs;
use std::process::Command;

fn txauth() -> Command {
    Command::new(env!("CARGO_BIN_EXE_txauth"))
}

#[test]
fn generate_then_run_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = txauth()
        .args(["generate", "--out", data.to_str().unwrap(), "--n-tx", "6", "--min-frames", "12", "--max-frames", "12"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(data.join("frames.bin").exists() && data.join("manifest.json").exists());

    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        serde_json::json!({
            "corpus": {"path": data},
            "sizes": {"authorized": 2, "known": 1, "unseen": 2},
            "archs": ["ova"],
            "training": {"epochs": 1},
            "extractor": {"block_filters": [4], "kernel_size": 3, "feature_dim": 4},
            "output_dir": dir.path().join("out"),
        })
        .to_string(),
    )
    .unwrap();
    let out = txauth().args(["run", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["archs"][0]["arch"], "ova");
    assert!(dir.path().join("out/run/r0/ova/metrics.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"corpus\": 3}").unwrap();
    let code = |args: &[&str]| txauth().args(args).output().unwrap().status.code();

    assert_eq!(code(&["run", "--config", bad.to_str().unwrap()]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));

    let infeasible = dir.path().join("inf.json");
    fs::write(
        &infeasible,
        serde_json::json!({
            "corpus": {"generate": {"n_tx": 5, "frames_per_tx": [5, 5], "seed": 1}},
            "known_grid": [0], "known_sweep_authorized": 3, "known_sweep_outliers": 26,
            "output_dir": dir.path().join("out"),
        })
        .to_string(),
    )
    .unwrap();
    assert_eq!(code(&["sweep-known", "--config", infeasible.to_str().unwrap()]), Some(3));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&["report", empty.to_str().unwrap()]), Some(4));
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&["run", "--config", missing.to_str().unwrap()]), Some(4));
}
