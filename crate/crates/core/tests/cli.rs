use std::process::Command;

use incent::harness::RunRecord;
use incent::InstanceDocument;

fn incent() -> Command {
    Command::new(env!("CARGO_BIN_EXE_incent"))
}

#[test]
fn gen_emits_a_valid_document() {
    let out = incent()
        .args(["gen", "--kind", "example32", "--delta", "0.705"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc = InstanceDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(doc.mu[0][2], 0.905);
    for kind in ["hard_b1", "hard_b2", "smooth_hard", "random", "gaussian"] {
        let out = incent().args(["gen", "--kind", kind, "--T", "4096"]).output().unwrap();
        assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        InstanceDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    }
}

#[test]
fn bad_input_gives_a_json_error_line() {
    let out = incent()
        .args(["gen", "--kind", "example32", "--delta", "0.9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let line: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"], "invalid_argument");
    let out = incent()
        .args(["run", "--config", "/no/such/file.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_on_golden_instances() {
    let out = incent().arg("verify").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 failed"));
}

#[test]
fn verify_fails_on_an_understated_lipschitz_constant() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = InstanceDocument::from_json(include_str!("../golden/gaussian.json")).unwrap();
    for m in doc.model.as_mut().unwrap() {
        if let incent::smooth::ModelSpec::GaussianGreedy { lipschitz, .. } = m {
            *lipschitz = 1.0;
        }
    }
    let path = dir.path().join("bad.json");
    doc.save(&path).unwrap();
    let out = incent().args(["verify", "--instance"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let first = String::from_utf8_lossy(&out.stderr).lines().next().unwrap().to_string();
    let line: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(line["suite"], "lipschitz");
}

#[test]
fn run_is_reproducible_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "horizon = 300\nseeds = [2, 1]\n[instance]\nkind = \"example32\"\n[policy]\nname = \"exp3linear\"\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let st = incent()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(st.success());
    }
    let name = "example32-exp3linear-T300-s0001.json";
    let ra = std::fs::read(a.join("records").join(name)).unwrap();
    let rb = std::fs::read(b.join("records").join(name)).unwrap();
    assert_eq!(ra, rb);
    let rec: RunRecord = serde_json::from_slice(&ra).unwrap();
    assert_eq!(rec.rounds.len(), 300);
    assert_eq!(rec.regret_curve.len(), 10);
    let csv = std::fs::read_to_string(a.join("regret.csv")).unwrap();
    assert!(csv.starts_with("run_id,t,regret_mean,regret_stderr,policy,instance,seed_count\n"));
    let plots = dir.path().join("plots");
    let st = incent()
        .arg("plot")
        .arg(a.join("records"))
        .arg("--out")
        .arg(&plots)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(std::fs::read_to_string(plots.join("regret.svg"))
        .unwrap()
        .contains("<polyline"));
}

#[test]
fn flag_driven_run_and_bench() {
    let dir = tempfile::tempdir().unwrap();
    let st = incent()
        .args([
            "run",
            "--instance",
            "smooth_hard",
            "--policy",
            "tsallis",
            "--T",
            "256",
            "--seeds",
            "2",
            "--eps",
            "0.05",
            "--menu",
            "grid",
        ])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let out = dir.path().join("bench");
    let res = incent()
        .args([
            "bench",
            "--instance",
            "hard_b1",
            "--policy",
            "exp3linear",
            "--Ts",
            "256..1024",
            "--seeds",
            "3",
        ])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("bench_summary.json")).unwrap()).unwrap();
    assert!(summary["slope"].is_number());
}
