use sha2::{Digest, Sha256};
use std::path::Path;
use std::process::{Command, Output};

const BOX: &str = r#""density": {"kind": "box", "dim": 1, "half_width": 0.5}"#;

fn tidpp(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{sub}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_tidpp"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join("out").join(name)).unwrap()
}

#[test]
fn dbar_table_has_four_nonincreasing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{ {BOX}, "radii": [1, 2, 4, 8], "depth": 4 }}"#);
    let out = tidpp(dir.path(), "dbar", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(read(dir.path(), "dbar.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 4);
    let totals: Vec<f64> = rows.iter().map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(totals.windows(2).all(|w| w[1] <= w[0]), "{totals:?}");
}

#[test]
fn identical_pair_is_dominated_on_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let k = r#"{"random": {"sites": 4, "lo": 0.1, "hi": 0.9, "seed": 3}}"#;
    let cfg = format!(r#"{{ {BOX}, "pair": {{"lower": {k}, "upper": {k}}} }}"#);
    let out = tidpp(dir.path(), "dominate", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&read(dir.path(), "dominate.json")).unwrap();
    let cert = &report["results"]["comparisons"][0]["report"]["certificate"];
    assert_eq!(cert["verdict"], "dominated");
    assert!(cert["coupling"].as_array().unwrap().iter().all(|p| p[0] == p[1]));
}

#[test]
fn sample_tv_row_and_tolerance_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{ {BOX}, "kernel": {{"random": {{"sites": 6, "lo": 0.05, "hi": 0.95, "seed": 11}}}}, "draws": 100000 }}"#);
    let out = tidpp(dir.path(), "sample", &cfg, &["--seed", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&read(dir.path(), "sample.json")).unwrap();
    let row = &report["results"]["seeds"][0];
    assert_eq!(row["seed"], 4);
    assert!(row["tv"].as_f64().unwrap() <= 0.01);

    // a tolerance no finite sample meets → exit 2 with the failing check listed
    let out = tidpp(dir.path(), "sample", &cfg, &["--seed", "4", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(2));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["passed"], false);
    assert!(summary["failed"].as_array().unwrap().iter().any(|c| c["name"] == "tv seed=4"));
}

#[test]
fn invalid_configs_exit_three_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        "not json".to_string(),
        format!(r#"{{ {BOX}, "radii": [0] }}"#),
        format!(r#"{{ {BOX}, "unknown": true }}"#),
        r#"{"density": {"kind": "box", "dim": 1, "half_width": -1}}"#.to_string(),
    ] {
        let out = tidpp(dir.path(), "dbar", &cfg, &[]);
        assert_eq!(out.status.code(), Some(3), "{cfg}");
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"], "invalid-config");
    }
    // a command whose required field is missing
    let out = tidpp(dir.path(), "poisson", &format!("{{ {BOX} }}"), &[]);
    assert_eq!(out.status.code(), Some(3));
    // unknown subcommand
    let out = Command::new(env!("CARGO_BIN_EXE_tidpp")).args(["bogus", "--config", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn outputs_are_byte_identical_and_carry_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{ {BOX}, "region": {{"lo": [0], "hi": [1]}}, "intensity": 5, "seeds": [1, 2], "draws": 2000 }}"#);
    assert_eq!(tidpp(dir.path(), "poisson", &cfg, &[]).status.code(), Some(0));
    let (csv1, json1) = (read(dir.path(), "poisson.csv"), read(dir.path(), "poisson.json"));
    assert_eq!(tidpp(dir.path(), "poisson", &cfg, &[]).status.code(), Some(0));
    assert_eq!(csv1, read(dir.path(), "poisson.csv"));
    assert_eq!(json1, read(dir.path(), "poisson.json"));

    let hash = hex::encode(Sha256::digest(cfg.as_bytes()));
    let version = env!("CARGO_PKG_VERSION");
    let header = String::from_utf8(csv1).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, format!("# tidpp {version} config-sha256 {hash}"));
    let report: serde_json::Value = serde_json::from_slice(&json1).unwrap();
    assert_eq!(report["provenance"]["config_sha256"], hash);
    assert_eq!(report["provenance"]["version"], version);
    assert_eq!(report["provenance"]["config"]["intensity"], 5);
}

#[test]
fn every_subcommand_runs_on_a_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{ {BOX}, "radii": [1], "depth": 3, "window": {{"box": [[0], [2]], "levels": 2}},
              "region": {{"lo": [0], "hi": [2]}}, "mesh": 0.125, "intensity": 2, "draws": 500,
              "displacements": {{"lo": -3, "hi": 3, "count": 13}} }}"#
    );
    for sub in ["kernel-table", "tree-kernel", "sample", "dominate", "dbar", "depend", "vwb", "poisson"] {
        let out = tidpp(dir.path(), sub, &cfg, &[]);
        assert_eq!(out.status.code(), Some(0), "{sub}: {} {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
        let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        for artifact in summary["artifacts"].as_array().unwrap() {
            let bytes = read(dir.path(), artifact.as_str().unwrap());
            let text = String::from_utf8_lossy(&bytes);
            assert!(text.contains("config-sha256") || text.contains("config_sha256"), "{sub}: {artifact}");
            assert!(text.contains(env!("CARGO_PKG_VERSION")), "{sub}: {artifact}");
        }
    }
}
