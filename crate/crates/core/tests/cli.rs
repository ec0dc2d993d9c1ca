use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_bdagar");

const GRAPH: &str = "nodes: a,b,c,d,e,f\na b\nb c\nd e\ne f\na d\nb e\nc f\n";

const TRUTH: &str = r#"{"beta1": [1.0, 0.5], "beta2": [2.0], "sigma2": [0.2, 0.2], "tau": [3.0, 3.0],
    "rho": [0.6, 0.3], "eta": [0.8, 0.1], "seed": 9, "disease_names": ["lung", "esoph"]}"#;

fn bdagar(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        std::fs::write(root.join("g.adj"), GRAPH).unwrap();
        std::fs::write(root.join("truth.json"), TRUTH).unwrap();
        Self { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn simulate(&self) {
        let out = bdagar(&[
            "simulate",
            "--graph",
            s(&self.path("g.adj")),
            "--truth",
            s(&self.path("truth.json")),
            "--out",
            s(&self.path("data.csv")),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    fn fit(&self, dir: &str, extra: &[&str]) -> Output {
        Command::new(BIN)
            .args([
                "fit",
                "--data",
                s(&self.path("data.csv")),
                "--graph",
                s(&self.path("g.adj")),
            ])
            .args([
                "--iterations",
                "600",
                "--burn-in",
                "300",
                "--thin",
                "3",
                "--out",
                s(&self.path(dir)),
            ])
            .args(extra)
            .output()
            .unwrap()
    }
}

#[test]
fn simulate_writes_data_and_truth() {
    let ws = Workspace::new();
    ws.simulate();
    let data = std::fs::read_to_string(ws.path("data.csv")).unwrap();
    assert!(data.starts_with("region,y_lung,y_esoph,lung_x1\n"));
    assert_eq!(data.lines().count(), 7);
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ws.path("data.csv.truth.json")).unwrap()).unwrap();
    assert_eq!(truth["w"].as_array().unwrap().len(), 12);
}

#[test]
fn fit_writes_directory_and_is_deterministic() {
    let ws = Workspace::new();
    ws.simulate();
    let a = ws.fit("a", &["--seed", "5"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let stdout = String::from_utf8_lossy(&a.stdout);
    assert!(stdout.starts_with("BDAGAR (esoph | lung)"), "{stdout}");
    for f in [
        "draws.csv",
        "summary.csv",
        "waic.json",
        "config_echo.json",
        "acceptance.json",
    ] {
        assert!(ws.path("a").join(f).exists(), "missing {f}");
    }
    assert!(ws.fit("b", &["--seed", "5"]).status.success());
    for f in ["draws.csv", "waic.json", "summary.csv"] {
        assert_eq!(
            std::fs::read(ws.path("a").join(f)).unwrap(),
            std::fs::read(ws.path("b").join(f)).unwrap(),
            "{f} differs"
        );
    }
    let draws = std::fs::read_to_string(ws.path("a/draws.csv")).unwrap();
    assert_eq!(draws.lines().count(), 1 + 100);

    let echo: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ws.path("a/config_echo.json")).unwrap()).unwrap();
    assert_eq!(echo["config"]["vertex_order"][0], "a");
    assert_eq!(echo["config"]["disease_order"][1], "esoph");
    assert_eq!(echo["config"]["mcmc"]["seed"], 5);
}

#[test]
fn waic_corr_map_and_export() {
    let ws = Workspace::new();
    ws.simulate();
    assert!(ws.fit("fwd", &[]).status.success());
    assert!(ws
        .fit("rev", &["--order", "esoph,lung", "--model", "gmcar"])
        .status
        .success());

    let out = bdagar(&[
        "waic",
        s(&ws.path("fwd")),
        s(&ws.path("rev")),
        "--csv",
        s(&ws.path("cmp.csv")),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("Model") && lines[1].ends_with('*') && !lines[2].ends_with('*'));
    assert!(text.contains("BDAGAR (esoph | lung)") && text.contains("GMCAR (lung | esoph)"));
    let csv = std::fs::read_to_string(ws.path("cmp.csv")).unwrap();
    assert!(csv.starts_with("model,lppd,p_waic,waic,best\n"));

    let out = bdagar(&["corr-map", s(&ws.path("fwd")), "--out", s(&ws.path("corr.csv"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let corr = std::fs::read_to_string(ws.path("corr.csv")).unwrap();
    let rows: Vec<&str> = corr.lines().collect();
    assert_eq!(rows[0], "region,mean,lo,hi");
    assert_eq!(rows.len(), 7);
    assert!(rows[1].starts_with("a,"));
    for r in &rows[1..] {
        let v: Vec<f64> = r.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(v.iter().all(|x| (-1.0..=1.0).contains(x)) && v[1] <= v[0] && v[0] <= v[2]);
    }

    let features: Vec<String> = ["a", "b", "c", "d", "e", "f"]
        .iter()
        .map(|id| format!(r#"{{"type": "Feature", "properties": {{"NAME": "{id}"}}, "geometry": null}}"#))
        .collect();
    std::fs::write(
        ws.path("map.geojson"),
        format!(
            r#"{{"type": "FeatureCollection", "features": [{}]}}"#,
            features.join(",")
        ),
    )
    .unwrap();
    let out = bdagar(&[
        "export-map",
        "--values",
        s(&ws.path("corr.csv")),
        "--geojson",
        s(&ws.path("map.geojson")),
        "--id-property",
        "NAME",
        "--field",
        "corr",
        "--out",
        s(&ws.path("joined.geojson")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let joined: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ws.path("joined.geojson")).unwrap()).unwrap();
    assert!(joined["features"][5]["properties"]["corr_hi"].is_number());

    // an unmatched feature is a validation error
    std::fs::write(
        ws.path("extra.geojson"),
        format!(
            r#"{{"type": "FeatureCollection", "features": [{}, {{"type": "Feature", "properties": {{"NAME": "zz"}}}}]}}"#,
            features.join(",")
        ),
    )
    .unwrap();
    let out = bdagar(&[
        "export-map",
        "--values",
        s(&ws.path("corr.csv")),
        "--geojson",
        s(&ws.path("extra.geojson")),
        "--id-property",
        "NAME",
        "--field",
        "corr",
        "--out",
        s(&ws.path("bad.geojson")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz"));
}

#[test]
fn check_reports_identity_at_zero() {
    let ws = Workspace::new();
    let mtx = ws.path("q.mtx");
    let out = bdagar(&[
        "check",
        "--graph",
        s(&ws.path("g.adj")),
        "--rho",
        "0",
        "--matrix-market",
        s(&mtx),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("Q = I"));
    assert!(std::fs::read_to_string(mtx)
        .unwrap()
        .starts_with("%%MatrixMarket matrix coordinate real"));

    let out = bdagar(&[
        "check",
        "--graph",
        s(&ws.path("g.adj")),
        "--rho",
        "0.4",
        "--kind",
        "car",
    ]);
    assert!(out.status.success());
    assert!(!String::from_utf8_lossy(&out.stdout).contains("Q = I"));
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    let g = ws.path("g.adj");
    // usage errors
    assert_eq!(bdagar(&[]).status.code(), Some(1));
    assert_eq!(bdagar(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bdagar(&["--help"]).status.code(), Some(0));
    // invalid values
    assert_eq!(
        bdagar(&["check", "--graph", s(&g), "--rho", "1.0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        bdagar(&["check", "--graph", s(&g), "--rho", "-0.1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        bdagar(&["check", "--graph", s(&ws.path("missing.adj")), "--rho", "0.1"])
            .status
            .code(),
        Some(1)
    );
    std::fs::write(ws.path("bad.adj"), "nodes: a,b\na a\n").unwrap();
    let out = bdagar(&["check", "--graph", s(&ws.path("bad.adj")), "--rho", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    ws.simulate();
    std::fs::write(ws.path("cfg.json"), r#"{"mcmc": {"burn_in": 50, "iterations": 10}}"#).unwrap();
    let out = ws.fit("x", &["--config", s(&ws.path("cfg.json"))]);
    // --iterations/--burn-in on the command line override the file
    assert!(out.status.success());
    std::fs::write(ws.path("cfg.json"), r#"{"mcmc": {"burn_in": 50, "iterations": 10}}"#).unwrap();
    let out = Command::new(BIN)
        .args([
            "fit",
            "--data",
            s(&ws.path("data.csv")),
            "--graph",
            s(&g),
            "--out",
            s(&ws.path("y")),
        ])
        .args(["--config", s(&ws.path("cfg.json"))])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("burn_in"));

    // runtime failure: output directory cannot be created
    std::fs::write(ws.path("blocker"), "").unwrap();
    let out = ws.fit("blocker/sub", &[]);
    assert_eq!(out.status.code(), Some(2));
}
