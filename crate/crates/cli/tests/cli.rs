use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_isowalk"));
    c.env_remove("ISOWALK_CONFIG");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isowalk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn family_file(kind: &str, extra: &[&str]) -> PathBuf {
    let p = scratch(&format!("{kind}{}.json", extra.join("")));
    let mut args = vec!["family", kind, "-o", p.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

fn error_kind(o: &Output) -> String {
    let line = String::from_utf8_lossy(&o.stderr).lines().last().unwrap_or("").to_string();
    let v: Value = serde_json::from_str(&line).unwrap_or_else(|_| panic!("not a JSON error: {line}"));
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn orbit_of_bcc_seed() {
    let o = run(&["orbit", "--group", "S4", "--seed", "1,-1,-1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let vectors = v["vectors"].as_array().unwrap();
    assert_eq!(vectors.len(), 8);
    for x in vectors {
        assert!(x.as_array().unwrap().iter().all(|c| c.as_i64().unwrap().abs() == 1));
    }
}

#[test]
fn shift_walk_dispersion_is_plus_minus_k() {
    let f = family_file("line", &["--angle", "0"]);
    let o = run(&["dispersion", f.to_str().unwrap(), "--points", "101"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 101);
    let wrap = |x: f64| (x + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    for r in rows {
        let (k, wp, wm) = (r[0], r[1], r[2]);
        let direct = wrap(wp - k).abs() < 1e-9 && wrap(wm + k).abs() < 1e-9;
        let swapped = wrap(wp + k).abs() < 1e-9 && wrap(wm - k).abs() < 1e-9;
        assert!(direct || swapped, "k = {k}: {wp}, {wm}");
    }
}

#[test]
fn verify_passes_for_classified_walks() {
    for (kind, extra) in [
        ("weyl-plus", vec![]),
        ("weyl-minus", vec![]),
        ("line", vec!["--angle", "0"]),
        ("line-inverses", vec![]),
        ("square-x", vec![]),
        ("square-inverses", vec![]),
    ] {
        let f = family_file(kind, &extra);
        let o = run(&["verify", f.to_str().unwrap(), "--k-samples", "500"]);
        assert!(o.status.success(), "{kind}: {}", stdout(&o));
        assert!(stdout(&o).trim_end().ends_with("PASS"));
        if kind.starts_with("weyl") {
            assert!(stdout(&o).contains("covariance under D2"));
        }
    }
}

#[test]
fn verify_fails_on_perturbed_walk() {
    let f = family_file("weyl-plus", &[]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let x = v["coins"][0]["matrix"][0][0][0].as_f64().unwrap();
    v["coins"][0]["matrix"][0][0][0] = Value::from(x + 1e-3);
    let g = scratch("perturbed.json");
    std::fs::write(&g, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["verify", g.to_str().unwrap(), "--k-samples", "200"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL"));
    assert!(text.lines().filter(|l| l.contains("difference")).count() > 1);
}

#[test]
fn small_torus_is_a_domain_error() {
    let f = family_file("weyl-plus", &[]);
    let o = run(&["verify", f.to_str().unwrap(), "--torus-n", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "TorusTooSmall");
}

#[test]
fn evolution_preserves_norm() {
    let f = family_file("weyl-plus", &[]);
    let o = run(&["evolve", f.to_str().unwrap(), "--n", "12", "--steps", "50", "--momentum", "0.3,0,-0.2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let norms: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(norms.len(), 51);
    assert!(norms.iter().all(|n| (n - 1.0).abs() <= 1e-9));
    let o = run(&["evolve", f.to_str().unwrap(), "--n", "8", "--steps", "2", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
}

#[test]
fn usage_and_domain_exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--dim", "4"]).status.code(), Some(2));
    let o = run(&["orbit", "--group", "Q7", "--seed", "1,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "UnknownGroup");
    let o = run(&["orbit", "--group", "S4", "--seed", "0,0,0"]);
    assert_eq!(error_kind(&o), "ZeroSeed");
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\"dim\": 1").unwrap();
    let o = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "Parse");
}

fn classify_bytes(args: &[&str], cfg: Option<&Path>) -> (Output, String) {
    let out = scratch(&format!("classify-{}.json", args.join("_")));
    let mut c = bin();
    c.args(["classify"]).args(args).args(["-o", out.to_str().unwrap()]);
    if let Some(p) = cfg {
        c.env("ISOWALK_CONFIG", p);
    }
    let o = c.output().unwrap();
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    (o, text)
}

#[test]
fn classify_line_is_deterministic() {
    let (o, a) = classify_bytes(&["--dim", "1", "--multistarts", "16"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, b) = classify_bytes(&["--dim", "1", "--multistarts", "16"], None);
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["admitted_graphs"], serde_json::json!(["IntegerLine"]));
    assert_eq!(v["walks"].as_array().unwrap().len(), 2);
}

#[test]
fn classify_square_with_config_from_environment() {
    let cfg = scratch("config.json");
    std::fs::write(&cfg, r#"{"multistarts": 50, "rng_seed": 11}"#).unwrap();
    let (o, text) = classify_bytes(&["--dim", "2"], Some(&cfg));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["multistarts"], 50);
    assert_eq!(v["config"]["rng_seed"], 11);
    assert_eq!(v["admitted_graphs"], serde_json::json!(["Square"]));
    assert!(String::from_utf8_lossy(&o.stderr).contains("admitted graphs: Square"));
}

#[test]
fn invalid_config_is_rejected() {
    let cfg = scratch("bad-config.json");
    std::fs::write(&cfg, r#"{"multistarts": 0}"#).unwrap();
    let (o, _) = classify_bytes(&["--dim", "1"], Some(&cfg));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "Invalid");
}
