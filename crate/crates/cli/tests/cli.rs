use std::path::PathBuf;
use std::process::{Command, Output};

use cdimlab::coverings::doubling_colored_cover;
use cdimlab::spaces::unit_grid;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdimlab"))
        .args(args)
        .env_remove("CDIMLAB_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cdimlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn audit_reports_first_template_faces() {
    let o = run(&["complex", "--m", "2", "--k", "3", "--depth", "1", "--audit"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["result"]["audit"]["faces"], 48);
    assert_eq!(v["result"]["osc"]["interior_overlaps"], 0);
    assert_eq!(v["config"]["command"]["Complex"]["params"]["m"], 2);
}

#[test]
fn cantor_profile_csv() {
    let o = run(&["profile", "--space", "cantor", "--depth", "6", "--tau-grid", "3^-2,3^-4", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# schema_version: 1\n"));
    let tau = 3f64.powi(-4);
    let row = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| (f[0].parse::<f64>().unwrap() - tau).abs() < 1e-15)
        .expect("row at 3^-4");
    assert_eq!(row[1], "1");
    assert!(row[2].parse::<f64>().unwrap() >= 0.5);
}

fn write_cover(name: &str, r: f64, carrier: std::ops::RangeInclusive<usize>) -> PathBuf {
    let x = unit_grid(100);
    let mut c = doubling_colored_cover(&x, r);
    c.carrier = carrier.collect();
    let p = scratch(name);
    std::fs::write(&p, serde_json::to_string(&c).unwrap()).unwrap();
    p
}

#[test]
fn merge_reports_the_violated_hypothesis() {
    let u = write_cover("u.json", 0.1, 0..=60);
    let v = write_cover("v_coarse.json", 0.3, 40..=100);
    let o = run(&["cover", "merge", "--space", "grid", "--n", "100", "--u", u.to_str().unwrap(), "--v", v.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("mesh(V) exceeds L(U)/2"), "{err}");
}

#[test]
fn merge_of_fine_cover_succeeds() {
    let u = write_cover("u2.json", 0.1, 0..=60);
    let v = write_cover("v_fine.json", 0.005, 40..=100);
    let o = run(&["cover", "merge", "--space", "grid", "--n", "100", "--u", u.to_str().unwrap(), "--v", v.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep["result"]["stats"]["multiplicity"].as_u64().unwrap() >= 1);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["complex", "--depth", "1", "--g", "2", "--limit", "3", "--seed", "11", "--format", "csv"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["complex", "--depth", "1", "--g", "2", "--limit", "3", "--seed", "12", "--format", "csv"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn exit_codes_are_distinct() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["space", "--space", "grid", "--n", "100", "--cap", "10"]).status.code(), Some(3));
    let bad = scratch("bad.txt");
    std::fs::write(&bad, "3\nmatrix\n0 1\n").unwrap();
    assert_eq!(run(&["hyperbolicity", "--input", bad.to_str().unwrap()]).status.code(), Some(4));
    let capped = Command::new(env!("CARGO_BIN_EXE_cdimlab"))
        .args(["space", "--space", "cantor", "--depth", "6"])
        .env("CDIMLAB_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
}

#[test]
fn generated_space_round_trips_through_input() {
    let o = run(&["space", "--space", "circle", "--n", "20"]);
    let p = scratch("circle.txt");
    std::fs::write(&p, &o.stdout).unwrap();
    let h = run(&["hyperbolicity", "--input", p.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&stdout(&h)).unwrap();
    assert!((v["result"]["delta"].as_f64().unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn refine_meets_its_bounds() {
    let o = run(&["cover", "refine"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v["result"].as_array().unwrap() {
        let s = &row["stats"];
        assert_eq!(s["multiplicity"], 1);
        assert!(s["mesh"].as_f64().unwrap() <= row["mesh_bound"].as_f64().unwrap());
        assert!(s["lebesgue"].as_f64().unwrap() >= row["lebesgue_bound"].as_f64().unwrap() * (1.0 - 1e-9));
    }
}

#[test]
fn check_suite_passes() {
    let o = run(&["check", "--format", "csv"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
