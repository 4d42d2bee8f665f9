use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calr-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("CALR_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).expect("column");
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

fn run_bundled(name: &str, extra: &[&str]) -> (tempfile::TempDir, Output) {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", name, "--out", "out"];
    args.extend_from_slice(extra);
    let out = lab(&args, dir.path());
    (dir, out)
}

#[test]
fn homogeneous_scenario_has_zero_energy() {
    let (dir, out) = run_bundled("homogeneous_null", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("out/energy_sweep.csv")).unwrap();
    let energies = column(&text, "energy");
    assert_eq!(energies.len(), 3);
    assert!(energies.iter().all(|e| e.parse::<f64>().unwrap() == 0.0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["scenario"]["name"], "homogeneous_null");
    assert!(manifest["points"].as_array().unwrap().len() == 3);
}

#[test]
fn blowup_scenario_reports_the_growth_rate() {
    let (dir, out) = run_bundled("thm31_blowup", &[]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("out/energy_sweep.csv")).unwrap();
    let slope: f64 = column(&text, "growth_slope")[0].parse().unwrap();
    let expected = (8.0f64 / 6.25).ln();
    assert!((slope - expected).abs() <= 0.15 * expected, "{slope}");
    assert!(column(&text, "verdict").iter().all(|v| v == "Blowup"));
    assert!(dir.path().join("out/field_profile.csv").exists());
}

#[test]
fn reversed_grid_exits_with_parse_status() {
    let dir = tempfile::tempdir().unwrap();
    let text = include_str!("../scenarios/thm22_standard.json").replace("\"start\": 1e-2", "\"start\": 1e-9");
    std::fs::write(dir.path().join("bad.json"), text).unwrap();
    let out = lab(&["run", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta_grid.start"));
}

#[test]
fn malformed_json_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"name\": \"x\",\n  \"geometry\": 3\n}").unwrap();
    let out = lab(&["check", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn violated_hypothesis_exits_with_precondition_status() {
    // the core-shell dual bound needs the source inside the critical radius
    let dir = tempfile::tempdir().unwrap();
    let text = include_str!("../scenarios/thm24_core_shell_dual.json").replace("\"q\": 2.5", "\"q\": 3.0");
    std::fs::write(dir.path().join("far.json"), text).unwrap();
    let out = lab(&["check", "far.json"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lab(&["run", "far.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_scenario_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["run", "nope.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn catalogue_lists_every_theorem_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["list"], dir.path());
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().count() >= 10);
    let out = lab(&["list", "--json"], dir.path());
    let all: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert!(all.len() >= 9);
    for s in &all {
        let path = dir.path().join(format!("{}.json", s["name"].as_str().unwrap()));
        std::fs::write(&path, serde_json::to_string(s).unwrap()).unwrap();
        let out = lab(&["check", path.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bundled_verdicts_match_their_theorems() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["list", "--json"], dir.path());
    let all: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    for s in all {
        let name = s["name"].as_str().unwrap();
        let expected = s["expected_verdict"].as_str().unwrap();
        let (dir, out) = run_bundled(name, &[]);
        assert!(out.status.success(), "{name}");
        let text = std::fs::read_to_string(dir.path().join("out/energy_sweep.csv")).unwrap();
        assert_eq!(column(&text, "verdict")[0], expected, "{name}");
    }
}

#[test]
fn outputs_are_identical_across_runs_and_thread_counts() {
    for name in ["thm31_calr", "thm27_adaptive_shell_primal"] {
        let (a, _) = run_bundled(name, &["--threads", "1"]);
        let (b, _) = run_bundled(name, &["--threads", "8"]);
        let (c, _) = run_bundled(name, &["--threads", "8"]);
        let mut files = 0;
        for entry in std::fs::read_dir(a.path().join("out")).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            let file = path.file_name().unwrap();
            let x = std::fs::read(&path).unwrap();
            assert_eq!(x, std::fs::read(b.path().join("out").join(file)).unwrap(), "{name}");
            assert_eq!(x, std::fs::read(c.path().join("out").join(file)).unwrap(), "{name}");
            files += 1;
        }
        assert!(files >= 2);
    }
}
