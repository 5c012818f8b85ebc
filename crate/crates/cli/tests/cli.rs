use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_simplex-bundle"));
    c.env_remove("SIMPLEX_BUNDLE_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn column<'a>(header: &[String], row: &'a [String], name: &str) -> &'a str {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    &row[i]
}

#[test]
fn eval_line_interior_rows_are_ok() {
    let o = run(&["eval", "--model", "line", "--grid", "0.05:0.45:9", "--with-score"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| column(&h, r, "status") == "ok"));
}

#[test]
fn eval_line_face_contact_is_reported_in_the_row() {
    let o = run(&["eval", "--model", "line", "--grid", "0.5:0.5:1", "--with-score"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(column(&h, &rows[0], "status"), "abs_continuity_violation");
    assert_eq!(column(&h, &rows[0], "s_1"), "");
}

#[test]
fn eval_entropy3_tangential_hit() {
    let o = run(&["eval", "--model", "entropy3", "--grid", "0.5:0.5:1", "--with-score"]);
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(column(&h, &rows[0], "status"), "ok");
    assert_eq!(column(&h, &rows[0], "s_2"), "0");
    assert_eq!(column(&h, &rows[0], "determined_mask"), "101");
}

#[test]
fn golden_files_are_reproduced_bit_for_bit() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases: [(&str, &[&str]); 2] = [
        (
            "eval_line.csv",
            &["eval", "--model", "line", "--grid", "0.05:0.45:9", "--with-score", "--with-velocity"],
        ),
        ("score_entropy3.csv", &["score", "--model", "entropy3", "--grid", "0.1:0.8:15"]),
    ];
    for (file, args) in cases {
        let expected = fs::read_to_string(golden.join(file)).unwrap();
        assert_eq!(stdout(&run(args)), expected, "{file}");
    }
}

#[test]
fn csv_numbers_round_trip() {
    let o = run(&["eval", "--model", "gibbs", "--ts", "0.7", "--with-score"]);
    let (h, rows) = csv_rows(&stdout(&o));
    let w: f64 = column(&h, &rows[0], "w_2").parse().unwrap();
    let beta: f64 = 0.7;
    let z = 1.0 + beta.exp() + (-1.0 / (beta * beta) + 1.8 * beta).exp();
    assert!((w - beta.exp() / z).abs() < 1e-15);
}

#[test]
fn gibbs_trajectory_passes_the_border_point() {
    let o = run(&["gibbs", "--beta", "-3:3:601"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 601);
    let zero = rows.iter().find(|r| column(&h, r, "beta") == "0").unwrap();
    assert_eq!(column(&h, zero, "w_1"), "0.5");
    assert_eq!(column(&h, zero, "w_2"), "0.5");
    assert_eq!(column(&h, zero, "w_3"), "0");
}

#[test]
fn gibbs_accepts_a_parameter_block() {
    let o = run(&["gibbs", "--beta", "0:0:1", "--params", r#"{"U": [0, 1, 0], "V": [0, 0, 0]}"#]);
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(column(&h, &rows[0], "w_2"), "0");
    assert_eq!(column(&h, &rows[0], "w_3"), "0.5");
}

#[test]
fn entropy_production_is_compensated_at_the_hit() {
    let o = run(&["entropy", "--production", "--grid", "0.1:0.8:141"]);
    let (h, rows) = csv_rows(&stdout(&o));
    let hit = rows.iter().find(|r| column(&h, r, "t") == "0.5").unwrap();
    let v: f64 = column(&h, hit, "dHdt").parse().unwrap();
    assert!(v.abs() < 1e-6);
}

#[test]
fn entropy_production_on_the_default_grid() {
    let o = run(&["entropy", "--production", "--grid", "0.11:0.79:200"]);
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 200);
    let nearest = rows
        .iter()
        .min_by(|a, b| {
            let ta: f64 = column(&h, a, "t").parse().unwrap();
            let tb: f64 = column(&h, b, "t").parse().unwrap();
            (ta - 0.5).abs().total_cmp(&(tb - 0.5).abs())
        })
        .unwrap();
    let t: f64 = column(&h, nearest, "t").parse().unwrap();
    let v: f64 = column(&h, nearest, "dHdt").parse().unwrap();
    // |dH/dt| ≈ 2δ|log δ²| at distance δ from the hit
    let delta = (t - 0.5).abs();
    assert!(v.abs() <= 2.0 * delta * (delta * delta).ln().abs() + 10.0 * delta);
}

#[test]
fn entropy_heatmap_covers_the_triangle() {
    let o = run(&["entropy", "--heatmap", "--resolution", "100"]);
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 100 * 100);
    for r in &rows {
        let v: f64 = column(&h, r, "H").parse().unwrap();
        assert!((0.0..=3f64.ln() + 1e-15).contains(&v));
    }
}

#[test]
fn entropy_writes_both_files_into_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("figs");
    let o = run(&["entropy", "--resolution", "5", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("entropy_production.csv").is_file());
    assert_eq!(fs::read_to_string(out.join("entropy_heatmap.csv")).unwrap().lines().count(), 26);
    assert_eq!(run(&["entropy"]).status.code(), Some(2));
}

#[test]
fn geodesic_rows_and_divergence() {
    let o = run(&["geodesic", "--base", "0.5,0.5,0", "--direction", "1,-1,7", "--grid", "-1:1:3"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    assert_eq!(column(&h, &rows[1], "psi"), "0");
    assert!(rows.iter().all(|r| column(&h, r, "q_3") == "0"));
    let q1: f64 = column(&h, &rows[2], "q_1").parse().unwrap();
    let e = 2f64.exp();
    assert!((q1 - e / (1.0 + e)).abs() < 1e-15);
}

#[test]
fn flow_converges_to_the_face_maximum() {
    let o = run(&["flow", "--start", "0.7,0.3,0"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    let last = rows.last().unwrap();
    let w1: f64 = column(&h, last, "w_1").parse().unwrap();
    assert!((w1 - 0.5).abs() < 1e-6);
    assert_eq!(column(&h, last, "w_3"), "0");
    assert_eq!(run(&["flow", "--start", "1,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["flow", "--start", "0.5,0.5", "--functional", "expectation"]).status.code(), Some(2));
}

#[test]
fn json_output_keeps_column_order() {
    let o = run(&["eval", "--model", "mixture", "--grid", "0:1:2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let keys: Vec<&String> = v[0].as_object().unwrap().keys().collect();
    assert_eq!(keys.first().unwrap().as_str(), "t");
    assert_eq!(v[1]["w_1"], 0.75);
    assert_eq!(v[0]["status"], "ok");
}

#[test]
fn model_files_resolve_through_the_zoo() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("mix.json");
    fs::write(&file, r#"{"model": "mixture", "params": {"p": [1, 0], "q": [0, 1]}}"#).unwrap();
    let o = run(&["eval", "--model", file.to_str().unwrap(), "--ts", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(column(&h, &rows[0], "w_1"), "0.75");

    fs::write(&file, "{not json").unwrap();
    assert_eq!(run(&["eval", "--model", file.to_str().unwrap(), "--ts", "0.25"]).status.code(), Some(3));
}

#[test]
fn tolerance_comes_from_the_environment() {
    let o = bin()
        .args(["eval", "--model", "line", "--ts", "0.001", "--with-score"])
        .env("SIMPLEX_BUNDLE_TOL", "0.01")
        .output()
        .unwrap();
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(column(&h, &rows[0], "determined_mask"), "001");
    assert_eq!(column(&h, &rows[0], "status"), "abs_continuity_violation");

    let bad = bin()
        .args(["eval", "--model", "line", "--ts", "0.1"])
        .env("SIMPLEX_BUNDLE_TOL", "abc")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn algebra_reports_tangent_system_and_relations() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("indep.txt");
    fs::write(&file, "# independence\np11*p22 - p12*p21\n").unwrap();
    let o = run(&["algebra", "-m", file.to_str().unwrap(), "--labels", "11,12,21,22"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("s11 - s12 - s21 + s22 = 0"));
    assert!(text.contains("p11*s11 + p12*s12 + p21*s21 + p22*s22"));

    let line = dir.path().join("line.txt");
    fs::write(&line, "p1 - p2\np3 + 2*p1 - 1\n").unwrap();
    let o = run(&["algebra", "-m", line.to_str().unwrap(), "--dim", "3", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let system: Vec<&str> = v["tangent_system"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap())
        .collect();
    assert!(system.contains(&"p1*s1 - p2*s2"));
    assert!(system.contains(&"2*p1*s1 + p3*s3"));
    assert_eq!(v["score_relations"][0]["relation"], "s1 - s2");

    fs::write(&file, "p11 + q7\n").unwrap();
    assert_eq!(run(&["algebra", "-m", file.to_str().unwrap(), "--dim", "4"]).status.code(), Some(3));
    assert_eq!(run(&["algebra", "-m", file.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_runs_filtered_and_seeded() {
    let o = run(&["verify", "--only", "cramer-rao", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 1);
    assert!(text.contains("cramer-rao"));
    assert_eq!(run(&["verify", "--only", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 10);
}

#[test]
fn failures_map_to_exit_codes() {
    assert_eq!(run(&["eval", "--model", "line", "--grid", "0:1"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--model", "line"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--model", "nope", "--ts", "0.1"]).status.code(), Some(3));
    assert_eq!(
        run(&["eval", "--model", "gibbs", "--params", "[1]", "--ts", "0.1"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["eval", "--model", "line", "--ts", "0.1", "-o", "/nonexistent/dir/out.csv"]).status.code(),
        Some(4)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}
