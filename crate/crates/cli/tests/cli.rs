use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzi-fisher"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Rows of one CSV panel as (header, rows).
fn panel(csv: &str, name: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let marker = format!("# panel:{name}");
    let mut lines = csv.lines().skip_while(|l| *l != marker).skip(1);
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .take_while(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn table1_matches_published_values() {
    let csv = stdout(&["table1"]);
    assert!(csv.starts_with("# mzi-fisher "));
    let (header, rows) = panel(&csv, "table1");
    assert_eq!(header, ["N", "x_opt", "x_FI", "fidelity_at_x_opt", "qfi_over_N2_at_x_FI"]);
    let want = [
        ("6", 2.544, 2.488, 0.924, 0.933),
        ("100", 49.405, 49.103, 0.941, 0.995),
    ];
    for (n, a, b, c, d) in want {
        let row = rows.iter().find(|r| r[0] == n).unwrap();
        for (cell, v) in row[1..].iter().zip([a, b, c, d]) {
            assert!((num(cell) - v).abs() <= 1e-3, "N={n}: {cell} vs {v}");
        }
    }
    assert_eq!(rows.len(), 10);
}

#[test]
fn every_csv_has_comment_and_header() {
    for cmd in [
        vec!["table1", "--n", "5"],
        vec!["fig1", "--n", "6"],
        vec!["fig3", "--n-bar", "2"],
        vec!["qfi", "--n-bar", "3", "--n-res", "12"],
        vec!["cfi", "--n", "3", "--x", "1.0", "--phi", "0.4"],
    ] {
        let csv = stdout(&cmd);
        let mut lines = csv.lines();
        let comment = lines.next().unwrap();
        assert!(comment.starts_with("# mzi-fisher ") && comment.contains("\"params\""), "{cmd:?}");
        assert!(lines.next().unwrap().starts_with("# panel:"));
        assert!(lines.next().unwrap().contains(','));
        assert!(!csv.contains('\r'));
    }
}

#[test]
fn fig3_ratios_bounded_and_close_to_asymptotic() {
    let csv = stdout(&["fig3"]);
    let (header, rows) = panel(&csv, "fig3");
    assert_eq!(header[3..], ["ratio_balanced", "ratio_optimal_split", "asymptotic"]);
    for r in &rows {
        for cell in &r[3..5] {
            let v = num(cell);
            assert!((0.0..=1.0).contains(&v), "{r:?}");
        }
    }
    let row = rows.iter().find(|r| r[0] == "20" && r[1] == "100").unwrap();
    assert!((num(&row[3]) - num(&row[5])).abs() < 0.02);
    assert!((num(&row[5]) - 0.9707).abs() < 1e-4);
}

#[test]
fn crb_is_reproducible_and_efficient() {
    let a = stdout(&["crb", "--shots", "500", "--seed", "3"]);
    let b = stdout(&["crb", "--shots", "500", "--seed", "3"]);
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&["crb"])).unwrap();
    assert_eq!(doc["config"]["command"], "crb");
    assert_eq!(doc["run"]["config"]["seed"], 42);
    let ratio = doc["run"]["variance_ratio"].as_f64().unwrap();
    assert!((0.85..=1.3).contains(&ratio), "{ratio}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["crb", "--n-res", "0", "--shots", "50"]).status.code(), Some(3));
    assert_eq!(run(&["qfi", "--n-bar", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["qfi", "--n-res", "many"]).status.code(), Some(2));
    assert_eq!(run(&["qfi", "--alpha-sq", "1", "--xi", "0.5", "--theta-b", "0.3"]).status.code(), Some(2));
    assert_eq!(run(&["crb", "--repeats", "5"]).status.code(), Some(2));
    assert_eq!(run(&["cfi", "--n", "4096"]).status.code(), Some(4));
    assert_eq!(run(&["table1", "--n", "3"]).status.code(), Some(0));
}

#[test]
fn writes_output_file_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("qfi.json");
    let out = run(&["qfi", "--n-bar", "2", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let total = doc["report"]["total_qfi"].as_f64().unwrap();
    let ideal = doc["report"]["ideal_qfi_closed_form"].as_f64().unwrap();
    assert!((total / ideal - 1.0).abs() < 1e-8);
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}
