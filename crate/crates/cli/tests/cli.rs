use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rrp3ss_cli::render::{CheckReport, OracleReport, SolveReport, TriceptReport};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrp3ss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rrp3ss-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

/// Numbers inside the parentheses of a line of table output, with `∓` read
/// as a minus sign.
fn numbers(line: &str) -> Vec<f64> {
    let start = line.find('(').unwrap_or(line.len());
    let cleaned: String = line[start..]
        .chars()
        .map(|c| match c {
            '(' | ')' | ',' | '°' | '\t' => ' ',
            '∓' => '-',
            '±' => '+',
            c => c,
        })
        .collect();
    let mut out = Vec::new();
    let mut sign = 1.0;
    for token in cleaned.split_whitespace() {
        match token {
            "-" => sign = -1.0,
            "+" => sign = 1.0,
            t => {
                if let Ok(v) = t.parse::<f64>() {
                    out.push(sign * v);
                }
                sign = 1.0;
            }
        }
    }
    out
}

/// The line whose first tab-separated field equals `label`.
fn labelled<'a>(text: &'a str, label: &str) -> &'a str {
    text.lines()
        .find(|l| l.split('\t').next() == Some(label))
        .unwrap_or_else(|| panic!("no line labelled {label}"))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

/// Compares two outputs token by token; numbers within `tol`, everything
/// else exactly.
fn same_up_to_rounding(actual: &str, expected: &str, tol: f64) -> bool {
    let a: Vec<&str> = actual.split_whitespace().collect();
    let e: Vec<&str> = expected.split_whitespace().collect();
    a.len() == e.len()
        && a.iter().zip(&e).all(|(x, y)| {
            let strip = |s: &str| s.trim_matches(|c| "(),°".contains(c)).to_string();
            match (strip(x).parse::<f64>(), strip(y).parse::<f64>()) {
                (Ok(u), Ok(v)) => close(u, v, tol),
                _ => x == y,
            }
        })
}

#[test]
fn solve_prints_the_reference_roots() {
    let out = run(&["solve", fixture("example1.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("Roots of the resultant polynomial (28)\n"));
    let root5 = numbers(labelled(&text, "5"));
    assert!(close(root5[0], 0.4336937265758375, 1e-12));
    assert_eq!(root5[1], 0.0);
    assert!(text.contains("Real assembly configurations (8)"));
}

#[test]
fn real_only_omits_complex_roots() {
    let out = run(&["solve", fixture("example1.toml").to_str().unwrap(), "--real-only"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("Roots of the resultant polynomial (8)\n"));
    assert!(!text.contains('±'));
}

#[test]
fn json_agrees_with_table() {
    let path = fixture("example1.toml");
    let table = stdout(&run(&["solve", path.to_str().unwrap()]));
    let json = stdout(&run(&["solve", path.to_str().unwrap(), "--format", "json"]));
    let report: SolveReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report.roots.len(), 28);
    assert_eq!(report.configurations.len(), 8);

    let tol = 1e-15;
    for (k, z) in report.roots.iter().enumerate().filter(|(_, z)| z.im == 0.0) {
        let v = numbers(labelled(&table, &(k + 1).to_string()));
        assert!(close(v[0], z.re, tol) && v[1] == 0.0);
    }
    let config_section = table.split("Real assembly configurations").nth(1).unwrap();
    for (k, c) in report.configurations.iter().enumerate() {
        let pose = numbers(labelled(config_section, &(k + 1).to_string()));
        assert!(close(pose[0], c.sigma, tol));
        assert!(close(pose[1], c.theta1_deg, tol));
        assert!(close(pose[2], c.theta2_deg, tol));
        let block: Vec<&str> = config_section
            .lines()
            .skip_while(|l| l.split('\t').next() != Some(&(k + 1).to_string()))
            .skip(1)
            .take(3)
            .collect();
        for (i, line) in block.iter().enumerate() {
            let v = numbers(line);
            for d in 0..3 {
                assert!(close(v[d], c.platform_points[i][d], tol), "{line}");
            }
        }
    }
}

#[test]
fn csv_has_one_row_per_value() {
    let out = run(&["solve", fixture("example1.toml").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.iter().filter(|r| &r[0] == "root").count(), 28);
    let configs: Vec<_> = records.iter().filter(|r| &r[0] == "configuration").collect();
    assert_eq!(configs.len(), 8);
    let sigma: f64 = configs[0][4].parse().unwrap();
    assert!(close(sigma, -5.0742351861635417, 1e-12));
}

#[test]
fn output_is_deterministic() {
    let path = fixture("example1.toml");
    let a = run(&["solve", path.to_str().unwrap()]);
    let b = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn golden_outputs() {
    let cases = [
        (vec!["solve", "example1.toml"], "example1.solve.txt"),
        (vec!["tricept", "example2.toml"], "example2.tricept.txt"),
    ];
    for (args, golden) in cases {
        let input = fixture(args[1]);
        let out = run(&[args[0], input.to_str().unwrap()]);
        let expected = std::fs::read_to_string(fixture(golden)).unwrap();
        assert!(same_up_to_rounding(&stdout(&out), &expected, 1e-12), "{golden} differs");
    }
    let json = std::fs::read_to_string(fixture("example1.solve.json")).unwrap();
    let golden: SolveReport = serde_json::from_str(&json).unwrap();
    let fresh: SolveReport =
        serde_json::from_str(&stdout(&run(&["solve", fixture("example1.toml").to_str().unwrap(), "--format", "json"])))
            .unwrap();
    assert_eq!(golden.roots.len(), fresh.roots.len());
    for (g, f) in golden.roots.iter().zip(&fresh.roots) {
        assert!(close(f.re, g.re, 1e-12) && close(f.im, g.im, 1e-12));
    }
}

#[test]
fn tricept_prints_sigma_squared_and_mirror_rows() {
    let out = run(&["tricept", fixture("example2.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("Values of σ² (14)\n"));
    let v8 = numbers(labelled(&text, "8"));
    assert!(close(v8[0], 15.5595408347198758, 1e-12));
    assert_eq!(v8[1], 0.0);
    assert!(text.contains("Real assembly configurations (12)"));
    for label in ["1-2", "3-4", "5-6", "7-8", "9-10", "11-12"] {
        let section = text.split("Real assembly configurations").nth(1).unwrap();
        assert!(labelled(section, label).contains("(± "));
    }
    let first = numbers(labelled(text.split("Real assembly configurations").nth(1).unwrap(), "1-2"));
    assert!(close(first[0], 0.6880358182051869, 1e-12));
    assert!(close(first[1], -156.7136782148684357, 1e-12));
}

#[test]
fn tricept_json_lists_every_configuration() {
    let out = run(&["tricept", fixture("example2.toml").to_str().unwrap(), "--format", "json"]);
    let report: TriceptReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.sigma_squared.len(), 14);
    assert_eq!(report.configurations.len(), 12);
    assert_eq!(report.mirror_pairs.len(), 6);
    for &(a, b) in &report.mirror_pairs {
        let (u, l) = (&report.configurations[a], &report.configurations[b]);
        assert!(u.sigma > 0.0 && close(l.sigma, -u.sigma, 1e-12));
    }
}

#[test]
fn empty_tricept_instance_has_no_rows() {
    let path = temp_file("empty.toml", "[tricept2]\nr_base = 4\nr_platform = 3\nL = [0.1, 0.1, 0.1]\n");
    let out = run(&["tricept", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("Real assembly configurations (0)\n"));
}

#[test]
fn type_one_is_not_supported() {
    for cmd in ["tricept", "solve"] {
        let out = run(&[cmd, fixture("tricept1.toml").to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(3));
    }
}

#[test]
fn tricept_needs_a_tricept_block() {
    let out = run(&["tricept", fixture("example1.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn singular_geometry_exits_two() {
    let zeros = "[[0, 0, 0], [0, 0, 0], [0, 0, 0]]";
    let path = temp_file(
        "singular.toml",
        &format!("alpha_deg = 0\nbeta_deg = 0\nzeta = 0\nA = {zeros}\nB = {zeros}\nL = [1, 1, 1]\n"),
    );
    let out = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(run(&["solve", "/nonexistent/geometry.toml"]).status.code(), Some(1));
    let bad = temp_file("bad.toml", "alpha_deg = [\n");
    assert_eq!(run(&["solve", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn check_accepts_a_table_pose() {
    let out = run(&[
        "check",
        fixture("example1.toml").to_str().unwrap(),
        "--theta1",
        "-42.5300309414956836",
        "--theta2",
        "-45.9066707230024256",
        "--sigma",
        "2.8533551381339947",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("pass"));
}

#[test]
fn check_rejects_a_perturbed_pose() {
    let out = run(&[
        "check",
        fixture("example1.toml").to_str().unwrap(),
        "--theta1",
        "-42.5300309414956836",
        "--theta2",
        "-45.9066707230024256",
        "--sigma",
        "2.9533551381339947",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let report: CheckReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!report.pass);
}

#[test]
fn oracle_poses_pass_the_check() {
    let path = fixture("example1.toml");
    let out = run(&["oracle", path.to_str().unwrap(), "--seed-grid", "12x12x9", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: OracleReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!report.configurations.is_empty());
    for c in &report.configurations {
        let check = run(&[
            "check",
            path.to_str().unwrap(),
            "--theta1",
            &format!("{}", c.theta1_deg),
            "--theta2",
            &format!("{}", c.theta2_deg),
            "--sigma",
            &format!("{}", c.sigma),
        ]);
        assert_eq!(check.status.code(), Some(0));
    }
}

#[test]
fn oracle_rejects_a_malformed_grid() {
    let out = run(&["oracle", fixture("example1.toml").to_str().unwrap(), "--seed-grid", "12x12"]);
    assert_eq!(out.status.code(), Some(1));
}
