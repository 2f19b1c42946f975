use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gradproj");

const SEGMENT: &str = r#"
mode = "GGP"
seed = 11
log_every = 1
starts = [[4.0, 0.0], [0.0, 4.0]]

[objective]
kind = "least_squares"
m = [[1.0, 1.0]]
y = [2.0]

[set]
kind = "box"
lower = [0.0, 0.0]
upper = [10.0, 10.0]

[regularizer]
kind = "half_squared_norm"

[schedule]
kind = "power_law"
A = 0.5
gamma_exp = 0.0
B = 1.0
alpha_exp = 0.5

[stop]
max_iterations = 20000

[verify]
audit_iterations = 4000
"#;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn gradproj(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn last_row_field(csv: &str, column: &str) -> f64 {
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    csv.lines().last().unwrap().split(',').nth(idx).unwrap().parse().unwrap()
}

#[test]
fn minimal_gp_run_writes_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
mode = "GP"
log_every = 1
starts = [[3.0, -1.0]]
[objective]
kind = "quadratic"
a = [[1.0, 0.0], [0.0, 1.0]]
b = [1.0, 1.0]
[set]
kind = "box"
lower = [0.0, 0.0]
upper = [2.0, 2.0]
[schedule]
kind = "constant"
gamma = 0.5
B = 1.0
alpha_exp = 1.0
[stop]
max_iterations = 100
"#,
    );
    let out = dir.path().join("out");
    let o = gradproj(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("run_1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,gamma,alpha,f_val,phi_val,Phi_n,step_norm,f_gap,dist_to_target,nu_n");
    assert_eq!(lines.len(), 101);
    assert!(lines[100].starts_with("100,"));
}

#[test]
fn segment_problem_two_starts_reach_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SEGMENT);
    let out = dir.path().join("out");
    let o = gradproj(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for i in 1..=2 {
        let csv = fs::read_to_string(out.join(format!("run_{i}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 20001);
        assert!(last_row_field(&csv, "dist_to_target") <= 1e-2);
    }
    assert!(!out.join("run_3.csv").exists());
}

#[test]
fn identical_config_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = SEGMENT.replace("starts = [[4.0, 0.0], [0.0, 4.0]]", "random_starts = 3");
    let cfg = write_config(dir.path(), &text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = gradproj(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--max-iter", "3000"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for i in 1..=3 {
        let name = format!("run_{i}.csv");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    let c = dir.path().join("c");
    gradproj(&["solve", "--config", cfg.to_str().unwrap(), "--out", c.to_str().unwrap(), "--max-iter", "3000", "--seed", "12"]);
    assert_ne!(fs::read(a.join("run_1.csv")).unwrap(), fs::read(c.join("run_1.csv")).unwrap());
}

#[test]
fn negative_radius_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SEGMENT.replace(
        "kind = \"box\"\nlower = [0.0, 0.0]\nupper = [10.0, 10.0]",
        "kind = \"ball\"\ncenter = [0.0, 0.0]\nradius = -1.0",
    );
    let cfg = write_config(dir.path(), &text);
    let o = gradproj(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("set.radius"), "{}", stderr(&o));
}

#[test]
fn bad_invocations_exit_with_config_code() {
    assert_eq!(gradproj(&["solve", "--config", "/nonexistent/config.toml"]).status.code(), Some(1));
    assert_eq!(gradproj(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gradproj(&["lemma5", "--eps", "spiral"]).status.code(), Some(1));
    assert_eq!(gradproj(&["--help"]).status.code(), Some(0));
}

#[test]
fn divergent_run_exits_with_abort_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
mode = "GP"
starts = [[1.0]]
[objective]
kind = "quadratic"
a = [[1.0]]
b = [0.0]
[set]
kind = "whole_space"
dim = 1
[schedule]
kind = "constant"
gamma = 1000.0
B = 1.0
alpha_exp = 1.0
[stop]
max_iterations = 1000
"#,
    );
    let out = dir.path().join("out");
    let o = gradproj(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(out.join("run_1.csv").exists());
}

#[test]
fn classify_tables() {
    let dir = tempfile::tempdir().unwrap();
    let clause = |text: &str, name: &str| -> String {
        text.lines()
            .find(|l| l.starts_with(name))
            .unwrap_or_else(|| panic!("{name} missing in\n{text}"))
            .to_string()
    };

    let cfg = write_config(dir.path(), SEGMENT);
    let o = gradproj(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(clause(&text, "thm2 strong").ends_with("YES"), "{text}");
    assert!(clause(&text, "xu th0").ends_with("NO"), "{text}");

    let cfg = write_config(dir.path(), &SEGMENT.replace("gamma_exp = 0.0", "gamma_exp = 0.4").replace("alpha_exp = 0.5", "alpha_exp = 0.2"));
    let text = stdout(&gradproj(&["classify", "--config", cfg.to_str().unwrap()]));
    assert!(clause(&text, "xu exponent regime").ends_with("YES"), "{text}");
    assert!(clause(&text, "thm2 strong").ends_with("NO"), "{text}");

    let cfg = write_config(dir.path(), &SEGMENT.replace("alpha_exp = 0.5", "alpha_exp = 1.5"));
    let text = stdout(&gradproj(&["classify", "--config", cfg.to_str().unwrap()]));
    assert!(clause(&text, "thm2 weak").ends_with("YES"), "{text}");
}

#[test]
fn verify_writes_text_and_json_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SEGMENT);
    let out = dir.path().join("out");
    let o = gradproj(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 row(s) failed"), "{}", stdout(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["regime"], "selection");
    let rows = json["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["status"] != "FAIL"));
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("audit.fejer"));
}

#[test]
fn weak_regime_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SEGMENT.replace("alpha_exp = 0.5", "alpha_exp = 1.5"));
    let out = dir.path().join("out");
    let o = gradproj(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let rows = json["rows"].as_array().unwrap();
    let with = |check: &str| rows.iter().filter(move |r| r["check"] == check).collect::<Vec<_>>();
    assert!(with("dist_to_target").iter().all(|r| r["status"] == "N/A"));
    assert!(with("dist_to_set").iter().all(|r| r["status"] == "PASS"));
    assert!(with("spread")[0]["value"].as_f64().unwrap() > 0.1);
}

#[test]
fn lemma5_subcommand() {
    let o = gradproj(&["lemma5", "--horizon", "10000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("explicit bound respected: YES"), "{text}");

    let o = gradproj(&["lemma5", "--eps", "power:1:2", "--r", "zero", "--delta", "zero", "--first-index", "2", "--horizon", "1000"]);
    let text = stdout(&o);
    assert!(text.contains("sum eps = inf NO"), "{text}");
}
