use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sbgame(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbgame"))
        .args(args)
        .env("SBG_OUTPUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_fixture_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbgame(&["validate", "example9"], dir.path());
    assert_eq!(o.status.code(), Some(0));

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"agents":1,"actions":[2],"states":1,"payoffs":[[[0],[1]]],"kernels":[[[0.5]],[[1]]]}"#,
    )
    .unwrap();
    let o = sbgame(&["validate", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("row sum"));

    let garbled = dir.path().join("garbled.json");
    fs::write(&garbled, "{\"agents\": \"two\"}").unwrap();
    let o = sbgame(&["validate", garbled.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("agents"));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sbgame(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(sbgame(&["simulate", "example9", "--steps", "5"], dir.path()).status.code(), Some(1));
    assert_eq!(sbgame(&["validate", "no-such-fixture"], dir.path()).status.code(), Some(1));
    let o = sbgame(
        &["simulate", "example9", "--seed", "1", "--steps", "5", "--init", "9"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(sbgame(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn analyze_writes_into_env_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbgame(&["analyze", "example12", "--example12-p", "0.9"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("trap set: {3,4}"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("analysis.json")).unwrap()).unwrap();
    assert_eq!(json["trap_set"], serde_json::json!([3, 4]));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "example9-lazy", "--seed", "5", "--steps", "300", "--epsilon-i", "2=0.3",
    ];
    let a = sbgame(&args, dir.path());
    let b = sbgame(&args, dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("t,x,a_digits,locked\n"));
    assert_eq!(text.lines().count(), 301);
}

#[test]
fn montecarlo_with_oracle_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc");
    let o = sbgame(
        &[
            "montecarlo", "example9", "--runs", "50", "--steps", "300", "--seed", "1", "--init", "sweep",
            "--oracle", "--out-dir", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["comparison"]["exact_quantity"], "lockin_probability_by_horizon");
}

#[test]
fn oracle_reports_zero_from_state_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbgame(
        &["oracle", "example9", "--init", "4", "--validate", "seeds=2,steps=2000"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("absorption probability: 0\n"), "{text}");
    assert!(text.contains("forbidden transitions 0"));

    let o = sbgame(&["oracle", "example9", "--budget", "10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn potential_synthesis_and_verification() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbgame(&["potential", "example4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("four_cycle"));

    // A single-agent game with a non-decreasing kernel has a potential.
    let game = dir.path().join("g.json");
    fs::write(
        &game,
        r#"{"agents":1,"actions":[2],"states":2,
            "payoffs":[[[0],[1]],[[2],[3]]],
            "kernels":[[[0.5,0.5],[0,1]],[[1,0],[0,1]]]}"#,
    )
    .unwrap();
    let g = game.to_str().unwrap();
    let o = sbgame(&["potential", g], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let phi = dir.path().join("phi.json");
    assert!(phi.exists());
    let o = sbgame(&["potential", g, "--phi", phi.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));

    fs::write(&phi, r#"{"actions":[2],"states":2,"phi":[[0,5],[2,3]]}"#).unwrap();
    let o = sbgame(&["potential", g, "--phi", phi.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selfcheck_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbgame(&["selfcheck"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 10);
}
