use std::process::Command;

fn acwr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_acwr"))
}

fn stdout_of(args: &[&str]) -> String {
    let out = acwr().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_log(dir: &std::path::Path, rows: &str) -> String {
    let path = dir.join("log.csv");
    std::fs::write(&path, format!("athlete_id,date,load,planned\n{rows}")).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn compute_zero_prior_weeks_gives_four() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::new();
    let start = chrono::NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    for d in 0..28 {
        let load = if d < 21 { 0.0 } else { 10.0 };
        rows += &format!("z,{},{load},0\n", start + chrono::Duration::days(d));
    }
    let log = write_log(dir.path(), &rows);
    let out = stdout_of(&["compute", "--input", &log]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("athlete_id,date,method,acute,chronic,ratio,converged,zone")
    );
    assert_eq!(
        lines.next(),
        Some("z,2024-01-28,rolling_coupled,70.000000000,17.500000000,4.000000000,true,Danger")
    );
    let uncoupled = stdout_of(&["compute", "--input", &log, "--method", "rolling-uncoupled"]);
    assert!(uncoupled.lines().count() == 1, "needs five weeks of history");
}

#[test]
fn compute_planned_rows_and_undefined_marker() {
    let dir = tempfile::tempdir().unwrap();
    let start = chrono::NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let mut rows = String::new();
    for d in 0..35 {
        let date = start + chrono::Duration::days(d);
        let realized = if d < 28 { 0.0 } else { 5.0 };
        rows += &format!("a,{date},{realized},0\na,{date},8,1\n");
    }
    let log = write_log(dir.path(), &rows);
    let realized = stdout_of(&["compute", "--input", &log, "--method", "rolling-uncoupled"]);
    assert!(realized
        .lines()
        .nth(1)
        .unwrap()
        .contains(",undefined,true,Unclassified"));
    let planned = stdout_of(&["compute", "--input", &log, "--method", "rolling-uncoupled", "--planned"]);
    assert!(planned.lines().nth(1).unwrap().contains(",1.000000000,"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.csv");
    let out = acwr()
        .args(["plan", "--prior", "10,10,10", "--ratio", "1.3", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(
        text,
        "coupling,max_acute_load,achieved_ratio,diagnostic\ncoupled,14.444444444,1.300000000,\n"
    );
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "max_acceptable_ratio = 1.0\n").unwrap();
    let out = stdout_of(&["--config", cfg.to_str().unwrap(), "plan", "--prior", "10,10,10"]);
    assert!(out.contains("coupled,10.000000000"));
    std::fs::write(&cfg, "nonsense = 1\n").unwrap();
    let bad = acwr()
        .args(["--config", cfg.to_str().unwrap(), "plan", "--prior", "1,1,1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("config"));
}

#[test]
fn unknown_subcommand_and_flag() {
    for args in [&["bogus"][..], &["plan", "--nope"][..], &[][..]] {
        let out = acwr().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    }
}

#[test]
fn converge_summary() {
    let out = stdout_of(&["converge", "--summary"]);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "57");
    let acute = stdout_of(&["converge", "--n", "7", "--summary"]);
    assert_eq!(acute.lines().nth(1).unwrap().split(',').nth(3), Some("14"));
}

#[test]
fn figures_emit_tables() {
    let fig2 = stdout_of(&["figures", "fig2"]);
    assert_eq!(fig2.lines().count(), 7);
    assert_eq!(fig2.matches(",50.000000000,35.000000000,1.428571429").count(), 3);
    let fig3 = stdout_of(&["figures", "fig3"]);
    assert_eq!(fig3.lines().count(), 1 + 2 * 29);
    let fig4 = stdout_of(&["figures", "fig4"]);
    assert_eq!(fig4.lines().count(), 1 + 84);
}

#[test]
fn audit_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    let mut text = String::from("exposure,injured,sex\n");
    for (lvl, n) in [("Low", 4), ("Sweet", 6), ("Moderate", 5), ("Danger", 5)] {
        for _ in 0..n {
            text += &format!("{lvl},1,F\n");
        }
        text += &format!("{lvl},0,F\n");
    }
    std::fs::write(&events, text).unwrap();
    let out = stdout_of(&["audit", "sparse", "--events", events.to_str().unwrap()]);
    assert!(out.contains("F,Low,4,5,false"));
    assert!(out.trim_end().ends_with("overall,,20,5,false"));

    let start = chrono::NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let mut rows = String::new();
    for d in 0..28 {
        let load = if d < 21 { 1.0 } else { 20.0 };
        rows += &format!("x,{},{load},0\n", start + chrono::Duration::days(d));
    }
    let log = write_log(dir.path(), &rows);
    let clamped = stdout_of(&["audit", "zones", "--input", &log, "--clamp"]);
    assert!(clamped.contains(",2.000000000,true,Danger"));
}

#[test]
fn simulate_reports_all_strategies() {
    let out = stdout_of(&["simulate", "--athletes", "500", "--weeks", "10"]);
    let names: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        names,
        [
            "raw",
            "subsequent_week",
            "two_week_acute",
            "daily_moving_average",
            "proportional_censoring",
            "planned_proxy",
            "nested_case_control",
            "case_crossover"
        ]
    );
}
