use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_miso-capacity")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bounds_csv_is_sorted_and_comma_clean() {
    let o = run(&["bounds", "--amin-db", "0", "--amax-db", "10", "--step-db", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("amp_db,amplitude,bound,value_nats,witness"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3 * 4);
    assert!(rows.iter().all(|r| r.len() == 5));
    let keys: Vec<(f64, &str)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[2])).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipping lower-uniform"));
}

#[test]
fn json_rows_parse() {
    let o = run(&["bounds", "--amin-db", "20", "--amax-db", "20", "--format", "json", "--bounds", "upper-duality"]);
    let row: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(row["bound"], "upper-duality");
    assert!((row["value_nats"].as_f64().unwrap() - 4.7147).abs() < 1e-4);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bounds", "--alpha", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--gains", "3,-1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(run(&["gap", "--alphas", "0.5:0.5:4"]).status.code(), Some(2));
    let tampered = run(&["verify", "--amin-db", "0", "--amax-db", "0", "--tamper", "lower-epi:1"]);
    assert_eq!(tampered.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&tampered.stderr).contains("lower-epi exceeds mutual-information"));
}

#[test]
fn siso_table_replaces_builtin_provider() {
    let path = std::env::temp_dir().join(format!("siso-table-{}.txt", std::process::id()));
    std::fs::write(&path, "# peak/sigma, capacity\n0, 0\n100, 10\n").unwrap();
    let o = run(&[
        "bounds",
        "--amin-db",
        "0",
        "--amax-db",
        "0",
        "--bounds",
        "upper-siso",
        "--siso-table",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let value: f64 = stdout(&o).lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    // s_nt A / sigma = 6.5 on the linear table.
    assert!((value - 0.65).abs() < 1e-9);
    let far = run(&[
        "bounds",
        "--amin-db",
        "20",
        "--amax-db",
        "20",
        "--bounds",
        "upper-siso",
        "--siso-table",
        path.to_str().unwrap(),
    ]);
    assert_eq!(far.status.code(), Some(2));
    std::fs::remove_file(path).ok();
}

#[test]
fn gap_and_slope_tables() {
    let gap = stdout(&run(&["gap", "--alphas", "0.6,1.3", "--positive"]));
    assert!(gap.contains("0.6,0.375887,"));
    assert!(gap.contains("1.3,0,,"));
    let slope = stdout(&run(&["slope", "--gains", "3,1", "--alphas", "0.5"]));
    assert_eq!(slope.lines().nth(1), Some("0.5,3,1.5"));
    let v = stdout(&run(&["vmax", "--gains", "3,2.2,0.1", "--alpha", "0.9"]));
    assert!(v.starts_with("# gamma = 6.692"));
}
