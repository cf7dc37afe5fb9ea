use std::process::{Command, Output};

fn setpart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setpart"))
        .args(args)
        .env_remove("SETPART_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn parse_partition(line: &str) -> Vec<Vec<u32>> {
    line.split('|')
        .map(|b| b.split(' ').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sample_prints_partitions_then_counters() {
    let o = setpart(&[
        "sample",
        "--n",
        "6",
        "--k",
        "3",
        "--samples",
        "3",
        "--seed",
        "7",
        "--method",
        "hybrid",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for l in &lines[..3] {
        let blocks = parse_partition(l);
        assert_eq!(blocks.len(), 3);
        let mut all: Vec<u32> = blocks.concat();
        all.sort();
        assert_eq!(all, (1..=6).collect::<Vec<_>>());
        for b in &blocks {
            assert!(b.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(blocks.windows(2).all(|w| w[0][0] < w[1][0]));
    }
    assert!(lines[3].starts_with("counters "));
    assert!(lines[3].contains("random_bits="));
}

#[test]
fn every_method_samples() {
    for (method, n, k) in [
        ("hybrid", "40", "12"),
        ("exact", "40", "12"),
        ("boltzmann", "40", "12"),
        ("easy-coloring", "30", "3"),
        ("easy-forest", "40", "36"),
    ] {
        let o = setpart(&[
            "sample",
            "--n",
            n,
            "--k",
            k,
            "--samples",
            "2",
            "--method",
            method,
        ]);
        assert!(o.status.success(), "{method}: {:?}", o);
        assert_eq!(stdout(&o).lines().count(), 3, "{method}");
    }
}

#[test]
fn out_of_regime_easy_method_is_an_error() {
    let o = setpart(&[
        "sample",
        "--n",
        "40",
        "--k",
        "20",
        "--method",
        "easy-forest",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_records() {
    let o = setpart(&[
        "--format",
        "json",
        "sample",
        "--n",
        "10",
        "--k",
        "4",
        "--samples",
        "2",
        "--seed",
        "3",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let recs: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[0]["n"], 10);
    assert_eq!(recs[0]["k"], 4);
    assert_eq!(recs[0]["seed"], 3);
    assert_eq!(recs[0]["blocks"].as_array().unwrap().len(), 4);
    assert!(recs[2]["counters"]["random_bits"].as_u64().unwrap() > 0);
}

#[test]
fn identical_flags_give_identical_bytes() {
    let args = [
        "sample",
        "--n",
        "300",
        "--k",
        "120",
        "--samples",
        "2",
        "--seed",
        "5",
    ];
    let a = setpart(&args);
    let b = setpart(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = setpart(&[
        "sample",
        "--n",
        "300",
        "--k",
        "120",
        "--samples",
        "2",
        "--seed",
        "6",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_from_environment() {
    let env = Command::new(env!("CARGO_BIN_EXE_setpart"))
        .args(["sample", "--n", "12", "--k", "5", "--samples", "4"])
        .env("SETPART_SEED", "99")
        .output()
        .unwrap();
    let flag = setpart(&[
        "sample",
        "--n",
        "12",
        "--k",
        "5",
        "--samples",
        "4",
        "--seed",
        "99",
    ]);
    assert_eq!(env.stdout, flag.stdout);
}

#[test]
fn walk_paths() {
    let o = setpart(&["walk", "--n", "3", "--m", "2", "--samples", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 21);
    for l in &lines[..20] {
        assert_eq!(l.matches('E').count(), 3);
        assert_eq!(l.matches('N').count(), 2);
    }
}

#[test]
fn verify_bounds_sweep_passes() {
    let o = setpart(&["verify-bounds", "--n-max", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains(" 0 violations"));
}

#[test]
fn chi2_reports_a_verdict() {
    let o = setpart(&[
        "chi2",
        "--n",
        "6",
        "--k",
        "3",
        "--samples",
        "9000",
        "--method",
        "exact",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("dof=89"));
    assert!(text.contains("result=pass"));
    let few = setpart(&["chi2", "--n", "12", "--k", "5", "--samples", "100"]);
    assert_eq!(few.status.code(), Some(1));
}

#[test]
fn bench_csv_columns() {
    let o = setpart(&[
        "bench",
        "--sizes",
        "200",
        "--methods",
        "hybrid,boltzmann,exact",
        "--runs",
        "2",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,method,wall_seconds,random_bits,digit_queries,escalations,fallbacks"
    );
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("200,hybrid,"));
    assert!(lines[6].starts_with("200,exact,"));
}

#[test]
fn dump_tables_contains_b7() {
    let o = setpart(&["dump-tables"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l
        == "b_7 = -132 a_2^5 + 240 a_2^3 a_3 - 72 a_2 a_3^2 - 72 a_2^2 a_4 + 16 a_3 a_4 \
            + 16 a_2 a_5 - 2 a_6"));
    assert!(text.contains("2^3 a_3 = 5 b_3^2 - 4 b_4"));
    assert!(text.contains("T_2 = 1 4 1"));
    assert!(text.contains("B_2 = 1/6"));
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("setpart-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.txt");
    let o = setpart(&[
        "sample",
        "--n",
        "5",
        "--k",
        "2",
        "--samples",
        "4",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["sample", "--n", "6"],
        vec!["frobnicate"],
        vec!["sample", "--n", "6", "--k", "3", "--method", "magic"],
        vec!["sample", "--n", "3", "--k", "5"],
    ] {
        let o = setpart(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(setpart(&["--help"]).status.code(), Some(0));
}
