use std::process::{Command, Output};

use serde_json::Value;

fn sqfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqfree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = sqfree(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn count_csv_row() {
    let out = stdout(&["count", "--poly", "1,0,1", "--n", "100"]);
    assert_eq!(out, "coefficients,n,count,method,elapsed_ms\n\"1,0,1\",100,88,sieve,\n");
    let direct = stdout(&["count", "--poly", "1,0,1", "--n", "100", "--method", "direct"]);
    assert!(direct.contains(",100,88,direct,"));
}

#[test]
fn density_of_identity() {
    let v = json(&["density", "--poly", "0,1", "--primes", "100000"]);
    assert_eq!(v["schema"], 1);
    let value = v["result"]["value"].as_f64().unwrap();
    assert!((value - 0.607927).abs() < 2e-6, "{value}");
    assert!(v["result"]["tail_bound"].as_f64().unwrap() > 0.0);
    assert!(v["elapsed_ms"].is_null());
}

#[test]
fn average_report_is_pinned_and_thread_independent() {
    let args = ["average", "--k", "2", "--h", "27", "--n", "3", "--mode", "exhaustive"];
    let one = stdout(&[&args[..], &["--threads", "1"]].concat());
    let four = stdout(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one, four);
    let v: Value = serde_json::from_str(&one).unwrap();
    let r = &v["result"];
    assert_eq!(r["count_used"], 134_874);
    assert_eq!(r["mean_error"].as_f64().unwrap(), 0.029783358946712253);
    assert!(r["cancellation_ratio"].as_f64().unwrap() < 0.2);
    assert_eq!(r["out_of_range"], false);
}

#[test]
fn monte_carlo_is_reproducible_and_dumps_rows() {
    let dir = std::env::temp_dir().join(format!("sqfree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dump = dir.join("rows.csv");
    let args = [
        "variance", "--k", "3", "--h", "20", "--n", "2", "--mode", "montecarlo", "--samples", "200",
        "--seed", "11", "--exclude-reducible", "--dump-csv", dump.to_str().unwrap(),
    ];
    let a = stdout(&[&args[..], &["--threads", "1"]].concat());
    let b = stdout(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(a, b);
    let rows = std::fs::read_to_string(&dump).unwrap();
    assert!(rows.starts_with("index,coefficients,status,count,density,error\n"));
    assert_eq!(rows.lines().count(), 201);
    assert!(!rows.contains('\r'));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn squarefull_modes() {
    let row = stdout(&["squarefull", "--poly", "0,1", "--n", "100"]);
    assert!(row.ends_with(",100,14,squarefull,\n"), "{row}");
    let v = json(&["squarefull", "--k", "2", "--h", "32", "--n", "2"]);
    assert_eq!(v["result"]["average"], "3549/11146");
}

#[test]
fn lattice_uksum_mertens_decompose() {
    let v = json(&["lattice", "--m", "4", "--point", "1", "--k", "1", "--h", "1"]);
    assert_eq!(v["result"]["lattice"]["discriminant"], 4);
    assert_eq!(v["result"]["box_count"], "3");
    assert_eq!(v["result"]["minima"]["lambdas"], serde_json::json!([1, 2]));
    let v = json(&["lattice", "--m", "7", "--point", "-3", "--k", "2"]);
    assert_eq!(v["result"]["lattice"]["point"], -3);
    let v = json(&["uksum", "--q", "2", "--h", "1", "--n", "2", "--k", "1"]);
    assert_eq!(v["result"]["sum"], "2");
    let rows = stdout(&["uksum", "--q", "6", "--h", "2", "--n", "3", "--k", "1", "--format", "csv"]);
    assert_eq!(
        rows,
        "kind,q,h,n,k,u,lemma_rhs,ratio,elapsed_ms\nterm,5,2,3,1,4,,,\nterm,6,2,3,1,4,,,\nsum,6,2,3,1,8,58.0,0.13793103448275862,\n"
    );
    assert_eq!(stdout(&["mertens", "--n", "10"]), "limit,modulus,value,elapsed_ms\n10,1,-1,\n");
    let v = json(&["decompose", "--poly", "1,0,1", "--n", "100"]);
    let r = &v["result"];
    let total = r["main"].as_i64().unwrap() + r["t1"].as_i64().unwrap() + r["t2"].as_i64().unwrap();
    assert_eq!(total, 88);
}

#[test]
fn output_file_and_formats() {
    let path = std::env::temp_dir().join(format!("sqfree-out-{}.json", std::process::id()));
    let out = sqfree(&["count", "--poly", "0,1", "--n", "10", "--format", "json", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"][0]["count"], 7);
    std::fs::remove_file(&path).unwrap();
    let csv = stdout(&["density", "--poly", "0,1", "--p", "10", "--format", "csv"]);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("value,truncation,"));
    assert_eq!(lines.count(), 1);
    let timed = json(&["density", "--poly", "0,1", "--p", "10", "--timing"]);
    assert!(timed["elapsed_ms"].as_f64().is_some());
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let cases: &[(&[&str], &str)] = &[
        (&["count", "--poly", "1,0,1", "--n", "0"], "--n"),
        (&["count", "--poly", "1,0,1", "--n", "-4"], "--n"),
        (&["count", "--poly", "1,0,1", "--n", "10", "--b0", "0"], "--b0"),
        (&["count", "--poly", "1,x", "--n", "10"], "--poly"),
        (&["count", "--n", "10"], "--poly"),
        (&["density", "--poly", "0,1", "--p", "-1"], "--p"),
        (&["decompose", "--poly", "0,1", "--n", "5", "--d", "0"], "--d"),
        (&["decompose", "--poly", "0,1", "--n", "5", "--e", "-2"], "--e"),
        (&["lattice", "--m", "0", "--point", "1", "--k", "1"], "--m"),
        (&["lattice", "--m", "5", "--point", "1", "--k", "0"], "--k"),
        (&["uksum", "--q", "0", "--h", "1", "--n", "1", "--k", "1"], "--q"),
        (&["uksum", "--q", "2", "--h", "0", "--n", "1", "--k", "1"], "--h"),
        (&["mertens", "--n", "10", "--m", "0"], "--m"),
        (&["average", "--k", "2", "--h", "27", "--n", "3", "--threads", "0"], "--threads"),
        (&["average", "--k", "2", "--h", "27", "--n", "3", "--samples", "0"], "--samples"),
        (&["average", "--h", "27", "--n", "3"], "--k"),
        (&["average", "--k", "2", "--n", "3"], "--h"),
        (&["average", "--k", "2", "--h", "9", "--n", "1", "--mode", "montecarlo"], "--samples"),
        (&["average", "--k", "2", "--h", "9", "--n", "1", "--seed", "-1"], "--seed"),
    ];
    for (args, flag) in cases {
        let out = sqfree(args);
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {err}");
        assert!(err.contains(flag), "{args:?}: {err}");
    }
}

#[test]
fn runtime_errors_exit_1() {
    for args in [
        &["density", "--poly", "0,0,1"][..],
        &["count", "--poly", "-5,1", "--n", "10"][..],
        &["average", "--k", "2", "--h", "5", "--n", "3"][..],
        &["average", "--k", "4", "--h", "5", "--n", "1", "--exclude-reducible"][..],
    ] {
        let out = sqfree(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
    let out = sqfree(&["count", "--poly", "-5,1", "--n", "10"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n = 5"));
}
