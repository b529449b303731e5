use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qqbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qqbf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(o));
    serde_json::from_str(&stdout(o)).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn re_im(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const LINEAR_HALF: &str = r#"{"data_inputs": 1,
  "registers": ["1", "1"],
  "nodes": [{"op": "sum", "branch": "S", "in": [{"data": 0}, {"reg": 0}]},
            {"op": "product", "branch": "plus", "in": [{"node": 0}, {"reg": 1}]}],
  "output": 1}"#;

const SIX_INPUTS: &str = "1\n0\n-0.27-0.74i\n-0.27+0.74i\n-i\ninf\n";

#[test]
fn block_examples() {
    let v = json(&qqbf(&[
        "block", "--op", "product", "--branch", "plus", "--z1", "0", "--z2", "0",
    ]));
    assert!((v["success_prob"].as_f64().unwrap() - 0.5).abs() < 1e-15);

    let o = qqbf(&[
        "block", "--op", "sum", "--branch", "I", "--z1", "0", "--z2", "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("indefinite"));
    assert!(stderr(&o).contains("of 0 and 0"));

    let v = json(&qqbf(&["block", "--op", "invert", "--z1", "2"]));
    assert_eq!(re_im(&v["ideal"]), (0.5, 0.0));
    assert_eq!(v["success_prob"].as_f64(), Some(1.0));
}

#[test]
fn block_engines_agree() {
    let args = [
        "block",
        "--op",
        "sum",
        "--branch",
        "S",
        "--z1",
        "1+i",
        "--z2",
        "-0.3",
        "--visibility",
        "0.7",
    ];
    let closed = json(&qqbf(&args));
    let mut oracle_args = args.to_vec();
    oracle_args.extend(["--engine", "oracle"]);
    let oracle = json(&qqbf(&oracle_args));
    let (p, q) = (
        closed["success_prob"].as_f64().unwrap(),
        oracle["success_prob"].as_f64().unwrap(),
    );
    assert!((p - q).abs() < 1e-12);
    for i in 0..2 {
        for j in 0..2 {
            let (a, b) = (
                re_im(&closed["matrix"][i][j]),
                re_im(&oracle["matrix"][i][j]),
            );
            assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        }
    }
}

#[test]
fn block_tomography_fields() {
    let v = json(&qqbf(&[
        "block", "--op", "product", "--z1", "1", "--z2", "i", "--shots", "2000", "--seed", "9",
    ]));
    assert_eq!(v["counts"]["shots"].as_u64(), Some(2000));
    let [p, m] = [0, 1].map(|k| v["counts"]["X"][k].as_u64().unwrap());
    assert_eq!(p + m, 2000);
    assert!(v["fidelity"].as_f64().unwrap() > 0.99);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["block", "--op", "product", "--z1", "1+", "--z2", "0"][..],
        &["block", "--op", "product", "--z1", "1"],
        &["block", "--op", "invert", "--z1", "1", "--branch", "plus"],
        &["block", "--op", "divide", "--z1", "1"],
        &[
            "block",
            "--op",
            "invert",
            "--z1",
            "1",
            "--visibility",
            "1.5",
        ],
        &["sample", "0"],
        &["compile", "--num", "", "--den", "1"],
        &["compile", "--num", "1", "--den", "0,0"],
        &[
            "experiment",
            "/nonexistent/circuit.json",
            "/nonexistent/inputs.txt",
        ],
    ] {
        let o = qqbf(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn table_rows_and_check() {
    let o = qqbf(&["table-s1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 30);
    let find = |z: [&str; 3]| rows.iter().find(|r| r.iter().take(3).eq(z)).unwrap();
    let probs = |r: &csv::StringRecord| -> Vec<f64> { (3..7).map(|k| f(&r[k])).collect() };
    let close =
        |got: Vec<f64>, want: [f64; 4]| got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 5e-4);
    assert!(close(probs(find(["1", "1", "1"])), [0.031; 4]));
    assert!(close(
        probs(find(["-1i", "0", "-1i"])),
        [0.039, 0.008, 0.039, 0.008]
    ));
    assert!(close(
        probs(find(["inf", "inf", "inf"])),
        [0.0, 0.125, 0.0, 0.125]
    ));

    // Seven rows of the printed campaign do not round to the listed inputs;
    // check mode reports them and exits 4.
    let o = qqbf(&["table-s1", "--check"]);
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    for row in [
        "row 16 ", "row 17 ", "row 19 ", "row 21 ", "row 24 ", "row 27 ", "row 29 ",
    ] {
        assert!(err.contains(row), "{row} missing from {err}");
    }
    assert!(!err.contains("row 1 ") && !err.contains("row 12 "));
}

#[test]
fn compile_examples() {
    let v = json(&qqbf(&["compile", "--num", "0,1", "--den", "1"]));
    assert!(v["op_count"].as_u64().unwrap() <= 4);
    assert_eq!(v["within_bound"], Value::Bool(true));

    let v = json(&qqbf(&[
        "compile", "--num", "-1,0,1", "--den", "1", "--probe", "2",
    ]));
    let (re, im) = re_im(&v["probes"][0]["value"]);
    assert!((re - 3.0).abs() < 1e-9 && im.abs() < 1e-9);
    assert!(v["probes"][0]["success_prob"].as_f64().unwrap() > 0.0);

    let v = json(&qqbf(&[
        "compile", "--num", "1,1", "--den", "1,-1", "--probe", "1",
    ]));
    let value = &v["probes"][0]["value"];
    assert!(value == "inf" || value == "indefinite", "{value}");

    let v = json(&qqbf(&[
        "compile",
        "--function",
        r#"{"c0": 2, "zeros": ["i"], "poles": ["-1"]}"#,
        "--probe",
        "0",
    ]));
    let (re, im) = re_im(&v["probes"][0]["value"]);
    assert!((re - 0.0).abs() < 1e-9 && (im + 2.0).abs() < 1e-9);
}

#[test]
fn experiment_exact_engine_is_ideal() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.json", LINEAR_HALF);
    let i = write(dir.path(), "in.txt", SIX_INPUTS);
    let o = qqbf(&["experiment", &c, &i]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(&r[3], "ok");
        assert!((f(&r[11]) - 1.0).abs() < 1e-12, "{r:?}");
    }
    assert_eq!(&rows[5][5], "inf");
}

#[test]
fn experiment_oracle_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.json", LINEAR_HALF);
    let i = write(dir.path(), "in.txt", SIX_INPUTS);
    let run = |engine: &str| {
        let o = qqbf(&[
            "experiment",
            &c,
            &i,
            "--visibility",
            "0.84",
            "--engine",
            engine,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        csv_rows(&stdout(&o))
    };
    let (closed, oracle) = (run("closed-form"), run("oracle"));
    for (a, b) in closed.iter().zip(&oracle) {
        for k in 4..10 {
            if k == 5 {
                assert_eq!(&a[k], &b[k]);
            } else {
                assert!(
                    (f(&a[k]) - f(&b[k])).abs() < 1e-9,
                    "column {k}: {a:?} vs {b:?}"
                );
            }
        }
    }
}

#[test]
fn experiment_zero_probability_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mp = r#"{"data_inputs": 3,
      "nodes": [{"op": "harmonic", "in": [{"data": 0}, {"data": 1}]},
                {"op": "product", "in": [{"node": 0}, {"data": 2}]}],
      "output": 1}"#;
    let c = write(dir.path(), "mp.json", mp);
    let i = write(
        dir.path(),
        "in.json",
        r#"[[0, 0, 0], [1, 1], "nope", [1, 1, 1]]"#,
    );
    let o = qqbf(&["experiment", &c, &i]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    assert_eq!(
        (&rows[0][3], &rows[0][4], &rows[0][10]),
        ("indefinite", "0", "")
    );
    assert_eq!(&rows[1][3], "error");
    assert!(rows[1][12].contains("expected 3 data inputs"));
    assert_eq!(&rows[2][3], "error");
    assert_eq!(&rows[3][3], "ok");

    let o = qqbf(&["experiment", &c, &i, "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["status"], "indefinite");
    assert!(v[0].get("fidelity_ideal").is_none());
}

#[test]
fn experiment_preserves_order_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.json", LINEAR_HALF);
    let samples = qqbf(&["sample", "200", "--seed", "4"]);
    let i = write(dir.path(), "in.ndjson", &stdout(&samples));
    let args = [
        "experiment",
        c.as_str(),
        i.as_str(),
        "--shots",
        "100",
        "--seed",
        "8",
        "--visibility",
        "0.9",
    ];
    let first = qqbf(&args);
    let second = qqbf(&args);
    assert_eq!(first.stdout, second.stdout);
    let rows = csv_rows(&stdout(&first));
    assert_eq!(rows.len(), 200);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(f(&r[0]) as usize, k);
        assert_eq!(&r[3], "ok");
    }
}

#[test]
fn compiled_circuits_run_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let report = qqbf(&["compile", "--num", "-1,0,1", "--den", "2,1"]);
    assert_eq!(report.status.code(), Some(0));
    let c = write(dir.path(), "report.json", &stdout(&report));
    let inner: Value = serde_json::from_str(&stdout(&report)).unwrap();
    let c_only = write(dir.path(), "circuit.json", &inner["circuit"].to_string());
    let i = write(dir.path(), "in.txt", "2\n0.5i\n");
    for path in [&c, &c_only] {
        let o = qqbf(&["experiment", path, &i, "--format", "json"]);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        let (re, im) = re_im(&v[0]["ideal"]);
        assert!((re - 0.75).abs() < 1e-9 && im.abs() < 1e-9, "{v}");
        assert_eq!(v[1]["status"], "ok");
    }
}

#[test]
fn sample_is_deterministic() {
    let a = qqbf(&["sample", "1", "--seed", "17"]);
    let b = qqbf(&["sample", "1", "--seed", "17"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let line: Value = serde_json::from_str(stdout(&a).trim()).unwrap();
    assert!(line["a"]["re"].is_f64() && line["b"]["im"].is_f64());
    let c = qqbf(&["sample", "1", "--seed", "18"]);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(stdout(&qqbf(&["sample", "5"])).lines().count(), 5);
}

#[test]
fn chain_command() {
    let v = json(&qqbf(&[
        "chain", "--z1", "inf", "--z2", "inf", "--z3", "inf",
    ]));
    let probs: Vec<f64> = (0..4)
        .map(|k| v["results"][k]["success_prob"].as_f64().unwrap())
        .collect();
    assert!((probs[1] - 0.125).abs() < 1e-12 && probs[0] == 0.0);
    assert!(v["results"][0]["indefinite"].is_string());

    let o = qqbf(&[
        "chain", "--combo", "SP", "--z1", "inf", "--z2", "inf", "--z3", "inf",
    ]);
    assert_eq!(o.status.code(), Some(3));

    let args = [
        "chain",
        "--combo",
        "MA",
        "--z1",
        "1",
        "--z2",
        "-i",
        "--z3",
        "2",
        "--visibility",
        "0.8",
    ];
    let closed = json(&qqbf(&args));
    let mut oracle_args = args.to_vec();
    oracle_args.extend(["--engine", "oracle"]);
    let oracle = json(&qqbf(&oracle_args));
    let p = |v: &Value| v["results"][0]["success_prob"].as_f64().unwrap();
    assert!((p(&closed) - p(&oracle)).abs() < 1e-12);
}
