use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn opdef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opdef")).args(args).output().expect("run opdef")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write_spec(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn path(name: &str) -> String {
    corpus(name).to_string_lossy().into_owned()
}

#[test]
fn shift_left_is_refuted_with_two_points() {
    let out = opdef(&["classify", "--operator", &path("shift_left.json"), "--output", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], "not_definable");
    assert_eq!(v["result"]["witness"]["kind"], "weyl");
    assert_eq!(v["result"]["witness"]["points"].as_array().unwrap().len(), 2);
}

#[test]
fn identity_is_definable_with_zero_tail() {
    let out = opdef(&["classify", "--operator", &path("identity.json"), "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], "definable");
    assert_eq!(v["result"]["lambda"], serde_json::json!([1.0, 0.0]));
    let ladder = v["result"]["certificate"]["ladder"].as_array().unwrap();
    assert_eq!(ladder.last().unwrap()[1], 0.0);
}

#[test]
fn lr_spectrum_csv_has_small_circle_defects() {
    let out = opdef(&["spectrum", "--operator", &path("lr_directsum.json"), "--grid", "circle:64", "--output", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<[f64; 3]> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            [0, 1, 2].map(|i| r[i].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 66);
    let circle = rows[..64].iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!(circle <= 0.1, "{circle}");
    assert!(rows[64][2] >= 5.0 * circle);
    assert!(rows[65][2] >= 5.0 * circle);
}

#[test]
fn json_reports_are_deterministic() {
    let args = ["report", "--operator", &path("two_plus_reciprocal.json"), "--output", "json", "--n-max", "64", "--cert-tol", "0.05", "--seed", "7"];
    let strip = |out: &Output| {
        let mut v = json(out);
        v.as_object_mut().unwrap().remove("wall_time_ms");
        serde_json::to_string(&v).unwrap()
    };
    let a = opdef(&args);
    let b = opdef(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(json(&a)["seed"], 7);
}

#[test]
fn csv_and_json_agree() {
    let common = ["spectrum", "--operator", &path("half_shift_left.json"), "--grid", "0, 0.5, 1+i; circle:8"];
    let j = json(&opdef(&[&common[..], &["--output", "json"]].concat()));
    let c = opdef(&[&common[..], &["--output", "csv"]].concat());
    let mut rdr = csv::Reader::from_reader(c.stdout.as_slice());
    let rows = j["result"].as_array().unwrap();
    let records: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), records.len());
    for (row, rec) in rows.iter().zip(&records) {
        for i in 0..3 {
            assert_eq!(row[i].as_f64().unwrap(), rec[i].parse::<f64>().unwrap());
        }
    }

    let j = json(&opdef(&["classify", "--operator", &path("two_plus_reciprocal.json"), "--output", "json"]));
    let c = opdef(&["classify", "--operator", &path("two_plus_reciprocal.json"), "--output", "csv"]);
    let mut rdr = csv::Reader::from_reader(c.stdout.as_slice());
    let ladder = j["result"]["certificate"]["ladder"].as_array().unwrap();
    let records: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(ladder.len(), records.len());
    for (row, rec) in ladder.iter().zip(&records) {
        assert_eq!(&rec[0], "definable");
        assert_eq!(rec[1].parse::<f64>().unwrap(), j["result"]["lambda"][0].as_f64().unwrap());
        assert_eq!(rec[4].parse::<u64>().unwrap(), row[0].as_u64().unwrap());
        assert_eq!(rec[5].parse::<f64>().unwrap(), row[1].as_f64().unwrap());
    }
}

#[test]
fn finite_rank_predicate_example() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(&dir, "fr.json", r#"{"field":"real","kind":"finite_rank","pairs":[{"z":[1.0,1.0],"e":[1.0]}]}"#);
    let x = dir.path().join("x.json");
    fs::write(&x, "[0.0, 1.0]").unwrap();
    let out = opdef(&["predicate-eval", "--operator", &spec, "--x", x.to_str().unwrap(), "--y", "[1.0]", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["value"].as_f64().unwrap(), 0.0);
    assert_eq!(v["result"]["oracle"].as_f64().unwrap(), 0.0);
}

#[test]
fn zero_operator_predicate_example() {
    let out = opdef(&["predicate-eval", "--operator", &path("zero.json"), "--x", "[0.5]", "--y", "[1.0]", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["value"].as_f64().unwrap(), 1.0);
}

#[test]
fn reciprocal_predicate_respects_epsilon() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let mut vec = |len: usize| {
            let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            serde_json::to_string(&v.iter().map(|a| a / n * 0.9).collect::<Vec<_>>()).unwrap()
        };
        let (x, y) = (vec(300), vec(300));
        let out = opdef(&[
            "predicate-eval",
            "--operator",
            &path("reciprocal_diagonal.json"),
            "--cert-tol",
            "0.01",
            "--x",
            &x,
            "--y",
            &y,
            "--output",
            "json",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert!(v["result"]["deviation"].as_f64().unwrap() <= 0.01);
    }
}

#[test]
fn sort_violations_are_input_errors() {
    let out = opdef(&["predicate-eval", "--operator", &path("zero.json"), "--x", "[0.5]", "--y", "[3.0]"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_input_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(&dir, "bad.json", "{\"field\":\"real\",\n \"kind\":\"sideways\"}");
    let out = opdef(&["classify", "--operator", &bad]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = opdef(&["classify", "--operator", &dir.path().join("missing.json").to_string_lossy()]);
    assert_eq!(out.status.code(), Some(3));
    let out = opdef(&["classify", "--operator", &path("identity.json"), "--cert-tol", "-1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = opdef(&["classify", "--operator", &path("identity.json"), "--n-max", "8"]);
    assert_eq!(out.status.code(), Some(3));
    let out = opdef(&["spectrum", "--operator", &path("identity.json"), "--grid", "circle:zero"]);
    assert_eq!(out.status.code(), Some(3));
    let out = opdef(&["sideways", "--operator", &path("identity.json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_codes_follow_verdicts_on_the_corpus() {
    let mut seen = 0;
    for entry in fs::read_dir(corpus("")).unwrap() {
        let p = entry.unwrap().path();
        let out = opdef(&["classify", "--operator", p.to_str().unwrap(), "--output", "json", "--n-max", "256"]);
        let expected = match json(&out)["result"]["verdict"].as_str().unwrap() {
            "definable" => 0,
            "not_definable" => 1,
            _ => 2,
        };
        assert_eq!(out.status.code(), Some(expected), "{}", p.display());
        seen += 1;
    }
    assert!(seen >= 20);
}

#[test]
fn index_kernel_and_eigenspace_commands() {
    let v = json(&opdef(&["index", "--operator", &path("lr_directsum.json"), "--n-max", "128", "--output", "json"]));
    assert_eq!(v["result"]["index"], 0);
    assert_eq!(v["result"]["kernel_dim"], 1);

    let v = json(&opdef(&["kernel", "--operator", &path("identity_minus_rank_one.json"), "--n-max", "64", "--output", "json"]));
    assert_eq!(v["result"][0]["dimension"], 1);
    assert!(v["result"][0]["containment"][0].as_f64().unwrap() <= 1e-8);

    let v = json(&opdef(&[
        "eigenspace",
        "--operator",
        &path("three_plus_rank_one.json"),
        "--grid",
        "4, 2",
        "--n-max",
        "64",
        "--output",
        "json",
    ]));
    assert_eq!(v["result"][0]["dimension"], 1);
    assert_eq!(v["result"][1]["mu"], serde_json::json!([2.0, 0.0]));
    assert_eq!(v["result"][1]["dimension"], 0);

    let out = opdef(&["eigenspace", "--operator", &path("three_plus_rank_one.json"), "--grid", "3", "--n-max", "64"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invariant_subspace_command() {
    let out = opdef(&["invariant-subspace", "--operator", &path("volterra_like.json"), "--n-max", "64", "--output", "json"]);
    assert!(matches!(out.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&out.stderr));

    let out = opdef(&["invariant-subspace", "--operator", &path("three_plus_rank_one.json"), "--n-max", "64"]);
    assert_eq!(out.status.code(), Some(3));
    let out = opdef(&[
        "invariant-subspace",
        "--operator",
        &path("three_plus_rank_one.json"),
        "--field",
        "complex",
        "--n-max",
        "64",
        "--output",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["result"]["dimension"].as_u64().unwrap() >= 1);
    assert!(v["result"]["residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn text_output_and_help() {
    let out = opdef(&["classify", "--operator", &path("scaled_identity.json")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("verdict: definable"));
    assert_eq!(opdef(&["--help"]).status.code(), Some(0));
    let out = opdef(&["report", "--operator", &path("identity.json"), "--output", "csv", "--n-max", "32"]);
    assert_eq!(out.status.code(), Some(3));
}
