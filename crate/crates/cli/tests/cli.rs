use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use theta_hyper::identities::{sample_ft, sample_nome, verify_ft_sum, DEFAULT_BAND};
use theta_hyper::sampling::Sampler;
use theta_hyper::series::{eval_basic, BasicKind, BasicSeries};
use theta_hyper::C64;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("theta-hyper-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_theta-hyper"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) {
    std::fs::write(dir.join(name), v.to_string()).unwrap();
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn complex(v: &Value) -> C64 {
    C64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn eval_terminating_at_zero() {
    let dir = scratch("eval0");
    let input = json!({
        "kind": "unilateral_E",
        "numerator": [[1.0, 0.0], [0.3, 0.1]],
        "denominator": [[0.5, 0.5]],
        "z": [1.0, 0.0],
        "q": [0.4, 0.1],
        "p": [0.1, 0.0],
        "truncation": {"index": 0, "N": 0, "M": 0}
    });
    write(&dir, "in.json", &input);
    let o = run(&dir, &["eval", "in.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["value"], json!([1.0, 0.0]));
    assert_eq!(v["terms_used"], json!(1));
    assert_eq!(v["terminated"], json!(true));
}

#[test]
fn eval_at_zero_nome_is_basic() {
    let dir = scratch("basic");
    let (t, w, z, q) = (
        [C64::new(0.3, 0.1), C64::new(-0.2, 0.4)],
        [C64::new(0.5, -0.1)],
        C64::new(0.4, 0.2),
        C64::new(0.5, 0.1),
    );
    let pair = |c: C64| json!([c.re, c.im]);
    let input = json!({
        "kind": "unilateral_E",
        "numerator": t.iter().map(|&c| pair(c)).collect::<Vec<_>>(),
        "denominator": w.iter().map(|&c| pair(c)).collect::<Vec<_>>(),
        "z": pair(z),
        "q": pair(q),
        "p": [0.0, 0.0],
        "max_terms": 400
    });
    write(&dir, "in.json", &input);
    let o = run(&dir, &["eval", "in.json"]);
    assert_eq!(o.status.code(), Some(0));
    let got = complex(&stdout_json(&o)["value"]);
    let basic = BasicSeries {
        kind: BasicKind::Phi,
        numerator: t.to_vec(),
        denominator: w.to_vec(),
        q,
        alpha: C64::new(0.0, 0.0),
        z,
    };
    let want = eval_basic(&basic, (0, 200)).unwrap().value;
    assert!((got - want).norm() <= 1e-12 * want.norm());
}

#[test]
fn invalid_inputs_exit_two_with_json_error() {
    let dir = scratch("invalid");
    std::fs::write(dir.join("bad.json"), "{\"kind\": ").unwrap();
    write(
        &dir,
        "outside.json",
        &json!({
            "kind": "unilateral_E", "numerator": [[0.3, 0.0]], "denominator": [],
            "z": [0.5, 0.0], "q": [1.5, 0.0], "p": [0.0, 0.0]
        }),
    );
    write(
        &dir,
        "window.json",
        &json!({
            "kind": "bilateral_G", "numerator": [[0.3, 0.0]], "denominator": [[0.6, 0.0]],
            "z": [0.5, 0.0], "q": [0.5, 0.0], "p": [0.1, 0.0]
        }),
    );
    for args in [
        &["eval", "bad.json"][..],
        &["eval", "outside.json"],
        &["eval", "window.json"],
        &["eval", "missing.json"],
        &["verify", "ft_sum", "--tol", "0"],
        &["sample", "multi1", "--rank", "0"],
        &["verify", "ft_sum", "--band", "0.5"],
    ] {
        let o = run(&dir, args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        let err: Value =
            serde_json::from_slice(&o.stderr).unwrap_or_else(|_| json!({"error": "usage"}));
        assert!(err["error"].is_string(), "{args:?}");
    }
}

#[test]
fn verify_reports_every_draw() {
    let dir = scratch("verify");
    for (target, tol) in [
        ("ft_sum", "1e-8"),
        ("bailey", "1e-8"),
        ("ge_split", "1e-10"),
    ] {
        let o = run(
            &dir,
            &[
                "verify", target, "--seed", "3", "--draws", "5", "--tol", tol,
            ],
        );
        assert_eq!(o.status.code(), Some(0), "{target}");
        let v = stdout_json(&o);
        assert_eq!(v["reports"].as_array().unwrap().len(), 5);
        assert_eq!(v["summary"]["passed"], json!(5));
    }
}

#[test]
fn failing_check_exits_one() {
    let dir = scratch("fail");
    let s = run(
        &dir,
        &[
            "sample", "ft_sum", "--seed", "2", "--draws", "3", "--n-max", "3",
        ],
    );
    std::fs::write(dir.join("p.json"), &s.stdout).unwrap();
    let o = run(
        &dir,
        &["verify", "ft_sum", "--input", "p.json", "--tol", "1e-18"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout_json(&o)["summary"]["passed"].as_u64().unwrap() < 3);
}

#[test]
fn multi1_rank_one_matches_ft_sum() {
    let dir = scratch("rank1");
    let mut rng = Sampler::new(4);
    let nome = sample_nome(&mut rng).unwrap();
    let ft = sample_ft(&mut rng, 3, &nome, DEFAULT_BAND).unwrap();
    let direct = verify_ft_sum(&ft, 1e-8).unwrap();
    let mut multi = serde_json::to_value(&ft).unwrap();
    multi["n"] = json!(1);
    multi["t6"] = multi["t"].take();
    multi["t"] = json!([0.7, 0.2]);
    write(&dir, "m.json", &multi);
    let o = run(
        &dir,
        &["verify", "multi1", "--input", "m.json", "--tol", "1e-7"],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = &stdout_json(&o)["reports"][0];
    let (lhs, rhs) = (complex(&r["lhs"]), complex(&r["rhs"]));
    assert!((lhs - direct.lhs).norm() <= 1e-9 * direct.lhs.norm());
    assert!((rhs - direct.rhs).norm() <= 1e-9 * direct.rhs.norm());
}

#[test]
fn ellipticity_jobs() {
    let dir = scratch("ellipticity");
    let spec = |factor: f64| {
        let q = C64::new(0.3, 0.1);
        let t = [C64::new(0.6, 0.1), C64::new(0.7, -0.2)];
        let w = [C64::new(0.8, 0.3), C64::new(0.5, 0.5)];
        let mut last = q * w[0] * w[1] / (t[0] * t[1]);
        last *= factor;
        json!({
            "kind": "unilateral_E",
            "numerator": [[t[0].re, t[0].im], [t[1].re, t[1].im], [last.re, last.im]],
            "denominator": [[w[0].re, w[0].im], [w[1].re, w[1].im]],
            "z": [0.8, 0.0], "q": [q.re, q.im], "p": [0.2, 0.05]
        })
    };
    write(
        &dir,
        "jobs.json",
        &json!([
            {"family": "series", "spec": spec(1.0), "check": "index"},
            {"family": "theorem", "u0": [0.21, 0.01], "us": [[0.13, 0.0], [0.31, 0.02]],
             "z": [1.0, 0.0], "pair": {"sigma": [0.11, 0.27], "tau": [0.2, 0.9]}}
        ]),
    );
    let o = run(&dir, &["ellipticity", "jobs.json"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(stdout_json(&o)["pass"], json!(true));

    write(
        &dir,
        "bad.json",
        &json!({"family": "series", "spec": spec(1.1), "check": "index"}),
    );
    let o = run(&dir, &["ellipticity", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["results"][0]["pass"], json!(false));
}
