use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const SUBCOMMANDS: &[&str] = &[
    "map",
    "validate",
    "verify",
    "fixed-points",
    "jacobian",
    "iterate",
    "flow",
    "error-curve",
    "circle-poly",
    "concat-survey",
    "fractal",
    "cost",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magicflow"))
        .args(args)
        .env_remove("MAGICFLOW_CATALOG_DIR")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_record(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is a JSON error record")
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn help_texts_match_golden_files() {
    let update = std::env::var_os("MAGICFLOW_UPDATE_GOLDEN").is_some();
    let mut cases: Vec<(String, Vec<&str>)> = vec![("magicflow".into(), vec!["--help"])];
    for s in SUBCOMMANDS {
        cases.push((s.to_string(), vec![s, "--help"]));
    }
    for (name, args) in cases {
        let out = run(&args);
        assert!(out.status.success(), "{name} --help failed");
        let text = String::from_utf8(out.stdout).unwrap();
        let path = golden_dir().join(format!("help_{name}.txt"));
        if update {
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        let want =
            std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        assert_eq!(text, want, "help text of {name} changed");
    }
}

#[test]
fn every_help_lists_global_flags() {
    for s in SUBCOMMANDS {
        let text = String::from_utf8(run(&[s, "--help"]).stdout).unwrap();
        for flag in ["--output", "--format", "--seed", "--jobs"] {
            assert!(text.contains(flag), "{s} --help lacks {flag}");
        }
    }
}

#[test]
fn steane_planar_export() {
    let out = run(&["map", "--code", "steane", "--plane", "z0"]);
    assert!(out.status.success());
    let v = json_of(&out);
    let rows = |key: &str| -> Vec<Vec<i64>> { serde_json::from_value(v[key].clone()).unwrap() };
    assert_eq!(
        rows("denominator"),
        vec![vec![0, 0, 0, 1], vec![0, 4, 0, 7], vec![4, 0, 0, 7]]
    );
    assert_eq!(
        rows("numerator_x"),
        vec![vec![3, 0, 0, 7], vec![3, 4, 0, 7], vec![7, 0, 0, 1]]
    );
    assert_eq!(
        rows("numerator_y"),
        vec![vec![0, 3, 0, 7], vec![0, 7, 0, 1], vec![4, 3, 0, 7]]
    );
}

#[test]
fn circle_polynomial_of_311() {
    let out = run(&["circle-poly", "--code", "311", "--param", "sin-x-cos-z"]);
    assert!(out.status.success());
    let v = json_of(&out);
    let c: Vec<i64> = serde_json::from_value(v["coefficients"].clone()).unwrap();
    assert_eq!(c, vec![-1, -2, 10, 10, 8, -6, -2, -2, 1]);
    assert_eq!(v["degree"], 8);
}

#[test]
fn unknown_code_is_a_usage_error() {
    let out = run(&["map", "--code", "nonexist"]);
    assert_eq!(out.status.code(), Some(1));
    let e = error_record(&out);
    assert_eq!(e["error"]["kind"], "usage");
    assert_eq!(e["error"]["exit_code"], 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flags_are_usage_errors() {
    for args in [
        &["frobnicate"][..],
        &["map", "--code", "steane", "--bogus"],
        &["map", "--code", "steane", "--plane", "w0"],
        &["cost", "--model", "linear", "--eps-tar", "1e-6"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert_eq!(error_record(&out)["error"]["kind"], "usage");
    }
}

#[test]
fn invalid_code_file_is_a_validation_error() {
    let dir = std::env::temp_dir().join(format!("magicflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.code");
    std::fs::write(
        &path,
        "name: bad\nn: 2\nk: 1\ngenerator: XZ\nlogical_x[0]: XX\nlogical_z[0]: ZI\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let out = run(&["validate", "--code", p]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["valid"], false);
    assert_eq!(error_record(&out)["error"]["kind"], "validation");
    let out = run(&["map", "--code", p]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identity_map_is_a_numerical_failure() {
    let dir = std::env::temp_dir().join(format!("magicflow-id-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trivial.code");
    std::fs::write(
        &path,
        "name: trivial\nn: 1\nk: 1\nlogical_x[0]: X\nlogical_z[0]: Z\n",
    )
    .unwrap();
    let out = run(&[
        "fixed-points",
        "--code",
        path.to_str().unwrap(),
        "--grid",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["identity"], true);
    assert_eq!(error_record(&out)["error"]["kind"], "numerical");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn manual_map_search_succeeds() {
    let out = run(&[
        "fixed-points",
        "--code",
        "612",
        "--plane",
        "y0",
        "--grid",
        "5",
    ]);
    assert!(out.status.success());
    assert!(!json_of(&out)["fixed_points"].as_array().unwrap().is_empty());
}

#[test]
fn output_is_byte_identical_across_runs_and_jobs() {
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "verify",
            "--code",
            "steane",
            "--samples",
            "50",
            "--seed",
            "7",
        ],
        vec![
            "fixed-points",
            "--code",
            "411",
            "--plane",
            "y0",
            "--grid",
            "30",
            "--order",
        ],
        vec![
            "concat-survey",
            "--code",
            "311",
            "--code",
            "411",
            "--levels",
            "5",
            "--grid",
            "2000",
        ],
        vec!["flow", "--code", "311", "--grid", "9", "--format", "csv"],
        vec![
            "error-curve",
            "--code",
            "steane",
            "--theta",
            "0.7853981633974483",
            "--points",
            "7",
        ],
    ];
    for args in cases {
        let first = run(&args);
        assert!(
            first.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&first.stderr)
        );
        let again = run(&args);
        assert_eq!(first.stdout, again.stdout, "{args:?} not reproducible");
        let mut single = args.clone();
        single.extend(["--jobs", "1"]);
        assert_eq!(
            first.stdout,
            run(&single).stdout,
            "{args:?} depends on --jobs"
        );
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("magicflow-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("poly.csv");
    let args = ["circle-poly", "--code", "411", "--format", "csv"];
    let stdout = run(&args).stdout;
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let out = run(&with_file);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
    let text = String::from_utf8(stdout).unwrap();
    assert!(text.starts_with("power,coefficient\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn json_floats_carry_seventeen_digits() {
    let out = run(&[
        "cost",
        "--model",
        "synthesis",
        "--c",
        "3",
        "--eps-tar",
        "0.1",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"eps_tar\":1.0000000000000001e-1"), "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["cost"].as_f64().unwrap(), 3.0 * 10f64.ln());
}

#[test]
fn catalog_override_directory() {
    let dir = std::env::temp_dir().join(format!("magicflow-cat-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("steane.code"),
        "name: steane\nn: 1\nk: 1\nlogical_x[0]: X\nlogical_z[0]: Z\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_magicflow"))
        .args(["validate", "--code", "steane"])
        .env("MAGICFLOW_CATALOG_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json_of(&out)["n"], 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn fractal_reads_survey_csv() {
    let survey = run(&[
        "concat-survey",
        "--code",
        "311",
        "--code",
        "411",
        "--levels",
        "6",
        "--grid",
        "2000",
        "--format",
        "csv",
    ]);
    assert!(survey.status.success());
    let dir = std::env::temp_dir().join(format!("magicflow-frac-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("thetas.csv");
    std::fs::write(&path, &survey.stdout).unwrap();
    let out = run(&["fractal", "--input", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json_of(&out);
    assert_eq!(v["points"], 126);
    assert!(v["dimension"].as_f64().unwrap() > 0.0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn delimited_flags_take_one_argument() {
    let out = run(&[
        "fixed-points",
        "--code",
        "311",
        "--plane",
        "y0",
        "--grid",
        "20",
        "--bounds",
        "-0.5,0.5",
        "--format",
        "csv",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("x,z,residual"));
    let out = run(&[
        "flow",
        "--code",
        "311",
        "--grid",
        "3",
        "--region",
        "-0.5,0.5,-0.5,0.5",
        "--format",
        "csv",
    ]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 10);
    let out = run(&["fixed-points", "--code", "311", "--bounds", "1,2,3"]);
    assert_eq!(out.status.code(), Some(1));
}
