use std::process::{Command, Output};

fn greenspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greenspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_prints_the_eigenvalue() {
    let o = greenspec(&["solve", "--kernel", "greens_laplace", "--method", "collocation", "--r", "0", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("lambda 0.125"));

    let o = greenspec(&["solve", "--method", "iterated_galerkin", "--n", "2", "--eval", "0.25,0.5"]);
    let out = stdout(&o);
    assert!(out.contains("lambda 0.0833333333333333"), "{out}");
    assert!(out.contains("phi(0.25) 0.75"), "{out}");
    assert!(out.contains("phi(0.5) 1"), "{out}");
}

#[test]
fn solve_json() {
    let o = greenspec(&["solve", "--method", "modified_galerkin", "--n", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lambda = v["lambda"].as_f64().unwrap();
    assert!((lambda - (1.0 / 12.0 + (1.0f64 / 80.0).sqrt()) / 2.0).abs() < 1e-15);
    assert_eq!(v["method"], "modified_galerkin");
    assert!((v["classical_lambda"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-15);
}

#[test]
fn study_markdown_mirrors_the_table() {
    let o = greenspec(&[
        "study", "--kernel", "greens_laplace", "--method", "galerkin", "--r", "0", "--n-list",
        "2,4,8,16,32,64", "--format", "md",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| l.starts_with("| ")).collect();
    assert_eq!(rows[0], "| n | error | rate | vector error | rate |");
    assert!(rows[1].starts_with("| 2 | 1.80e-2 |"));
    assert!(rows[2].starts_with("| 4 | 5.04e-3 | 1.83 |"));
    assert!(rows[6].starts_with("| 64 | 2.03e-5 | 2.00 |"));
}

#[test]
fn study_writes_csv_and_json_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let o = greenspec(&[
        "study", "--method", "modified_collocation", "--n-list", "4,8", "--format", "csv", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,lambda,lambda_error,eoc_lambda,vector_error,eoc_vector,wall_time_ms")
    );
    assert!(lines.next().unwrap().starts_with("4,"));
    assert!(lines.next().unwrap().starts_with("8,"));

    let o = greenspec(&["study", "--method", "collocation", "--n-list", "4,8", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["method"], "collocation");
    assert_eq!(v["quad_order"], 10);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    assert!(v["records"][0]["eoc_lambda"].is_null());
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["study", "--n-list", "3,5"][..],
        &["study", "--method", "nystrom"][..],
        &["solve", "--n", "2", "--kernel", "no_such_kernel"][..],
        &["solve", "--n", "2", "--quad", "1"][..],
        &["solve", "--n", "2", "--r", "4"][..],
        &["solve", "--n", "2", "--select", "smallest"][..],
        &["solve", "--n", "0"][..],
        &["solve"][..],
        &["frobnicate"][..],
    ] {
        let o = greenspec(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    let o = greenspec(&["study", "--method", "nystrom"]);
    assert!(stderr(&o).contains("iterated_modified_collocation"));
    let o = greenspec(&["study", "--n-list", "3,5"]);
    assert!(stderr(&o).contains("double"));
}

#[test]
fn numerical_failures_exit_with_one() {
    // continuous across the diagonal but undefined everywhere on the square
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.json");
    std::fs::write(
        &path,
        r#"{"name": "log", "kappa1": "log(t - s - 2)", "kappa2": "log(t - s - 2)"}"#,
    )
    .unwrap();
    let o = greenspec(&["solve", "--kernel", path.to_str().unwrap(), "--n", "4", "--r", "1"]);
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), stderr(&o));
    assert!(stderr(&o).contains("log of nonpositive"));
}

#[test]
fn kernel_subcommands() {
    let o = greenspec(&["kernel", "list"]);
    assert_eq!(stdout(&o), "greens_laplace\n");

    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{"name": "laplace_dsl", "kappa1": "t*(1-s)", "kappa2": "s*(1-t)",
            "exact": {"eigenvalue": 0.10132118364233778, "eigenfunction": "sin(pi*s)"}}"#,
    )
    .unwrap();
    let o = greenspec(&["kernel", "validate", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("ok laplace_dsl\n"));
    assert!(out.contains("symmetric true"));
    assert!(out.contains("exact true"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "jump", "kappa1": "t", "kappa2": "s + 1"}"#).unwrap();
    let o = greenspec(&["kernel", "validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("diagonal"));

    let o = greenspec(&["kernel", "validate", "/nonexistent/kernel.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn file_kernel_agrees_with_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    std::fs::write(&path, r#"{"name": "dsl", "kappa1": "t*(1-s)", "kappa2": "s*(1-t)"}"#).unwrap();
    let a = greenspec(&["solve", "--kernel", path.to_str().unwrap(), "--method", "galerkin", "--n", "8", "--r", "1"]);
    let b = greenspec(&["solve", "--method", "galerkin", "--n", "8", "--r", "1"]);
    let first = |o: &Output| stdout(o).lines().next().unwrap().to_string();
    assert_eq!(first(&a), first(&b));
}

#[test]
fn rates_subcommand() {
    let o = greenspec(&["rates", "--method", "collocation", "--r", "0", "--n-list", "4,8,16,32"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let last: f64 = out.lines().last().unwrap().split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((last - 2.0).abs() < 0.2, "{out}");

    let o = greenspec(&["rates", "--x", "log(t - 2)"]);
    assert_eq!(o.status.code(), Some(1));
    let o = greenspec(&["rates", "--x", "cos(3*"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_results() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_greenspec"))
            .env("GREENSPEC_THREADS", threads)
            .args(["study", "--method", "iterated_galerkin", "--n-list", "2,4,8,16", "--format", "json"])
            .output()
            .unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        for r in v["records"].as_array_mut().unwrap() {
            r["wall_time_ms"] = serde_json::Value::Null;
        }
        v
    };
    assert_eq!(run("1"), run("4"));
}
