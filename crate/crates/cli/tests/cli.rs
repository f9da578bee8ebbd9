mod common;

use std::path::Path;

use serde_json::{json, Value};

use common::{data, demo_config, run, run_config, schema_errors, Run};
use rkhsmult::table::ValueTable;
use rkhsmult_core::scalar::ratio;
use rkhsmult_core::Functional;

fn write_config(dir: &Path, name: &str, config: &Value) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn with_config(config: Value, command: &str, extra: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "job.json", &config);
    run_config(command, &path, extra)
}

fn assert_invalid(r: &Run, needle: &str) {
    assert_eq!(r.code, 2, "stdout: {}", r.stdout);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains(needle), "stderr: {}", r.stderr);
}

#[test]
fn counterexample_power_criterion_exits_one() {
    let r = run_config("verify", &data("counterexample_power.json"), &[]);
    assert_eq!(r.code, 1);
    let doc = r.json();
    assert_eq!(doc["summary"]["verdict"], "fail");
    // Λ(1/k_w) Λ(k_w) = (1 - w̄)(1 + w̄), so the residual is |w̄²| = |w|²
    for s in doc["checks"][0]["result"]["samples"].as_array().unwrap() {
        let w = &s["point"][0];
        let re = rkhsmult::numfmt::parse_rational(w[0].as_str().unwrap()).unwrap();
        let im = rkhsmult::numfmt::parse_rational(w[1].as_str().unwrap()).unwrap();
        let expected = num_traits::ToPrimitive::to_f64(&(&re * &re + &im * &im)).unwrap();
        assert_eq!(s["residual"].as_f64().unwrap(), expected, "{}", s);
    }
}

#[test]
fn origin_equivalence_exits_zero() {
    let r = run_config("report", &data("origin_equivalence.json"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let check = &r.json()["checks"][0];
    assert_eq!(check["status"], "pass");
    assert_eq!(check["result"]["consistent"], true);
}

#[test]
fn invalid_kernels_exit_two() {
    assert_invalid(&run_config("cnp", &data("bad_constant_term.json"), &[]), "a_0 = 1");
    assert_invalid(&run_config("cnp", &data("zero_coefficient.json"), &[]), "a_2 = 0");
}

#[test]
fn parse_errors_report_offsets() {
    let r = with_config(
        json!({"schema_version": 1, "kernels": {"k": "power(szego 2)"}}),
        "cnp",
        &[],
    );
    assert_invalid(&r, "offset 12");
}

#[test]
fn config_validation_exits_two() {
    let base = json!({
        "schema_version": 1,
        "degree": 8,
        "kernels": {"s": "szego", "t": "tensor(szego, szego)"},
        "functionals": {"o": "point([0])", "to": "tensor_point([0], [0])"},
    });
    let cases = [
        (
            json!({"kind": "power", "kernel": "missing", "functional": "o", "p": 1}),
            "unknown kernel",
        ),
        (
            json!({"kind": "power", "kernel": "s", "functional": "o", "p": 0}),
            "p must be at least 1",
        ),
        (
            json!({"kind": "power", "kernel": "t", "functional": "o", "p": 1}),
            "tensor kernel",
        ),
        (
            json!({"kind": "tensor", "kernel": "t", "functional": "o"}),
            "not a tensor functional",
        ),
        (
            json!({"kind": "brute_force", "functional": "o", "max_degree": 5}),
            "exceeds the truncation degree",
        ),
        (
            json!({"kind": "identity", "kernel": "s", "functional": "o", "p": 1, "max_degree": 9}),
            "exceeds",
        ),
        (
            json!({"kind": "power", "kernel": "s", "functional": "o", "p": 1, "extra": 1}),
            "unknown field",
        ),
    ];
    for (check, needle) in cases {
        let mut config = base.clone();
        config["checks"] = json!([check]);
        assert_invalid(&with_config(config, "report", &[]), needle);
    }
    let mut config = base.clone();
    config["schema_version"] = json!(2);
    assert_invalid(&with_config(config, "cnp", &[]), "schema_version");
    let mut config = base.clone();
    config["samples"] = json!([["1/2", "0"]]);
    config["checks"] = json!([{"kind": "power", "kernel": "s", "functional": "o", "p": 1}]);
    assert_invalid(&with_config(config, "verify", &[]), "coordinates");
    assert_invalid(&with_config(base.clone(), "verify", &[]), "no checks");
    assert_invalid(&run(&["cnp", "--config", "/nonexistent/job.json"]), "cannot read");
    assert_eq!(run(&["cnp"]).code, 2);
}

#[test]
fn check_errors_exit_two_with_a_report() {
    let r = with_config(
        json!({
            "schema_version": 1, "degree": 6,
            "kernels": {"bergman": "power(szego, 2)"},
            "functionals": {"o": "point([0])"},
            "checks": [{"kind": "power", "kernel": "bergman", "functional": "o", "p": 1}]
        }),
        "verify",
        &[],
    );
    assert_eq!(r.code, 2);
    let doc = r.json();
    assert_eq!(doc["summary"]["verdict"], "error");
    assert_eq!(doc["checks"][0]["status"], "error");
    assert!(doc["checks"][0]["error"].as_str().unwrap().contains("not CNP"));
    assert!(r.stderr.contains("failed to run"));
}

#[test]
fn subcommands_select_their_checks() {
    let demo = demo_config();
    let kinds = |r: &Run| -> Vec<String> {
        r.json()["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["kind"].as_str().unwrap().to_string())
            .collect()
    };
    let verify = run_config("verify", &demo, &[]);
    assert_eq!(verify.code, 0);
    assert!(kinds(&verify)
        .iter()
        .all(|k| ["power", "schur", "tensor", "dual_route"].contains(&k.as_str())));
    let identity = run_config("identity", &demo, &[]);
    assert!(kinds(&identity)
        .iter()
        .all(|k| ["identity", "identity_schur", "identity_tensor", "brute_force"].contains(&k.as_str())));
    let report = run_config("report", &demo, &[]);
    assert_eq!(
        kinds(&report).len(),
        report.json()["config"]["checks"].as_array().unwrap().len()
    );
    // ids keep their position in the config across subcommands
    assert_eq!(identity.json()["checks"][0]["id"], "13-identity");
}

#[test]
fn cnp_and_norm_generate_default_checks() {
    let config = json!({
        "schema_version": 1, "degree": 10,
        "kernels": {"bergman": "power(szego, 2)", "dirichlet": "dirichlet", "poly": "tensor(szego, szego)"},
        "functionals": {"v": "point([1/3])", "t": "tensor_point([0], [0])"}
    });
    let cnp = with_config(config.clone(), "cnp", &[]);
    assert_eq!(cnp.code, 1);
    let doc = cnp.json();
    let checks = doc["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert_eq!(checks[0]["subjects"]["kernels"][0], "bergman");
    assert_eq!(checks[0]["result"]["b"][2], "-1");
    assert_eq!(checks[0]["result"]["first_negative_index"], 2);
    assert_eq!(checks[1]["result"]["b"][1], "1/2");
    assert_eq!(checks[1]["result"]["b"][2], "1/12");

    let norm = with_config(config, "norm", &[]);
    let doc = norm.json();
    let checks = doc["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    for c in checks {
        let pe = &c["result"]["point_evaluation"];
        assert_eq!(pe["within_tail"], true, "{}", c);
        assert_eq!(c["result"]["monotone"], true);
    }
}

#[test]
fn overrides_take_precedence() {
    let r = run_config(
        "verify",
        &demo_config(),
        &["--degree", "10", "--tol", "1e-6", "--mode", "float"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_eq!(doc["audit"]["degree"], 10);
    assert_eq!(doc["audit"]["mode"], "float");
    assert_eq!(doc["config"]["tolerance"], 1e-6);
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["mode"] == "float"));
    assert!(schema_errors("report.schema.json", &doc).is_empty());
    assert_eq!(run_config("verify", &demo_config(), &["--mode", "fast"]).code, 2);
}

#[test]
fn float_mode_report_matches_schema() {
    let r = run_config("report", &data("float_mixed.json"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    let errors = schema_errors("report.schema.json", &doc);
    assert!(errors.is_empty(), "{:#?}", errors);
    // identity legs stay exact while the criterion leg runs in floats
    let eq = doc["checks"].as_array().unwrap().last().unwrap();
    assert_eq!(eq["kind"], "equivalence");
    assert_eq!(eq["result"]["brute_force"]["pass"], true);
    assert_eq!(eq["result"]["identities"]["all_equal"], true);
}

#[test]
fn schema_validator_rejects_malformed_reports() {
    let mut doc = run_config("cnp", &demo_config(), &[]).json();
    assert!(schema_errors("report.schema.json", &doc).is_empty());
    doc["checks"][0]["status"] = json!("maybe");
    doc["summary"]["extra"] = json!(1);
    assert_eq!(schema_errors("report.schema.json", &doc).len(), 2);
}

#[test]
fn dense_sweep_uses_one_hundred_points() {
    let r = with_config(
        json!({
            "schema_version": 1, "degree": 8,
            "kernels": {"s": "szego", "t": "tensor(szego, szego)"},
            "functionals": {"o": "point([0])", "to": "tensor_point([0], [0])"},
            "checks": [
                {"kind": "power", "kernel": "s", "functional": "o", "p": 2},
                {"kind": "tensor", "kernel": "t", "functional": "to"}
            ]
        }),
        "verify",
        &["--dense"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_eq!(doc["audit"]["samples"], "dense");
    for c in doc["checks"].as_array().unwrap() {
        assert_eq!(c["result"]["samples"].as_array().unwrap().len(), 100);
        assert_eq!(c["result"]["max_residual"], 0.0);
    }
}

#[test]
fn out_csv_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv_path = dir.path().join("residuals.csv");
    let r = run_config(
        "verify",
        &data("counterexample_power.json"),
        &[
            "--out",
            out.to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
            "--timing",
        ],
    );
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["timing"]["total_ms"].as_f64().unwrap() >= 0.0);
    assert!(schema_errors("report.schema.json", &doc).is_empty());

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[5], "residual");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(&rows[1][3], "1/2 0");
    assert_eq!(&rows[1][5], "0.25");

    let plain = run_config("verify", &data("counterexample_power.json"), &[]);
    assert!(plain.json().get("timing").is_none());
}

#[test]
fn value_tables_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let f = Functional::point_evaluation(&[ratio(1, 3), ratio(-1, 4)], 6).unwrap();
    let table = ValueTable::from_functional(&f);
    std::fs::write(dir.path().join("vals.json"), serde_json::to_string(&table).unwrap()).unwrap();
    let bumped = f
        .clone()
        .with_value(&rkhsmult_core::MultiIndex::new(vec![1, 1]), ratio(0, 1))
        .unwrap();
    std::fs::write(
        dir.path().join("bumped.json"),
        serde_json::to_string(&ValueTable::from_functional(&bumped)).unwrap(),
    )
    .unwrap();
    let config = json!({
        "schema_version": 1, "degree": 6,
        "kernels": {"da": "drury_arveson(2)"},
        "functionals": {"t": "table(vals.json)", "b": "table(\"bumped.json\")"},
        "checks": [
            {"kind": "brute_force", "functional": "t", "max_degree": 3},
            {"kind": "identity", "kernel": "da", "functional": "t", "p": 2, "max_degree": 4},
            {"kind": "brute_force", "functional": "b", "max_degree": 3, "expect": "fail"},
            {"kind": "identity", "kernel": "da", "functional": "b", "p": 2, "max_degree": 4, "expect": "fail"}
        ]
    });
    let path = write_config(dir.path(), "job.json", &config);
    let r = run_config("identity", &path, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    let checks = doc["checks"].as_array().unwrap();
    assert_eq!(checks[2]["result"]["witness_degree"], 2);
    assert_eq!(checks[3]["result"]["first_failure_degree"], 2);

    std::fs::write(dir.path().join("vals.json"), "{\"kind\": \"functional\"}").unwrap();
    assert_invalid(&run_config("identity", &path, &[]), "vals.json");
}
