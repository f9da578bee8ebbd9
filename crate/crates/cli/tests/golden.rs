//! Reports compared byte for byte with `tests/golden/`. Set
//! `RKHSMULT_BLESS=1` to rewrite the golden files after an intended change.

mod common;

use std::path::Path;

use common::{data, demo_config, manifest_dir, run_config, schema_errors};

fn golden(name: &str, command: &str, config: &Path, code: i32) {
    let r = run_config(command, config, &[]);
    assert_eq!(r.code, code, "stderr: {}", r.stderr);
    let errors = schema_errors("report.schema.json", &r.json());
    assert!(errors.is_empty(), "{:#?}", errors);
    let path = manifest_dir().join("tests/golden").join(name);
    if std::env::var_os("RKHSMULT_BLESS").is_some() {
        std::fs::write(&path, &r.stdout).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {} (run with RKHSMULT_BLESS=1 to create it)", path.display(), e));
    assert!(
        expected == r.stdout,
        "{} differs from the current report",
        path.display()
    );
}

#[test]
fn demo_report() {
    golden("demo_report.json", "report", &demo_config(), 0);
}

#[test]
fn demo_cnp() {
    golden("demo_cnp.json", "cnp", &demo_config(), 0);
}

#[test]
fn counterexample_power() {
    golden(
        "counterexample_power.json",
        "verify",
        &data("counterexample_power.json"),
        1,
    );
}

#[test]
fn origin_equivalence() {
    golden("origin_equivalence.json", "report", &data("origin_equivalence.json"), 0);
}

#[test]
fn schemas_accept_the_bundled_configs() {
    for path in [
        demo_config(),
        data("counterexample_power.json"),
        data("origin_equivalence.json"),
        data("float_mixed.json"),
    ] {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let errors = schema_errors("config.schema.json", &v);
        assert!(errors.is_empty(), "{}: {:#?}", path.display(), errors);
    }
}
