//! Acceptance criterion 11: every built-in demo exits 0, the JSON
//! reports validate against the shipped schema, and identical inputs
//! produce byte-identical reports modulo timing fields.

use std::process::{Command, Output};

fn qbh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbh"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_11_cli_contract_over_all_demos() {
    let names: Vec<String> = {
        let out = qbh(&["list-demos"]);
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .filter_map(|l| l.split_whitespace().next().map(String::from))
            .collect()
    };
    assert_eq!(names.len(), 6);

    for name in &names {
        // exit 0 under the default policy
        let out = qbh(&["demo", name, "--json"]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = String::from_utf8_lossy(&out.stdout).into_owned();

        // the report validates against the shipped schema
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let violations = qbh_cli::schema::validate_report(&value);
        assert!(violations.is_empty(), "{name}: {violations:?}");

        // byte-identical reports modulo the timing fields
        let second = qbh(&["demo", name, "--json"]);
        let text2 = String::from_utf8_lossy(&second.stdout).into_owned();
        let strip = |t: &str| -> String {
            let mut v: serde_json::Value = serde_json::from_str(t).unwrap();
            for check in v["checks"].as_array_mut().unwrap() {
                check["wall_ms"] = serde_json::json!(0.0);
            }
            serde_json::to_string(&v).unwrap()
        };
        assert_eq!(strip(&text), strip(&text2), "{name}: report drifted");
    }
    println!(
        "criterion 11: PASS - all six demos exit 0 with schema-valid, reproducible JSON reports"
    );
}
