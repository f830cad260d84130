//! End-to-end checks through the compiled binary: exit codes, output
//! formats, determinism, and the worked examples the reports are expected
//! to reproduce byte for byte.

use std::process::{Command, Output};

fn ramlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_str(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn err_str(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&out_str(o)).expect("stdout is JSON")
}

// ---- exit code contract ----

#[test]
fn unknown_flag_exits_2() {
    let o = ramlab(&["invariants", "--p", "3", "--germ", "z+z^2", "--bogus"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn parse_error_reports_byte_position_and_exits_2() {
    let o = ramlab(&["invariants", "--p", "7", "--germ", "2*z++z^2"]);
    assert_eq!(code(&o), 2);
    assert!(err_str(&o).contains("at byte"), "stderr: {}", err_str(&o));
}

#[test]
fn q_override_mismatch_exits_2() {
    let o = ramlab(&["order", "--p", "7", "--germ", "2*z+z^2", "--q", "6"]);
    assert_eq!(code(&o), 2);
    assert!(err_str(&o).contains("validation-only"));
    // and the matching value passes
    let ok = ramlab(&["order", "--p", "7", "--germ", "2*z+z^2", "--q", "3"]);
    assert_eq!(code(&ok), 0);
}

#[test]
fn nonzero_constant_term_exits_2() {
    let o = ramlab(&["invariants", "--p", "5", "--germ", "1+z"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_p_exits_2() {
    let o = ramlab(&["invariants", "--germ", "z+z^2"]);
    assert_eq!(code(&o), 2);
    assert!(err_str(&o).contains("--p"));
}

#[test]
fn padic_cycles_is_censored_and_exits_3() {
    let o = ramlab(&[
        "cycles", "--p", "3", "--map", "l*z*(1+z)", "--lambda", "padic:1+p", "--nmax", "1",
    ]);
    assert_eq!(code(&o), 3);
    assert!(out_str(&o).contains("indeterminate"));
}

#[test]
fn truncated_mode_cycles_exits_3() {
    let o = ramlab(&[
        "cycles", "--p", "3", "--map", "l*z*(1+z)", "--lambda", "1+t", "--mode", "trunc",
        "--nmax", "1", "--output", "json",
    ]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["backend"], "laurent");
}

#[test]
fn degree_ceiling_refusal_exits_3() {
    let o = ramlab(&[
        "cycles", "--p", "3", "--map", "l*z*(1+z)", "--lambda", "1+t", "--nmax", "2",
        "--degree-ceiling", "60",
    ]);
    assert_eq!(code(&o), 3);
    assert!(err_str(&o).contains("ceiling"));
}

// ---- determinism ----

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "invariants", "--p", "3", "--germ", "z+z^2", "--nmax", "2", "--output", "json",
    ];
    let a = ramlab(&args);
    let b = ramlab(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn classify_rows_do_not_depend_on_jobs() {
    let base = [
        "classify", "--p", "7", "--output", "json", "--jobs", "1",
    ];
    let par = [
        "classify", "--p", "7", "--output", "json", "--jobs", "3",
    ];
    let a = ramlab(&base);
    let b = ramlab(&par);
    assert_eq!(code(&a), 0);
    let (va, vb) = (json(&a), json(&b));
    // configs differ in the jobs field by construction; the rows must not
    assert_eq!(va["rows"], vb["rows"]);
}

// ---- worked examples ----

#[test]
fn f7_classification_sweep() {
    let o = ramlab(&["classify", "--p", "7", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let by_gamma = |g: &str| {
        rows.iter()
            .find(|r| r["gamma"] == g)
            .unwrap_or_else(|| panic!("no row for gamma {}", g))
    };
    assert_eq!(by_gamma("1")["minimal"], true);
    assert_eq!(by_gamma("2")["minimal"], false);
    assert_eq!(by_gamma("4")["minimal"], true);
    assert_eq!(by_gamma("4")["resit"], "5");
    assert_eq!(by_gamma("2")["order"], 3);
}

#[test]
fn f11_profile_censors_then_refines() {
    let short = ramlab(&[
        "invariants", "--p", "11", "--germ", "-1*z+z^2", "--nmax", "1", "--output", "json",
    ]);
    assert_eq!(code(&short), 0);
    let v = json(&short);
    assert_eq!(v["q"], 2);
    assert_eq!(v["rows"][0]["index"]["value"], 2);
    assert_eq!(v["rows"][1]["index"]["kind"], "at_least");

    let long = ramlab(&[
        "invariants", "--p", "11", "--germ", "-1*z+z^2", "--nmax", "1", "--trunc", "60",
        "--output", "json",
    ]);
    let w = json(&long);
    assert_eq!(w["rows"][1]["index"]["kind"], "exact");
    assert_eq!(w["rows"][1]["index"]["value"], 46);
}

#[test]
fn extension_field_profile_censors_as_frozen() {
    let o = ramlab(&[
        "invariants", "--p", "2", "--k", "4", "--germ", "x^3*z*(1+z^5)", "--nmax", "2",
        "--output", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["q"], 5);
    assert_eq!(v["rows"][1]["index"]["kind"], "exact");
    assert_eq!(v["rows"][1]["index"]["value"], 15);
    assert_eq!(v["rows"][2]["index"]["kind"], "at_least");
    assert_eq!(v["rows"][2]["index"]["value"], 36);
}

#[test]
fn mr_dual_paths_agree_on_f7() {
    let o = ramlab(&["mr", "--p", "7", "--germ", "4*z+z^2", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["minimal"], true);
    assert_eq!(v["paths_agree"], true);
    assert_eq!(v["residue_path"]["resit"], "5");
    assert!(v["almost_minimal"].is_null(), "no amr block for odd p");
}

#[test]
fn mr_includes_almost_block_for_p2() {
    let o = ramlab(&["mr", "--p", "2", "--germ", "z+z^3", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["minimal"], false);
    assert_eq!(v["almost_minimal"]["verdict"], true);
}

#[test]
fn undefined_residue_is_a_determinate_answer() {
    let o = ramlab(&["resit", "--p", "3", "--germ", "z+z^3", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["defined"], false);
    assert!(v["resit"].is_null());
}

#[test]
fn normalize_f11_normal_form() {
    let o = ramlab(&[
        "normalize", "--p", "11", "--germ", "-1*z+z^2", "--output", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["a1"], "10");
    assert_eq!(v["a2"], "7");
    assert_eq!(v["resit"], "0");
    let coeffs: Vec<&str> = v["ghat_coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(coeffs, vec!["0", "10", "0", "1", "0", "4"]);
}

#[test]
fn optimal_cycles_in_odd_characteristic() {
    let o = ramlab(&[
        "cycles", "--p", "3", "--map", "l*z*(1+z)", "--lambda", "1+t", "--nmax", "2",
        "--mode", "exact", "--output", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["backend"], "rational");
    assert_eq!(v["q"], 1);
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels[1]["verdict"], "optimal");
    assert_eq!(levels[2]["verdict"], "optimal");
    assert_eq!(levels[1]["new_mass"][0]["valuation"]["num"], 2);
    assert_eq!(levels[1]["new_mass"][0]["valuation"]["den"], 3);
    assert_eq!(levels[1]["new_mass"][0]["count"], 3);
    assert_eq!(levels[2]["new_mass"][0]["count"], 9);
}

#[test]
fn concentration_in_characteristic_2() {
    let o = ramlab(&[
        "cycles", "--p", "2", "--map", "l*z*(1+z^2)", "--lambda", "1+t", "--nmax", "2",
        "--output", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels[1]["verdict"], "concentration");
    assert_eq!(levels[2]["verdict"], "concentration");
    assert_eq!(levels[1]["simplicity"]["status"], "multiple");

    let generic = ramlab(&[
        "cycles", "--p", "2", "--map", "l*z*(1+t*z+z^2)", "--lambda", "1+t", "--nmax", "2",
        "--output", "json",
    ]);
    let w = json(&generic);
    let wl = w["levels"].as_array().unwrap();
    assert_eq!(wl[1]["verdict"], "optimal");
    assert_eq!(wl[2]["verdict"], "optimal");
}

#[test]
fn appendix_indices_scale_by_p() {
    let o = ramlab(&[
        "appendix", "--p", "2", "--map", "1+z", "--lambda", "1+t", "--nmax", "3",
        "--output", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let idx: Vec<i64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["index"]["value"].as_i64().unwrap())
        .collect();
    assert_eq!(idx, vec![2, 4, 8, 16]);
    assert!(v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["matches"] == true));
}

#[test]
fn bound_is_constant_for_the_rational_multiplier() {
    let o = ramlab(&[
        "bound", "--p", "3", "--lambda", "1+t", "--q", "1", "--nmax", "4", "--output", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["valuation"]["num"], 1);
    assert_eq!(rows[0]["valuation"]["den"], 1);
    for row in &rows[1..] {
        assert_eq!(row["valuation"]["num"], 2);
        assert_eq!(row["valuation"]["den"], 3);
    }
}

#[test]
fn bound_decays_geometrically_on_the_padic_side() {
    let o = ramlab(&[
        "bound", "--p", "3", "--lambda", "padic:1+p", "--nmax", "4", "--output", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    let mut den = 1i64;
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(row["valuation"]["num"], 1, "n = {}", n);
        assert_eq!(row["valuation"]["den"], den, "n = {}", n);
        if n > 0 {
            den *= 3;
        } else {
            den = 3;
        }
    }
}

#[test]
fn dump_iterate_writes_the_full_coefficient_array() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iterate.json");
    let o = ramlab(&[
        "cycles", "--p", "3", "--map", "l*z*(1+z)", "--lambda", "1+t", "--nmax", "1",
        "--output", "json", "--dump-iterate", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let body = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["period"], 3);
    assert_eq!(v["degree"], 8);
    assert_eq!(v["coeffs"].as_array().unwrap().len(), 9);
    assert_eq!(v["valuations"].as_array().unwrap().len(), 9);
}

#[test]
fn reports_echo_their_configuration() {
    let o = ramlab(&[
        "invariants", "--p", "3", "--germ", "z+z^2", "--output", "json", "--seed", "7",
    ]);
    let v = json(&o);
    assert_eq!(v["config"]["command"], "invariants");
    assert_eq!(v["config"]["p"], 3);
    assert_eq!(v["config"]["germ"], "z+z^2");
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn tsv_and_pretty_render_without_error() {
    for fmt in ["tsv", "pretty"] {
        let o = ramlab(&[
            "invariants", "--p", "3", "--germ", "z+z^2", "--output", fmt,
        ]);
        assert_eq!(code(&o), 0, "format {}", fmt);
        assert!(!out_str(&o).is_empty());
    }
}
