use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn conelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(args)
        .env_remove("CONELAB_MAX_DIM")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad report ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn status<'a>(rep: &'a Value, check: &str) -> &'a str {
    rep["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["check"] == check)
        .unwrap_or_else(|| panic!("no check {check} in {rep}"))["status"]
        .as_str()
        .unwrap()
}

fn all_pass(rep: &Value) -> bool {
    rep["results"].as_array().unwrap().iter().all(|r| r["status"] == "PASS")
}

#[test]
fn orthant_dual_is_itself() {
    let path = data("orthant3.json");
    let out = conelab(&["dual", "-i", &path]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["command"], "dual");
    assert_eq!(status(&rep, "dual.biduality"), "PASS");
    assert_eq!(rep["results"][0]["details"]["self_dual"], 1);
    let gens = &rep["output"]["cone"]["generators"];
    assert_eq!(gens.as_array().unwrap().len(), 3);
    for g in gens.as_array().unwrap() {
        let ones = g.as_array().unwrap().iter().filter(|x| *x == "1").count();
        assert_eq!(ones, 1);
    }
    assert!(rep["inputs"]["digest"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(rep["inputs"]["files"][0]["path"], path.as_str());
    assert_eq!(rep["elapsed"], Value::Null);
}

#[test]
fn square_cone_dual_has_four_rays() {
    let out = conelab(&["dual", "-i", &data("square_cone.json")]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["output"]["cone"]["generators"].as_array().unwrap().len(), 4);
    assert_eq!(rep["results"][0]["details"]["self_dual"], 0);
}

#[test]
fn random_duality_batch_passes() {
    let out = conelab(&["verify-duality", "--random", "50", "--dim", "4", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["summary"]["pass"], 50);
    assert_eq!(rep["summary"]["fail"], 0);
    assert_eq!(rep["results"][0]["check"], "duality[000]");
    assert_eq!(rep["seed"], 1);
}

#[test]
fn duality_for_a_given_pair() {
    let out = conelab(&["verify-duality", "-a", &data("narrow2.json"), "-b", &data("square_cone.json")]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["summary"]["pass"], 1);
    assert_eq!(rep["results"][0]["details"]["facets"], rep["results"][0]["details"]["rays"]);
}

#[test]
fn sandwich_strictness_with_evidence() {
    let out = conelab(&["verify-sandwich", "--m", "2", "--n", "2", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert!(all_pass(&rep));
    let find = |name: &str| {
        rep["results"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["check"] == name)
            .unwrap()
            .clone()
    };
    let bell = find("sandwich.bell_not_separable");
    assert!(bell["details"]["ppt_witness_eigenvalue"].as_f64().unwrap() < -0.4);
    assert_eq!(bell["witness"]["kind"], "eigenvector");
    let swap = find("sandwich.swap_not_psd");
    assert!((swap["details"]["min_eig"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    let bp = find("sandwich.swap_block_positive");
    assert!(bp["details"]["product_minimum"].as_f64().unwrap() > -1e-9);
}

#[test]
fn malformed_json_reports_location() {
    let out = conelab(&["dual", "-i", &data("malformed.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("generators"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_are_usage_errors() {
    assert_eq!(conelab(&["dual", "-i", "/nonexistent/cone.json"]).status.code(), Some(2));
    assert_eq!(conelab(&["dual"]).status.code(), Some(2));
    assert_eq!(conelab(&["frobnicate"]).status.code(), Some(2));
    let out = conelab(&["selfdualize", "-i", &data("narrow2.json"), "--strategy", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(conelab(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_deterministic() {
    let a = conelab(&["verify-duality", "--random", "8", "--seed", "9"]);
    let b = conelab(&["verify-duality", "--random", "8", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let c = conelab(&["verify-duality", "--random", "8", "--seed", "10"]);
    assert_ne!(report(&a)["inputs"]["digest"], report(&c)["inputs"]["digest"]);

    let p = data("narrow2.json");
    let x = conelab(&["selfdualize", "-i", &p, "--seed", "4"]);
    let y = conelab(&["selfdualize", "-i", &p, "--seed", "4"]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn presentation_flags_leave_digest_alone() {
    let p = data("orthant3.json");
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.json");
    let plain = report(&conelab(&["dual", "-i", &p]));
    let out = conelab(&["dual", "-i", &p, "--timing", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let saved: Value = serde_json::from_slice(&std::fs::read(&file).unwrap()).unwrap();
    assert_eq!(saved["inputs"]["digest"], plain["inputs"]["digest"]);
    assert!(saved["elapsed"].as_f64().unwrap() >= 0.0);
}

#[test]
fn failing_member_witness_rechecks() {
    let fam = data("unit_simplex.json");
    let g = data("ray_pair.json");
    let out = conelab(&["construct-tp", "-f", &fam, "--g", &g, "--h", &g, "-x", &data("a_out.json")]);
    assert_eq!(out.status.code(), Some(1));
    let rep = report(&out);
    assert_eq!(status(&rep, "tp.member"), "FAIL");
    let witness = rep["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["check"] == "tp.member")
        .unwrap()["witness"]
        .clone();

    // the unit family gives the maximal product, so the witness must fail there too
    let dir = tempfile::tempdir().unwrap();
    let wpath = dir.path().join("w.json");
    std::fs::write(&wpath, witness.to_string()).unwrap();
    let again = conelab(&["construct-tp", "-f", &fam, "--g", &g, "--h", &g, "-x", wpath.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(1));

    let cone = &rep["output"]["cone"];
    let a: Vec<i64> = witness
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().parse().unwrap())
        .collect();
    let violated = cone["facets"].as_array().unwrap().iter().any(|f| {
        let f: Vec<i64> = f.as_array().unwrap().iter().map(|v| v.as_str().unwrap().parse().unwrap()).collect();
        f.iter().zip(&a).map(|(p, q)| p * q).sum::<i64>() < 0
    });
    assert!(violated);
}

#[test]
fn member_of_constructed_product() {
    let g = data("ray_pair.json");
    let out = conelab(&["construct-tp", "-f", &data("unit_simplex.json"), "--g", &g, "--h", &g, "-x", &data("a_in.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(all_pass(&report(&out)));
}

#[test]
fn negated_family_misses_min_and_says_where() {
    let out = conelab(&["construct-tp", "-f", &data("bad_simplex.json")]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    let gate = rep["results"].as_array().unwrap().iter().find(|r| r["check"] == "tp.min_gate").unwrap();
    assert_eq!(gate["details"]["gate"], 0);
    assert_eq!(gate["witness"]["entry"], 0);

    let t = conelab(&[
        "tensor",
        "-a",
        &data("narrow2.json"),
        "-b",
        &data("ray_pair.json"),
        "--kind",
        "constructed",
        "--family",
        &data("bad_simplex.json"),
    ]);
    assert_eq!(t.status.code(), Some(0));
    let rep = report(&t);
    assert_eq!(rep["output"]["kind"], "constructed:negated");
}

#[test]
fn max_tensor_of_plane_cones() {
    let out = conelab(&["tensor", "-a", &data("narrow2.json"), "-b", &data("ray_pair.json"), "--kind", "max"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["output"]["cone"]["dim"], 4);
    assert!(all_pass(&rep));
}

#[test]
fn selfdualize_plane_cone_all_strategies() {
    for s in ["greedy", "damped-midpoint", "bisector-2d"] {
        let out = conelab(&["selfdualize", "-i", &data("narrow2.json"), "--strategy", s]);
        assert_eq!(out.status.code(), Some(0), "{s}");
        let rep = report(&out);
        assert!(all_pass(&rep), "{s}: {rep}");
        let ap = rep["results"].as_array().unwrap().iter().find(|r| r["check"] == "selfdual.aperture").unwrap();
        assert!((ap["details"]["radians"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }
}

#[test]
fn dimension_guard() {
    let out = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(["dual", "-i", &data("orthant3.json")])
        .env("CONELAB_MAX_DIM", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CONELAB_MAX_DIM"));

    let out = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(["tensor", "-a", &data("orthant3.json"), "-b", &data("orthant3.json")])
        .env("CONELAB_MAX_DIM", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn text_format() {
    let out = conelab(&["dual", "-i", &data("orthant3.json"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("conelab dual"));
    assert!(text.contains("PASS     dual.biduality"));
    assert!(text.contains("summary: 2 pass, 0 fail, 0 unknown"));
}

#[test]
fn operator_membership_verdicts() {
    let s = data("intrinsic2.json");
    let yes = conelab(&["osys", "member", "-s", &s, "-x", &data("e11.json")]);
    assert_eq!(yes.status.code(), Some(0));
    let no = conelab(&["osys", "member", "-s", &s, "-x", &data("neg_e11.json")]);
    assert_eq!(no.status.code(), Some(1));
    assert_eq!(status(&report(&no), "osys.member"), "FAIL");
}

#[test]
fn operator_dual_and_tensor() {
    let out = conelab(&["osys", "dual", "-s", &data("intrinsic2.json")]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["output"]["system"]["generators"].as_array().unwrap().len(), 1);

    let d = data("diag2.json");
    for kind in ["min", "max"] {
        let out = conelab(&["osys", "tensor", "-a", &d, "-b", &d, "--kind", kind]);
        assert_eq!(out.status.code(), Some(0), "{kind}");
        assert_eq!(report(&out)["output"]["system"]["space_dim"], 4);
    }
}

#[test]
fn p_checks() {
    let out = conelab(&["verify-p", "--random", "12", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["summary"]["pass"], 36);
    let out = conelab(&["verify-p", "-i", &data("diag2.json")]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn operator_selfdualize_keeps_input() {
    let out = conelab(&["osys", "selfdualize", "-s", &data("diag2.json")]);
    assert_ne!(out.status.code(), Some(2));
    let rep = report(&out);
    assert_eq!(status(&rep, "osys.selfdual.contains_input"), "PASS");
    assert_eq!(status(&rep, "osys.selfdual.invariant"), "PASS");
}

#[test]
fn operator_family_min_gate() {
    let out = conelab(&["construct-tp", "-f", &data("unit_operator.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(status(&report(&out), "tp.min_gate"), "PASS");
}
