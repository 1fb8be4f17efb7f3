use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use ssqw_core::analytic::transfer_eigenvalues;
use ssqw_core::model::load_setup;
use ssqw_core::Sign;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn ssqw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssqw")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn index_of_e1() {
    let o = ssqw(&["index", "--profile", &fixture("e1.json")]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["fredholm"], true);
    assert_eq!(v["d_plus"], 1);
    assert_eq!(v["d_minus"], 0);
    assert_eq!(v["index"], 1);
    assert_eq!(v["coin_type"], "III");
    assert_eq!(v["near_boundary"], false);
}

#[test]
fn index_at_zero_p() {
    let o = ssqw(&["index", "--profile", &fixture("zero_p.json")]);
    assert!(o.status.success());
    assert_eq!(json(&o)["index"], 0);
}

#[test]
fn index_on_the_boundary() {
    let o = ssqw(&["index", "--profile", &fixture("boundary.json")]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["fredholm"], false);
    assert_eq!(v["reason"], "|p| = |a(L)|");
    assert!(v.get("index").is_none());
}

#[test]
fn perturbed_profile_matches_step_reduction() {
    let a = json(&ssqw(&["index", "--profile", &fixture("e1_perturbed.json")]));
    let b = json(&ssqw(&["index", "--profile", &fixture("e1.json")]));
    assert_eq!(a["index"], b["index"]);
    assert_eq!(a["fredholm"], b["fredholm"]);
}

#[test]
fn invalid_profile_exits_2() {
    let o = ssqw(&["index", "--profile", &fixture("invalid.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("left limit"));
    let o = ssqw(&["index", "--profile", "/nonexistent/profile.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_round_trips_byte_identically() {
    for args in [
        vec!["index", "--profile", "e1.json"],
        vec!["index", "--profile", "boundary.json"],
        vec!["trace", "--profile", "e1.json", "--window", "40", "--format", "json"],
        vec!["bound-state", "--profile", "e1.json", "--window", "30", "--format", "json"],
        vec!["phase-diagram", "--profile", "e1.json", "--p-grid", "-0.9:0.9:0.3", "--format", "json"],
    ] {
        let args: Vec<String> =
            args.iter().map(|a| if a.ends_with(".json") { fixture(a) } else { a.to_string() }).collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = ssqw(&args);
        assert!(o.status.success(), "{args:?}");
        let text = stdout(&o);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap() + "\n", text);
    }
}

fn phase_rows(profile: &str, grid: &str) -> Vec<Vec<String>> {
    let o = ssqw(&["phase-diagram", "--profile", &fixture(profile), "--p-grid", grid]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,fredholm,d_plus,d_minus,index,near_boundary"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn phase_diagram_of_e1_coins() {
    let rows = phase_rows("e1.json", "-0.99:0.99:0.01");
    assert_eq!(rows.len(), 199);
    for r in rows {
        let p: f64 = r[0].parse().unwrap();
        let fredholm = r[1] == "true";
        assert_eq!(fredholm, p != 0.0 && p.abs() != 0.8, "p = {p}");
        if !fredholm {
            assert_eq!(&r[4], "NA");
            continue;
        }
        let expected = if p > 0.0 && p < 0.8 {
            1
        } else if p < 0.0 && p > -0.8 {
            -1
        } else {
            0
        };
        assert_eq!(r[4].parse::<i32>().unwrap(), expected, "p = {p}");
        let (dp, dm): (i32, i32) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert_eq!(dp - dm, expected);
    }
}

#[test]
fn phase_diagram_flags_the_band() {
    let o = ssqw(&["phase-diagram", "--profile", &fixture("e1.json"), "--p-grid", "0.79:0.81:0.01", "--band", "0.02"]);
    let text = stdout(&o);
    let flags: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(flags, ["true", "true", "true"]);
}

#[test]
fn phase_diagram_of_type_i_is_zero() {
    for r in phase_rows("type_i.json", "-0.9:0.9:0.1") {
        assert_eq!(r[1], "true");
        assert_eq!(r[4], "0");
    }
}

#[test]
fn phase_diagram_rejects_bad_grid() {
    let o = ssqw(&["phase-diagram", "--profile", &fixture("e1.json"), "--p-grid", "-1.2:0.5:0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_of_homogeneous_walk() {
    let o = ssqw(&["spectrum", "--profile", &fixture("homogeneous.json"), "--window", "64"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im"));
    let mut count = 0;
    for l in lines {
        let re: f64 = l.split(',').next().unwrap().parse().unwrap();
        assert!(re.abs() <= 0.8660254037844387 + 1e-6);
        count += 1;
    }
    assert_eq!(count, 2 * 129);
}

#[test]
fn spectrum_needs_periodic_window() {
    let o = ssqw(&["spectrum", "--profile", &fixture("homogeneous.json"), "--window", "8", "--boundary", "open"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_of_e1() {
    let o = ssqw(&["trace", "--profile", &fixture("e1.json"), "--window", "150"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,estimate");
    assert_eq!(rows.len(), 5);
    let last: f64 = rows[4].split(',').nth(1).unwrap().parse().unwrap();
    assert!((last - 1.0).abs() < 0.1);
}

#[test]
fn bound_state_decay_of_e1() {
    let o = ssqw(&["bound-state", "--profile", &fixture("e1.json"), "--window", "60", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    let setup = load_setup(&std::fs::read_to_string(fixture("e1.json")).unwrap()).unwrap();
    let zl = transfer_eigenvalues(&setup.params, &setup.profile.left, Sign::Plus).unwrap().z(2).norm();
    let zr = transfer_eigenvalues(&setup.params, &setup.profile.right, Sign::Plus).unwrap().z(2).norm();
    let fit = &v["fitted_decay_rates"];
    assert!((fit[0].as_f64().unwrap() - 1.0 / zl).abs() < 1e-3);
    assert!((fit[1].as_f64().unwrap() - zr).abs() < 1e-3);
    assert_eq!(v["samples"].as_array().unwrap().len(), 121);

    let o = ssqw(&["bound-state", "--profile", &fixture("e1.json"), "--window", "20", "--sign", "minus"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "x,re,im\n");
}

#[test]
fn bound_state_csv_with_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.csv");
    let o = ssqw(&["bound-state", "--profile", &fixture("type_i.json"), "--window", "5", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "x,re,im");
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[6], "0,1,0");
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = ssqw(&["verify", "--window", "24", "--seed", "1"]);
    assert!(a.status.success(), "{}", stdout(&a));
    let b = ssqw(&["verify", "--window", "24", "--seed", "1"]);
    assert_eq!(a.stdout, b.stdout);
    let c = ssqw(&["verify", "--window", "24", "--seed", "2", "--format", "json"]);
    assert!(c.status.success());
    let verdicts: Vec<bool> = json(&c).as_array().unwrap().iter().map(|x| x["pass"].as_bool().unwrap()).collect();
    assert!(verdicts.iter().all(|&p| p));
}

#[test]
fn verify_catches_injected_fault() {
    let o = ssqw(&["verify", "--window", "16", "--inject-fault", "beta-sign"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.starts_with("algebra,false")));
}

#[test]
fn thread_cap_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_ssqw"))
        .args(["index", "--profile", &fixture("e1.json")])
        .env("SSQW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ssqw"))
        .args(["index", "--profile", &fixture("e1.json")])
        .env("SSQW_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}
