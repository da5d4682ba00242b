use std::path::Path;
use std::process::Command;

fn eulerflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eulerflow"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn example_scenario_reports_cone_torus_and_no_idempotents() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let sc = write(
        tmp.path(),
        "s.json",
        r#"{"algebra":"sl2c","ainv":"paper-example-sl2c","tasks":["analyze"],"seed":1}"#,
    );
    let status = eulerflow().arg("analyze").arg(&sc).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"]["status"], "Complete_certified");
    assert_eq!(r["idempotents"]["points"].as_array().unwrap().len(), 0);
    let x3 = &r["cones"]["abs_coordinate_range"][2];
    for v in x3.as_array().unwrap() {
        assert!((v.as_f64().unwrap() - 0.4_f64.sqrt()).abs() < 1e-8);
    }
    let csv = std::fs::read_to_string(out.join("cone_samples.csv")).unwrap();
    assert!(csv.starts_with("x1,x2,x3,y1,y2,y3,transversal\n"));
}

#[test]
fn same_seed_gives_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write(
        tmp.path(),
        "s.json",
        r#"{"algebra":"sl2c","ainv":"spacelike-d-positive-spiral","tasks":["analyze","integrate"],
            "seed":9,"integrate_opts":{"random_count":3,"horizon":3}}"#,
    );
    for d in ["a", "b"] {
        let status = eulerflow().arg("analyze").arg(&sc).arg("--out").arg(tmp.path().join(d)).status().unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for f in ["report.json", "traj_000.csv", "traj_002.csv", "cone_samples.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
    let r = report(&tmp.path().join("a"));
    assert_eq!(r["verdict"]["status"], "Incomplete_certified");
    assert_eq!(r["verdict"]["witness"]["kind"], "gcs");
    let traj = std::fs::read_to_string(tmp.path().join("a/traj_000.csv")).unwrap();
    assert!(traj.starts_with("t,c0,c1,c2,c3,c4,c5,drift_gstar,drift_tr2,drift_tr3,drift_Kz\n"));
}

#[test]
fn input_errors_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, text) in [
        "{ not json",
        r#"{"algebra":"sl2c","ainv":[1,2,3]}"#,
        r#"{"algebra":"sl2r","ainv":"no-such-preset"}"#,
        r#"{"algebra":"sl2r","ainv":[1,0,0,0,1,0,0,0,2],"integrate_opts":{"horizon":0}}"#,
    ]
    .iter()
    .enumerate()
    {
        let sc = write(tmp.path(), &format!("bad{i}.json"), text);
        let out = tmp.path().join(format!("out{i}"));
        let status = eulerflow().arg("analyze").arg(&sc).arg("--out").arg(&out).status().unwrap();
        assert_eq!(status.code(), Some(2), "{text}");
        assert!(!out.join("report.json").exists());
    }
    let status = eulerflow().arg("analyze").arg(tmp.path().join("missing.json")).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn empty_task_list_writes_empty_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let sc = write(
        tmp.path(),
        "s.json",
        &format!(
            r#"{{"algebra":"sl2r","ainv":"sl2r-semisimple-killing","tasks":[],"output_dir":{:?}}}"#,
            out.to_str().unwrap()
        ),
    );
    let status = eulerflow().arg("analyze").arg(&sc).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let r = report(&out);
    assert!(r.get("verdict").is_none() && r.get("trajectories").is_none());
    assert_eq!(r["errors"].as_array().unwrap().len(), 0);
    assert!(!out.join("report.json.tmp").exists());
}

#[test]
fn reproduce_filter_runs_only_matching_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let out = eulerflow()
        .args(["reproduce-paper", "--filter", "killing-solver", "--seed", "3", "--out"])
        .arg(tmp.path())
        .env("EULERFLOW_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 1);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("reproduce.json")).unwrap()).unwrap();
    assert_eq!(json["criteria"][0]["id"], 5);
}
