use std::path::Path;
use std::process::Command;

use koblab::run::ReportBundle;
use koblab::{parse_plan, render_bundle};

const BIN: &str = env!("CARGO_BIN_EXE_koblab");

fn write_plan(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn koblab(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

const ADDITIVE: &str = r#"{"domain":{"kind":"unitdisc","params":{},"dimension":1},"experiment":"additive",
  "points":{"p":[1]},"radii":{"U":0.6,"V":0.3},"grid":{"h":0.05},"sequences":{"samples":40},"seed":42}"#;

const VIOLATED: &str = r#"{"domain":{"kind":"puncturedexample","params":{},"dimension":2},"experiment":"hyperbolicity",
  "points":{"p":[0,0]},"radii":{"U":0.5,"V":0.25},
  "sequences":{"z":[[0.01,0],[0.0001,0]],"w":[[0.01,10],[0.0001,100]]},"seed":1}"#;

#[test]
fn thread_count_does_not_change_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = write_plan(tmp.path(), "plan.json", ADDITIVE);
    let mut runs = Vec::new();
    for (k, threads) in ["1", "3", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("out{k}"));
        let o = koblab(&[
            "additive",
            "--plan",
            plan.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(files(&out));
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["additive-42-0.csv", "summary.json"]);
}

#[test]
fn csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = write_plan(tmp.path(), "plan.json", ADDITIVE);
    let out = tmp.path().join("o");
    assert!(koblab(&["additive", "--plan", plan.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let csv = std::fs::read_to_string(out.join("additive-42-0.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "pair_id,z,w,dist_full_upper,dist_local_upper,gap_of_uppers,stratum");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    // nine significant digits: d.dddddddde±x
    let mantissa = row[3].split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').len(), 10, "{}", row[3]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["reports"][0]["file"], "additive-42-0.csv");
    assert_eq!(summary["plan"]["grid"]["m"], 4);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let violated = write_plan(dir, "v.json", VIOLATED);
    let out = dir.join("o");
    let args = ["hyperbolicity", "--plan", violated.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(koblab(&args).status.code(), Some(1));
    let mut allowed = args.to_vec();
    allowed.push("--allow-violations");
    assert_eq!(koblab(&allowed).status.code(), Some(0));

    let bad = write_plan(
        dir,
        "bad.json",
        r#"{"domain":{"kind":"unitdisc","dimension":1},"experiment":"sarkar","points":{"p":[1]},"radii":{"U":0.3,"V":0.6},"seed":1}"#,
    );
    let o = koblab(&["sarkar", "--plan", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radii.V"));

    let o = koblab(&["sarkar", "--plan", violated.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "experiment mismatch");
    let o = koblab(&["nonsense", "--plan", violated.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // output directory path occupied by a file
    let blocker = write_plan(dir, "blocker", "x");
    let o = koblab(&[
        "hyperbolicity",
        "--plan",
        violated.to_str().unwrap(),
        "--out",
        blocker.to_str().unwrap(),
        "--allow-violations",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("i/o error"));
}

#[test]
fn disc_distance_bundle() {
    let plan = parse_plan(
        r#"{"domain":{"kind":"unitdisc","params":{},"dimension":1},"experiment":"distance","points":{"z":[0],"w":[0.5]},"seed":2}"#,
    )
    .unwrap();
    let b = koblab::run_plan(&plan, Default::default()).unwrap();
    let r = b.report("distance").unwrap();
    let exact = 0.5 * 3f64.ln();
    let g = r.statistic("graph_distance_upper").unwrap();
    assert!((g - exact).abs() <= 0.03 * exact, "{g}");
    assert!(r.statistic("distance_lower").unwrap() <= exact + 1e-12);
    assert!(r.statistic("distance_upper").unwrap() >= exact - 1e-12);
}

#[test]
fn empty_bundle_is_summary_only() {
    let plan = parse_plan(
        r#"{"domain":{"kind":"unitdisc","params":{},"dimension":1},"experiment":"distance","points":{"z":[0],"w":[0.5]},"seed":2}"#,
    )
    .unwrap();
    let b = ReportBundle { plan, graphs: vec![], reports: vec![], visibility: vec![], curves: vec![] };
    let files = render_bundle(&b);
    assert_eq!(files.len(), 1);
    assert_eq!(files[0].name, "summary.json");
}
