use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

fn anesthesia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anesthesia")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenario(dir: &TempDir, name: &str, json: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn list_patients_prints_thirteen_rows() {
    let o = anesthesia(&["list-patients"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 14);
    assert!(text.contains("1\t40\t163\t54\tF\t6.33\t2.24\t98.8\t94.10\n"));
    let csv = stdout(&anesthesia(&["list-patients", "--format", "csv"]));
    assert!(csv.starts_with("id,age,height_cm,weight_kg,sex,ce50,gamma,e0,emax\n"));
}

#[test]
fn simulate_writes_csv_plot_and_report() {
    let dir = TempDir::new().unwrap();
    let s = scenario(&dir, "s.json", r#"{"patient_id":13,"duration_min":10}"#);
    let out = dir.path().join("t.csv");
    let plot = dir.path().join("p.svg");
    let o = anesthesia(&["simulate", "--scenario", &s, "--out", out.to_str().unwrap(), "--plot", plot.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 601);
    let svg = fs::read_to_string(&plot).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert!(stdout(&o).contains("\"induction_time\""));

    let again = anesthesia(&["simulate", "--scenario", &s]);
    assert_eq!(stdout(&again), csv);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"patient_id":14}"#, 2),
        (r#"{"step_min":0}"#, 2),
        (r#"{"bogus":1}"#, 2),
        ("not json", 2),
        (r#"{"pk_preset":"Uncorrected"}"#, 3),
        (r#"{"duration_min":2,"tf1":0,"disturbance":[{"start_min":1,"duration_min":1,"amplitude":-100}],"controller":{"tf1_min":0}}"#, 2),
        (r#"{"duration_min":2,"disturbance":[{"start_min":1,"duration_min":1,"amplitude":-100}],"controller":{"tf1_min":0}}"#, 4),
    ];
    for (i, (json, code)) in cases.iter().enumerate() {
        let s = scenario(&dir, &format!("s{i}.json"), json);
        let o = anesthesia(&["simulate", "--scenario", &s]);
        assert_eq!(o.status.code(), Some(*code), "{json}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let missing = anesthesia(&["simulate", "--scenario", "/nonexistent/file.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(anesthesia(&["open-loop", "--patient", "14", "--rate", "1", "--duration", "1"]).status.code(), Some(2));
    assert_eq!(
        anesthesia(&["open-loop", "--patient", "13", "--rate", "1", "--duration", "1", "--preset", "uncorrected"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(anesthesia(&["tune-tf2", "--grid", "5:1:1"]).status.code(), Some(2));
}

#[test]
fn open_loop_leaves_controller_columns_blank() {
    let o = anesthesia(&["open-loop", "--patient", "13", "--rate", "10", "--duration", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 61);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 12);
        for i in [3, 9, 10, 11] {
            assert!(f[i].is_empty());
        }
        assert_eq!(f[4], "10");
    }
}

#[test]
fn cohort_table_is_id_ordered() {
    let dir = TempDir::new().unwrap();
    let s = scenario(&dir, "s.json", r#"{"duration_min":5}"#);
    let o = anesthesia(&["cohort", "--scenario", &s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let ids: Vec<u32> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ids, (1..=13).collect::<Vec<_>>());
    let json = stdout(&anesthesia(&["cohort", "--scenario", &s, "--format", "json"]));
    assert!(json.trim_start().starts_with('['));
}

#[test]
fn curve_for_one_and_all() {
    let one = stdout(&anesthesia(&["curve", "--patient", "13", "--points", "5"]));
    assert_eq!(one.lines().count(), 6);
    assert!(one.lines().nth(1).unwrap().starts_with("13,0,93.1"));
    let all = stdout(&anesthesia(&["curve", "--patient", "all", "--points", "5"]));
    assert_eq!(all.lines().count(), 1 + 13 * 5);
    assert_eq!(anesthesia(&["curve", "--patient", "x"]).status.code(), Some(2));
}

#[test]
fn small_tuning_sweep() {
    let dir = TempDir::new().unwrap();
    let plot = dir.path().join("d.svg");
    let o = anesthesia(&["tune-tf2", "--grid", "0:1:0.5", "--threshold", "10", "--plot", plot.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tf2_min,d"));
    assert_eq!(lines.next(), Some("0,0"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("selected tf2 = 1"));
    assert!(fs::read_to_string(plot).unwrap().contains("<polyline"));
}
