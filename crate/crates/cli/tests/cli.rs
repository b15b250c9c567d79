use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const GROWTH: &str = r#"{"model":"pawlina-kort","params":{"r":0.1,"mu":0.08,"sigma":0.2,"D00":0,"D01":0,"D10":2.5,"D11":1,"I1":1,"I2":1}}"#;
// r=0.08, mu=0.02, sigma=0.2 with xF1 = 120 and d = 0.6.
const BOX: &str = r#"{"model":"pawlina-kort","params":{"r":0.08,"mu":0.02,"sigma":0.2,"D00":0.4,"D01":0,"D10":1.5,"D11":1,"I1":1000,"I2":1000}}"#;
const GREN: &str = r#"{"model":"grenadier","params":{"r":0.08,"mu":0.02,"sigma":0.2,"delta":0,"R":0.08,"gamma":0.5,"I":1,"D1":2,"D2":1}}"#;

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn model(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

fn preempt(args: &[&str], model: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preempt"))
        .args(args)
        .arg("--model")
        .arg(model)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (head, rows)
}

fn f(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

#[test]
fn box_model_follower_threshold() {
    let d = Dir::new();
    let v = json(&preempt(&["thresholds"], &d.model("m.json", BOX)));
    assert_eq!(v["xF1"].as_f64().unwrap(), 120.0);
    assert_eq!(v["beta1"].as_f64().unwrap(), 2.0);
}

#[test]
fn growth_case_beta_matches_quadratic_formula() {
    let d = Dir::new();
    let v = json(&preempt(&["thresholds"], &d.model("m.json", GROWTH)));
    let (r, mu, s2) = (0.1f64, 0.08f64, 0.04f64);
    let a = 0.5 - mu / s2;
    let beta1 = a + (a * a + 2.0 * r / s2).sqrt();
    let got = v["beta1"].as_f64().unwrap();
    assert!((got - beta1).abs() < 1e-11, "{got} vs {beta1}");
    assert!((got - 1.192582).abs() < 1e-6);
}

#[test]
fn no_follower_gain_prints_inf() {
    let d = Dir::new();
    let m = d.model(
        "m.json",
        r#"{"model":"pawlina-kort","params":{"r":0.1,"mu":0.08,"sigma":0.2,"D00":1,"D01":1,"D10":2.5,"D11":1,"I1":1,"I2":1}}"#,
    );
    let out = stdout(&preempt(&["thresholds"], &m));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["xF1"], "inf");
    assert_eq!(v["xF2"], "inf");
}

#[test]
fn input_errors_exit_2() {
    let d = Dir::new();
    let unknown = d.model(
        "u.json",
        r#"{"model":"pawlina-kort","params":{"r":0.1,"mu":0.08,"sigma":0.2,"D00":0,"D01":0,"D10":2.5,"D11":1,"I1":1,"I2":1,"x0":3}}"#,
    );
    assert_eq!(code(&preempt(&["thresholds"], &unknown)), 2);
    assert_eq!(code(&preempt(&["classify"], &d.0.path().join("missing.json"))), 2);
    let bad_order = d.model("o.json", &GROWTH.replace("\"D10\":2.5", "\"D10\":0.5"));
    assert_eq!(code(&preempt(&["classify"], &bad_order)), 2);
    let m = d.model("m.json", GROWTH);
    assert_eq!(code(&preempt(&["curves", "--grid", "0.2:0.1:5"], &m)), 2);
    assert_eq!(code(&preempt(&["curves", "--grid", "0.1:0.2:1"], &m)), 2);
    assert_eq!(code(&preempt(&["sweep", "--sweep", "zeta=0:1:5"], &m)), 2);
    // xJ outside [xF2, xM1].
    assert_eq!(code(&preempt(&["joint", "--xj", "1000"], &d.model("b.json", BOX))), 2);
}

#[test]
fn inapplicable_premises_exit_3() {
    let d = Dir::new();
    let gren = d.model("g.json", GREN);
    assert_eq!(code(&preempt(&["joint"], &gren)), 3);
    assert_eq!(code(&preempt(&["seq"], &gren)), 3);
    assert_eq!(code(&preempt(&["grenadier"], &d.model("m.json", GROWTH))), 3);
    // Small leader advantage: xL1 >= xF2, so no sequential equilibrium to test.
    let flat = d.model("f.json", &BOX.replace("\"D00\":0.4", "\"D00\":0.9").replace("\"D10\":1.5", "\"D10\":1.01"));
    let th = json(&preempt(&["thresholds"], &flat));
    assert!(th["xL1"].as_f64().unwrap() >= th["xF2"].as_f64().unwrap());
    let o = preempt(&["seq"], &flat);
    assert_eq!(code(&o), 3);
    assert!(!o.stderr.is_empty());
}

#[test]
fn grenadier_report() {
    let d = Dir::new();
    let v = json(&preempt(&["grenadier"], &d.model("g.json", GREN)));
    for k in ["x_f", "x_l", "no_delay", "gamma_bound_printed", "gamma_bound_derived", "joint_avoidance"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
}

#[test]
fn curves_meet_at_follower_threshold() {
    let d = Dir::new();
    let m = d.model("m.json", GROWTH);
    let xf2 = json(&preempt(&["thresholds"], &m))["xF2"].as_f64().unwrap();
    let grid = format!("0.001:{xf2}:400");
    let (head, rows) = csv(&stdout(&preempt(&["curves", "--grid", &grid], &m)));
    assert_eq!(head, ["x", "L1", "F1", "M1", "L2", "F2", "M2", "in_preemption"]);
    assert_eq!(rows.len(), 400);
    let last = rows.last().unwrap();
    let (l2, f2, m2) = (f(&last[4]), f(&last[5]), f(&last[6]));
    assert!((l2 - f2).abs() <= 1e-10 * l2.abs() && (l2 - m2).abs() <= 1e-10 * l2.abs());

    // The flag agrees with L2 > F2 away from the region's edges, and the
    // ones form a single run.
    let flags: Vec<bool> = rows.iter().map(|r| r[7] == "1").collect();
    for r in &rows {
        let h = f(&r[4]) - f(&r[5]);
        if h.abs() > 1e-9 {
            assert_eq!(r[7] == "1", h > 0.0, "{r:?}");
        }
    }
    let runs = (0..flags.len()).filter(|&i| flags[i] && (i == 0 || !flags[i - 1])).count();
    assert_eq!(runs, 1);
}

#[test]
fn sweep_reproduces_joint_failure() {
    let d = Dir::new();
    let m = d.model("m.json", BOX);
    let (head, rows) = csv(&stdout(&preempt(&["sweep", "--sweep", "c=0.05:1:20"], &m)));
    assert_eq!(head, ["c", "bar_x", "x_hat", "xL1", "xF2", "xM1", "joint_exists", "seq_exists"]);
    assert_eq!(rows.len(), 20);
    for r in &rows {
        let c = f(&r[0]);
        // xL1 = xF1/(c + d) with xF1 = 120, d = 0.6.
        assert!((f(&r[3]) - 120.0 / (c + 0.6)).abs() < 1e-8, "{r:?}");
        if r[2] != "na" {
            assert!(f(&r[2]) <= f(&r[3]) * (1.0 + 1e-12), "{r:?}");
        }
    }
    let (_, at) = csv(&stdout(&preempt(&["sweep", "--sweep", "c=0.45:0.5:2"], &m)));
    assert_eq!(at[0][6], "false");
}

#[test]
fn verify_passes_and_coarse_lattice_fails() {
    let d = Dir::new();
    let m = d.model("m.json", GROWTH);
    let v = json(&preempt(&["verify", "--paths", "4000", "--seed", "3"], &m));
    assert_eq!(v["passed"], true);
    assert_eq!(v["deviation"]["violations"].as_array().unwrap().len(), 0);

    let o = preempt(&["verify", "--steps", "10", "--paths", "1000"], &m);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn outputs_are_deterministic() {
    let d = Dir::new();
    let m = d.model("m.json", GROWTH);
    let b = d.model("b.json", BOX);
    let runs = [
        (vec!["verify", "--paths", "2000", "--steps", "500", "--seed", "9"], &m),
        (vec!["sweep", "--sweep", "c=0.05:1:50"], &b),
        (vec!["classify"], &b),
    ];
    for (args, model) in runs {
        let a = preempt(&args, model);
        let z = preempt(&args, model);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, z.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_same_bytes() {
    let d = Dir::new();
    let m = d.model("m.json", BOX);
    let path = d.0.path().join("o.csv");
    let direct = stdout(&preempt(&["sweep", "--sweep", "c=0.05:1:7"], &m));
    let o = preempt(&["sweep", "--sweep", "c=0.05:1:7", "--out", path.to_str().unwrap()], &m);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
}
