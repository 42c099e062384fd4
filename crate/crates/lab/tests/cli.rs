use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fillvol(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fillvol")).args(args).current_dir(dir).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn generate_slice_fv_witness_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = fillvol(&["generate", "--model", "jump", "--n", "3", "--num", "40", "--seed", "11", "--out", "p.json"], d);
    assert!(gen.status.success());
    let poly: Value = serde_json::from_str(&std::fs::read_to_string(d.join("p.json")).unwrap()).unwrap();
    assert_eq!(poly["cells"].as_array().unwrap().len(), 40);

    let slice = json(&fillvol(&["slice", "p.json", "--axes", "0", "--at", "0.5", "--out", "s.json"], d).then_read(d, "s.json"));
    let net: i64 = slice["points"].as_array().unwrap().iter().map(|p| p["sign"].as_i64().unwrap()).sum();
    assert_eq!(net, 0);

    let fv = json(&fillvol(&["fv", "s.json"], d));
    let flow = json(&fillvol(&["fv", "s.json", "--method", "flow"], d));
    assert_eq!(fv["fv"], flow["fv"]);
    let total: f64 = fv["plan"]["total_cost"].as_f64().unwrap();
    assert!((total - fv["fv"].as_f64().unwrap()).abs() < 1e-9);

    let w = json(&fillvol(&["witness", "s.json", "--atoms"], d));
    assert!(w["bound"].as_f64().unwrap() <= fv["fv"].as_f64().unwrap() + 1e-9);
    assert!(w["atoms"].is_array());
    let g = json(&fillvol(&["witness", "s.json", "--kind", "grid", "--cells", "4"], d));
    assert!(g["bound"].as_f64().unwrap() <= fv["fv"].as_f64().unwrap() + 1e-9);
}

trait ThenRead {
    fn then_read(self, dir: &Path, file: &str) -> Output;
}

impl ThenRead for Output {
    // turns a command that wrote `file` into one whose stdout is that file
    fn then_read(mut self, dir: &Path, file: &str) -> Output {
        if self.status.success() {
            self.stdout = std::fs::read(dir.join(file)).unwrap();
        }
        self
    }
}

#[test]
fn interval_and_winding_methods() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("z.json"), r#"{"ambient":{"cube":1},"points":[{"pos":[0.2],"sign":1},{"pos":[0.9],"sign":-1}]}"#).unwrap();
    for m in ["auto", "interval", "flow", "brute"] {
        let v = json(&fillvol(&["fv", "z.json", "--method", m], d));
        assert!((v["fv"].as_f64().unwrap() - 0.3).abs() < 1e-12, "{m}");
    }
    let square = r#"{"n":2,"k":1,"cells":[
        {"verts":[[0.25,0.25],[0.75,0.25]],"coef":1},{"verts":[[0.75,0.25],[0.75,0.75]],"coef":1},
        {"verts":[[0.75,0.75],[0.25,0.75]],"coef":1},{"verts":[[0.25,0.75],[0.25,0.25]],"coef":1}]}"#;
    std::fs::write(d.join("sq.json"), square).unwrap();
    let v = json(&fillvol(&["fv", "sq.json", "--method", "winding", "--h", "0.0078125"], d));
    assert!((v["fv"].as_f64().unwrap() - 0.25).abs() <= 4.0 * 0.0078125);
    assert!(v["error_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn sphere_family_slices_into_antipodal_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(fillvol(&["generate", "--model", "spheres", "--n", "3", "--k", "1", "--num", "6", "--out", "u.json"], d).status.success());
    let z = json(&fillvol(&["slice", "u.json", "--seed", "5", "--out", "z.json"], d).then_read(d, "z.json"));
    let pts = z["points"].as_array().unwrap();
    assert_eq!(pts.len(), 12);
    assert_eq!(z["ambient"]["sphere"], 2);
    let v = json(&fillvol(&["fv", "z.json"], d));
    assert!(v["fv"].as_f64().unwrap() > 0.0);
}

#[test]
fn experiment_run_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = r#"{"model":"iid0cycle","n":1,"N_grid":[16,32,64],"trials":4,"master_seed":3}"#;
    std::fs::write(d.join("c.json"), cfg).unwrap();
    let run = fillvol(&["experiment", "run", "c.json", "--out", "rows.csv", "--fits", "fits.json"], d);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(d.join("rows.csv")).unwrap();
    assert!(csv.starts_with("model,n,k,N,trial,seed,observable,value\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 4 * 3);

    let again = fillvol(&["experiment", "run", "c.json"], d);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), csv);

    let fits = json(&fillvol(&["experiment", "fit", "rows.csv"], d));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(d.join("fits.json")).unwrap()).unwrap();
    assert_eq!(fits, written);
    let names: Vec<&str> = fits.as_array().unwrap().iter().map(|f| f["observable"].as_str().unwrap()).collect();
    assert_eq!(names, ["fv", "mass_f0", "witness_bound"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"model":"iid0cycle","n":2,"N_grid":[],"trials":1,"master_seed":0}"#).unwrap();
    assert_eq!(fillvol(&["experiment", "run", "bad.json"], d).status.code(), Some(2));
    assert_eq!(fillvol(&["fv", "missing.json"], d).status.code(), Some(2));
    assert_eq!(fillvol(&["generate", "--model", "jump", "--n", "3", "--num", "2"], d).status.code(), Some(2));
    assert_eq!(fillvol(&["bogus"], d).status.code(), Some(2));

    // a line parallel to the slicing line stays degenerate under every retry
    std::fs::write(d.join("line.json"), r#"{"planes":[{"basis":[[1.0,0.0]],"offset":[0.0,0.3]}]}"#).unwrap();
    let out = fillvol(&["slice", "line.json", "--axes", "1", "--at", "0.4"], d);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
