use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doublet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    if out.stdout.is_empty() {
        return Value::Null;
    }
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn polylines(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.lines()
        .filter(|l| l.contains("<polyline"))
        .map(|l| {
            let start = l.find("points=\"").unwrap() + 8;
            let end = start + l[start..].find('"').unwrap();
            l[start..end]
                .split(' ')
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect()
        })
        .collect()
}

#[test]
fn symmetric_solve() {
    let doc = json(&["solve-volumes", "--tensions", "1,1,1", "--volumes", "0.5,0.5", "--verify"]);
    let alpha = floats(&doc["configuration"]["alpha_deg"]);
    for (a, b) in alpha.iter().zip([-120.0, 120.0, 0.0]) {
        assert!((a - b).abs() < 1e-9, "{alpha:?}");
    }
    assert_eq!(doc["regime"], "interior");
    assert_eq!(doc["global"], "interior");
}

#[test]
fn numbers_carry_seventeen_digits() {
    let out = run(&["solve-volumes", "--tensions", "1,1,1", "--volumes", "0.5,0.5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"energy\"")).unwrap();
    let num = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = num.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{num}");
}

#[test]
fn internalized_solve() {
    let doc = json(&["solve-volumes", "--tensions", "3,1,1", "--volumes", "0.5,0.5", "--verify"]);
    assert_eq!(doc["regime"], "internalize-1");
    assert_eq!(doc["configuration"]["surface"], "u1");
    assert_eq!(doc["configuration"]["h"].as_f64(), Some(0.0));
}

#[test]
fn line_tension_solve() {
    let doc = json(&[
        "solve-line", "--tensions", "5,6,4", "--kappa", "1", "--volumes", "0.75,0.25", "--verify",
    ]);
    assert_eq!(doc["local_minima"].as_u64(), Some(1));
    assert_eq!(doc["boundary"].as_array().unwrap().len(), 3);
    let minima: Vec<&Value> = doc["critical_points"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["classification"] == "local-min")
        .collect();
    let z = floats(&minima[0]["z"]);
    assert!((z[0] + 2.9276878).abs() < 1e-6 && (z[1] - 1.7051784).abs() < 1e-6);
}

#[test]
fn solve_line_requires_kappa() {
    let out = run(&["solve-line", "--tensions", "1,1,1", "--volumes", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pressure_solve() {
    let doc = json(&["solve-pressures", "--tensions", "1,1,1", "--pressures", "1,1", "--verify"]);
    let x = floats(&doc["configuration"]["x"]);
    for (a, b) in x.iter().zip([-3.0, 3.0, 0.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    let h = doc["configuration"]["h"].as_f64().unwrap();
    assert!((h - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn pressure_triangle_violation() {
    let out = run(&["solve-pressures", "--tensions", "1,1,3", "--pressures", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_inputs_exit_two() {
    for args in [
        &["solve-volumes", "--tensions", "1,1", "--volumes", "0.5,0.5"][..],
        &["solve-volumes", "--tensions", "1,1,-1", "--volumes", "0.5,0.5"],
        &["solve-volumes", "--tensions", "1,1,1"],
        &["solve-volumes", "--tensions", "1,1,1", "--volumes", "0.5,0.5", "--pressures", "1,1"],
        &["scan", "--t3", "1", "--volumes", "0.5,0.5", "--n", "1"],
        &["svg"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn volume_pressure_round_trip() {
    let a = json(&["solve-volumes", "--tensions", "2,3,2.5", "--volumes", "0.3,0.9"]);
    let p = floats(&a["configuration"]["pressures"]);
    let ps = format!("{:e},{:e}", p[0], p[1]);
    let b = json(&["solve-pressures", "--tensions", "2,3,2.5", "--pressures", &ps]);
    let (xa, xb) = (floats(&a["configuration"]["x"]), floats(&b["configuration"]["x"]));
    let scale = xa.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (u, v) in xa.iter().zip(&xb) {
        assert!((u - v).abs() <= 1e-8 * scale);
    }
    let (ha, hb) = (
        a["configuration"]["h"].as_f64().unwrap(),
        b["configuration"]["h"].as_f64().unwrap(),
    );
    assert!((ha - hb).abs() <= 1e-8 * scale);
}

#[test]
fn config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{ "tensions": [1, 1, 1], "volumes": [0.2, 0.9], "kappa": 0 }"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let doc = json(&["solve-volumes", "--config", cfg, "--volumes", "0.5,0.5"]);
    assert!((doc["volumes"]["w1"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    let alpha = floats(&doc["configuration"]["alpha_deg"]);
    assert!(alpha[2].abs() < 1e-9);

    fs::write(dir.path().join("bad.json"), r#"{ "tension": [1, 1, 1] }"#).unwrap();
    let bad = dir.path().join("bad.json");
    let out = run(&["solve-volumes", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

fn scan_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn scan_minima_follow_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let p = path.to_str().unwrap();
    let out = run(&["scan", "--t3", "1", "--kappa", "0.1", "--volumes", "0.5,0.5", "--n", "64", "-o", p]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "alpha1,alpha2,t1,t2,y,z3,trace,det,class,bulge1,bulge2,E,E1,E2,E3,global"
    );
    let minima: Vec<(f64, f64)> = scan_rows(&text)
        .iter()
        .filter(|r| r[8] == "local-min")
        .map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    assert!(!minima.is_empty());
    // large tensions only appear close to t1 = t2, within a wedge
    let far: Vec<&(f64, f64)> = minima.iter().filter(|(a, b)| a.max(*b) > 5.0).collect();
    assert!(far.iter().any(|(a, b)| a.max(*b) > 20.0));
    for (a, b) in far {
        let ratio = a.max(*b) / a.min(*b);
        assert!(ratio < 2.0, "t1 = {a}, t2 = {b}");
    }
}

#[test]
fn small_scan_and_determinism() {
    let small = run(&["scan", "--t3", "1", "--kappa", "0.5", "--volumes", "0.5,0.5", "--n", "2"]);
    assert!(small.status.success());
    assert!(scan_rows(&String::from_utf8(small.stdout).unwrap()).len() <= 4);

    let dir = tempfile::tempdir().unwrap();
    let paths = ["a.csv", "b.csv"].map(|n| dir.path().join(n));
    for path in &paths {
        let p = path.to_str().unwrap();
        let out = run(&["scan", "--t3", "1", "--kappa", "0.3", "--volumes", "0.4,0.6", "--n", "48", "-o", p]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn bulge_and_max_bulge() {
    let doc = json(&["bulge-boundary", "--t2", "1.25", "--t3", "1", "--kappa", "0.1", "--volumes", "0.5,0.5"]);
    let t1 = doc["roots"][0]["t1"].as_f64().unwrap();
    assert!((t1 - 0.271244499897851).abs() < 1e-9);
    let doc = json(&["max-bulge-probe"]);
    let phi1 = doc["phi1_deg"].as_f64().unwrap();
    assert!((phi1 - 182.590653).abs() < 1e-3);
    assert_eq!(doc["point"]["classification"], "local-min");
}

#[test]
fn infer_from_angles_and_document() {
    let doc = json(&["infer", "--angles", "120,120,120"]);
    for law in ["sine", "perimeter-sine", "perimeter-cosine", "half-angle", "cotangent"] {
        for t in floats(&doc["laws"][law]["tensions"]) {
            assert!((t - 1.0 / 3.0).abs() < 1e-12, "{law}");
        }
    }
    let out = run(&["infer", "--angles", "120,120,120", "--law", "nope"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let s = sol.to_str().unwrap();
    json(&["solve-volumes", "--tensions", "2,3,4", "--volumes", "0.3,0.9", "-o", s]);
    let doc = json(&["infer", "--input", s]);
    let t = floats(&doc["tensions"]);
    for (a, b) in t.iter().zip([0.5, 0.75, 1.0]) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn oracle_check_agrees() {
    let doc = json(&["oracle-check", "--count", "3", "--seed", "4", "--oracle-n", "100"]);
    assert_eq!(doc["pass"], true);
    let doc = json(&[
        "oracle-check", "--tensions", "2,3,2.5", "--kappa", "0.2", "--volumes", "0.3,0.8",
    ]);
    assert_eq!(doc["pass"], true);
}

fn svg_of(args: &[&str], dir: &Path) -> String {
    let path = dir.join("out.svg");
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    all.extend(["-o", &p]);
    let out = run(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    fs::read_to_string(path).unwrap()
}

#[test]
fn svg_symmetric_doublet() {
    let dir = tempfile::tempdir().unwrap();
    let svg = svg_of(&["svg", "--tensions", "1,1,1", "--volumes", "0.5,0.5"], dir.path());
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0].len(), lines[1].len());
    for (a, b) in lines[0].iter().zip(&lines[1]) {
        assert!((a.0 + b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
    }
}

#[test]
fn svg_internalized_cells_are_nested_circles() {
    let dir = tempfile::tempdir().unwrap();
    let svg = svg_of(&["svg", "--tensions", "3,1,1", "--volumes", "0.5,0.5"], dir.path());
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 2);
    let extent = |l: &Vec<(f64, f64)>| {
        let lo = l.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = l.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (a, b) = (extent(&lines[0]), extent(&lines[1]));
    // the smaller circle sits inside the larger one
    assert!(b.0 >= a.0 - 1e-12 && b.1 <= a.1 + 1e-12);
    assert!(!svg.contains("junction"));
}

#[test]
fn svg_from_bulged_document() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("probe.json");
    json(&["max-bulge-probe", "-o", doc.to_str().unwrap()]);
    let probe: Value = serde_json::from_str(&fs::read_to_string(&doc).unwrap()).unwrap();
    assert!(floats(&probe["point"]["phi_deg"])[0] > 180.0);
    let svg = svg_of(&["svg", "--input", doc.to_str().unwrap()], dir.path());
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 3);
    assert_eq!(svg.matches("junction").count(), 2);
}
