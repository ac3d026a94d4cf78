use std::fs;
use std::io::{self, Write};
use std::path::Path;

use doublet::geometry::volumes_xh;
use doublet::line::{residual_norm, CriticalPoint, GlobalResult};
use doublet::surface::{pressures_of, SurfaceSolution};
use doublet::{BoundaryState, DoubletState, GlobalTag, ReducedVolumes, Tensions};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::Failure;

/// Pretty JSON with every float written to 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::internal(format!("stdout: {e}")))
        }
    }
}

fn degrees(a: [f64; 3]) -> [f64; 3] {
    a.map(f64::to_degrees)
}

fn tensions_json(t: &Tensions) -> Value {
    json!({ "t1": t.t1, "t2": t.t2, "t3": t.t3, "kappa": t.kappa })
}

fn volumes_json(v: &ReducedVolumes) -> Value {
    json!({ "w1": v.w1, "w2": v.w2 })
}

/// Interior configuration block.
pub fn interior_json(state: &DoubletState, t: &Tensions) -> Value {
    let p = pressures_of(state, t);
    json!({
        "kind": "interior",
        "x": state.x(),
        "h": state.h(),
        "z": state.z(),
        "alpha_deg": degrees(state.alpha()),
        "phi_deg": degrees(state.phi()),
        "junction_deg": degrees(state.junction_angles()),
        "pressures": [p.p1, p.p2],
        "energy": state.energy(t),
    })
}

fn critical_json(c: &CriticalPoint, t: &Tensions) -> Value {
    let mut v = interior_json(&c.state, t);
    let obj = v.as_object_mut().expect("object");
    obj.insert("classification".into(), json!(c.classification.as_str()));
    obj.insert("hessian_trace".into(), json!(c.hessian_trace));
    obj.insert("hessian_det".into(), json!(c.hessian_det));
    obj.insert("residual".into(), json!(c.residual));
    v
}

pub fn boundary_json(b: &BoundaryState) -> Value {
    json!({
        "kind": "boundary",
        "surface": format!("u{}", b.which.label()),
        "x": b.x,
        "h": 0.0,
        "energy": b.energy,
    })
}

pub fn surface_document(sol: &SurfaceSolution, t: &Tensions, v: &ReducedVolumes) -> Value {
    let regime = sol.regime();
    let (configuration, global) = match sol {
        SurfaceSolution::Interior { solution, .. } => {
            (interior_json(&solution.state, t), "interior".to_string())
        }
        SurfaceSolution::Boundary { boundary, .. } => {
            (boundary_json(boundary), format!("u{}", boundary.which.label()))
        }
    };
    json!({
        "tensions": tensions_json(t),
        "volumes": volumes_json(v),
        "regime": regime.label.as_str(),
        "global": global,
        "energy": sol.energy(),
        "configuration": configuration,
        "boundary": BoundaryState::all(v, t).iter().map(boundary_json).collect::<Vec<_>>(),
    })
}

pub fn line_document(g: &GlobalResult, t: &Tensions, v: &ReducedVolumes) -> Value {
    let configuration = match g.global {
        GlobalTag::Interior(i) => critical_json(&g.critical_points[i], t),
        GlobalTag::Boundary(k) => boundary_json(&g.boundary[k.index()]),
    };
    json!({
        "tensions": tensions_json(t),
        "volumes": volumes_json(v),
        "global": g.global.to_string(),
        "energy": g.energy,
        "configuration": configuration,
        "local_minima": g.local_minima().count(),
        "critical_points": g.critical_points.iter().map(|c| critical_json(c, t)).collect::<Vec<_>>(),
        "boundary": g.boundary.iter().map(boundary_json).collect::<Vec<_>>(),
    })
}

pub fn pressure_document(state: &DoubletState, t: &Tensions, pressures: [f64; 2]) -> Value {
    let (w1, w2) = state.volumes();
    json!({
        "tensions": tensions_json(t),
        "volumes": { "w1": w1, "w2": w2 },
        "requested_pressures": pressures,
        "regime": "interior",
        "global": "interior",
        "energy": state.energy(t),
        "configuration": interior_json(state, t),
    })
}

fn number(v: &Value, path: &[&str]) -> Option<f64> {
    let mut cur = v;
    for key in path {
        cur = cur.get(key)?;
    }
    cur.as_f64()
}

fn numbers<const N: usize>(v: &Value, path: &[&str]) -> Option<[f64; N]> {
    let mut cur = v;
    for key in path {
        cur = cur.get(key)?;
    }
    let arr = cur.as_array()?;
    let vals: Vec<f64> = arr.iter().map(Value::as_f64).collect::<Option<_>>()?;
    vals.try_into().ok()
}

/// Parses an emitted solve document and recomputes its residuals from the
/// printed numbers. Returns the largest relative residual.
pub fn verify_document(text: &str) -> Result<f64, Failure> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Failure::internal(format!("emitted JSON does not parse: {e}")))?;
    let bad = || Failure::internal("emitted document is missing fields");
    let t = Tensions::new(
        number(&doc, &["tensions", "t1"]).ok_or_else(bad)?,
        number(&doc, &["tensions", "t2"]).ok_or_else(bad)?,
        number(&doc, &["tensions", "t3"]).ok_or_else(bad)?,
        number(&doc, &["tensions", "kappa"]).ok_or_else(bad)?,
    )
    .map_err(Failure::from)?;
    let v = ReducedVolumes::new(
        number(&doc, &["volumes", "w1"]).ok_or_else(bad)?,
        number(&doc, &["volumes", "w2"]).ok_or_else(bad)?,
    )
    .map_err(Failure::from)?;
    let x: [f64; 3] = numbers(&doc, &["configuration", "x"]).ok_or_else(bad)?;
    let h = number(&doc, &["configuration", "h"]).ok_or_else(bad)?;
    let kind = doc["configuration"]["kind"].as_str().ok_or_else(bad)?;
    if kind == "boundary" {
        let (w1, w2) = volumes_xh(x, 0.0);
        let w3 = v.w3();
        return Ok(((w1 - v.w1).abs() / w3).max((w2 - v.w2).abs() / w3));
    }
    let state = doublet::geometry::state_from_xh(x, h).map_err(Failure::from)?;
    let mut worst = residual_norm(state.z(), state.y(), &t, &v);
    if let Some(p) = numbers::<2>(&doc, &["requested_pressures"]) {
        let got = pressures_of(&state, &t);
        let scale = p[0].abs().max(p[1].abs());
        worst = worst.max((got.p1 - p[0]).abs() / scale).max((got.p2 - p[1]).abs() / scale);
    }
    Ok(worst)
}
