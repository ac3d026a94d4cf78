//! Command-line front end for the doublet solvers.

mod config;
mod output;
mod svg;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use doublet::inference::{infer_from_angles, infer_from_state, AngleLaw, RadiusInference};
use doublet::line::{global_minimum, CriticalSearch};
use doublet::oracle::{oracle_minimize, OracleGrid, OracleTag};
use doublet::pressure::{solve_pressure, PressureProblem};
use doublet::scan::{bulge_boundary_solve, max_bulge_probe, scan_angle_grid, write_csv};
use doublet::surface::{solve_surface, SurfaceSolution};
use doublet::{DoubletError, ReducedVolumes, Tensions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use config::RunConfig;
use output::{emit, to_json};

#[derive(Parser)]
#[command(name = "doublet", version, about = "Equilibrium shapes of two-cell doublets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium for prescribed volumes (line tension allowed).
    SolveVolumes(RunConfig),
    /// Same as solve-volumes, but requires a positive line tension.
    SolveLine(RunConfig),
    /// Equilibrium for prescribed pressures (no line tension).
    SolvePressures(RunConfig),
    /// Phase-diagram scan over the angle square, written as CSV.
    Scan(RunConfig),
    /// Exact configurations with `sin(phi1) = 0`.
    BulgeBoundary(RunConfig),
    /// The maximally bulged local minimum.
    MaxBulgeProbe(RunConfig),
    /// Tensions from junction angles or from a solution document.
    Infer(RunConfig),
    /// Compare the solvers with the brute-force oracle.
    OracleCheck(RunConfig),
    /// SVG cross-section of a solution.
    Svg(RunConfig),
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Failure { code: 4, message: message.into() }
    }
}

impl From<DoubletError> for Failure {
    fn from(e: DoubletError) -> Self {
        let code = match e {
            DoubletError::Convergence { .. } | DoubletError::Singular(_) => 3,
            DoubletError::Invariant(_) => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SolveVolumes(c) => RunConfig::resolve(c).and_then(|c| solve_volumes(&c, false)),
        Command::SolveLine(c) => RunConfig::resolve(c).and_then(|c| solve_volumes(&c, true)),
        Command::SolvePressures(c) => RunConfig::resolve(c).and_then(|c| solve_pressures(&c)),
        Command::Scan(c) => RunConfig::resolve(c).and_then(|c| scan(&c)),
        Command::BulgeBoundary(c) => RunConfig::resolve(c).and_then(|c| bulge_boundary(&c)),
        Command::MaxBulgeProbe(c) => RunConfig::resolve(c).and_then(|c| max_bulge(&c)),
        Command::Infer(c) => RunConfig::resolve(c).and_then(|c| infer(&c)),
        Command::OracleCheck(c) => RunConfig::resolve(c).and_then(|c| oracle_check(&c)),
        Command::Svg(c) => RunConfig::resolve(c).and_then(|c| draw(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn search(cfg: &RunConfig) -> CriticalSearch {
    CriticalSearch {
        grid: cfg.grid.unwrap_or(CriticalSearch::default().grid),
        ..CriticalSearch::default()
    }
}

fn problem(cfg: &RunConfig) -> Result<(Tensions, ReducedVolumes), Failure> {
    let [t1, t2, t3] = cfg.tensions()?;
    let t = Tensions::new(t1, t2, t3, cfg.kappa())?;
    let [w1, w2] = cfg.volumes()?;
    Ok((t, ReducedVolumes::new(w1, w2)?))
}

/// Solution document for tensions and volumes, dispatching on `kappa`.
fn solve_document(cfg: &RunConfig) -> Result<Value, Failure> {
    let (t, v) = problem(cfg)?;
    if t.kappa == 0.0 {
        let sol = solve_surface(&t, &v)?;
        Ok(output::surface_document(&sol, &t, &v))
    } else {
        let g = global_minimum(&t, &v, &search(cfg))?;
        Ok(output::line_document(&g, &t, &v))
    }
}

fn emit_verified(doc: &Value, cfg: &RunConfig) -> Outcome {
    let text = to_json(doc);
    if cfg.verify {
        let worst = output::verify_document(&text)?;
        if !(worst <= 1e-9) {
            return Err(Failure::internal(format!(
                "verification failed: residual {worst:e} recomputed from the emitted numbers"
            )));
        }
        eprintln!("verify: residual {worst:.3e}");
    }
    emit(&text, cfg.output.as_deref())
}

fn solve_volumes(cfg: &RunConfig, require_line: bool) -> Outcome {
    if cfg.pressures.is_some() {
        return Err(Failure::invalid("give volumes or pressures, not both"));
    }
    if require_line && !(cfg.kappa() > 0.0) {
        return Err(Failure::invalid("solve-line needs --kappa > 0"));
    }
    let doc = solve_document(cfg)?;
    emit_verified(&doc, cfg)
}

fn solve_pressures(cfg: &RunConfig) -> Outcome {
    if cfg.volumes.is_some() {
        return Err(Failure::invalid("give volumes or pressures, not both"));
    }
    if cfg.kappa() != 0.0 {
        return Err(Failure::invalid("the pressure solver does not support line tension"));
    }
    let [t1, t2, t3] = cfg.tensions()?;
    let t = Tensions::surface(t1, t2, t3)?;
    let [p1, p2] = cfg.pressures()?;
    let state = solve_pressure(&PressureProblem::new(t, p1, p2)?)?;
    emit_verified(&output::pressure_document(&state, &t, [p1, p2]), cfg)
}

fn scan(cfg: &RunConfig) -> Outcome {
    let [w1, w2] = cfg.volumes()?;
    let v = ReducedVolumes::new(w1, w2)?;
    let cells = scan_angle_grid(cfg.t3()?, cfg.kappa(), &v, cfg.n.unwrap_or(64))?;
    let text = match cfg.format.as_deref() {
        Some("json") => to_json(&cells),
        _ => {
            let mut buf = Vec::new();
            write_csv(&cells, &mut buf).map_err(|e| Failure::internal(e.to_string()))?;
            String::from_utf8(buf).map_err(|e| Failure::internal(e.to_string()))?
        }
    };
    emit(&text, cfg.output.as_deref())
}

fn bulge_boundary(cfg: &RunConfig) -> Outcome {
    let [w1, w2] = cfg.volumes()?;
    let v = ReducedVolumes::new(w1, w2)?;
    let (t2, t3) = (cfg.t2()?, cfg.t3()?);
    let roots = bulge_boundary_solve(t2, t3, cfg.kappa(), &v)?;
    let items: Vec<Value> = roots
        .iter()
        .map(|r| {
            json!({
                "branch": r.branch,
                "t1": r.t1,
                "z": r.state.z(),
                "y": r.state.y(),
                "phi_deg": r.state.phi().map(f64::to_degrees),
                "condition": r.condition,
                "residual": r.residual,
            })
        })
        .collect();
    let doc = json!({ "t2": t2, "t3": t3, "kappa": cfg.kappa(), "volumes": [w1, w2], "roots": items });
    emit(&to_json(&doc), cfg.output.as_deref())
}

fn max_bulge(cfg: &RunConfig) -> Outcome {
    let m = max_bulge_probe(&search(cfg))?;
    let [t1, t2, t3, kappa] = doublet::scan::MAX_BULGE_TENSIONS;
    let t = Tensions::new(t1, t2, t3, kappa)?;
    let mut point = output::interior_json(&m.point.state, &t);
    point["classification"] = json!(m.point.classification.as_str());
    let doc = json!({
        "tensions": doublet::scan::MAX_BULGE_TENSIONS,
        "volumes": doublet::scan::MAX_BULGE_VOLUMES,
        "phi1_deg": m.phi_degrees[0],
        "point": point,
    });
    emit(&to_json(&doc), cfg.output.as_deref())
}

fn infer(cfg: &RunConfig) -> Outcome {
    let doc = if let Some(path) = &cfg.input {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
        let (x, h) = configuration_of(&text)?;
        if h == 0.0 {
            return Err(Failure::invalid("radius inference needs an interior configuration"));
        }
        let state = doublet::geometry::state_from_xh(x, h)?;
        match infer_from_state(&state)? {
            RadiusInference::Full(r) => json!({ "method": "radii", "tensions": r.tensions, "normalization": "t3 = 1" }),
            RadiusInference::Partial { flat, ratio, note } => json!({
                "method": "radii",
                "flat": flat.label(),
                "ratio": ratio,
                "note": note,
            }),
        }
    } else {
        let phi = cfg.angles()?.map(f64::to_radians);
        let laws = match &cfg.law {
            Some(l) => vec![l.parse::<AngleLaw>()?],
            None => AngleLaw::ALL.to_vec(),
        };
        let mut out = serde_json::Map::new();
        for law in laws {
            let r = infer_from_angles(phi, law)?;
            out.insert(law.as_str().into(), json!({ "tensions": r.tensions, "min_sin": r.min_sin }));
        }
        json!({ "method": "angles", "normalization": "t1 + t2 + t3 = 1", "laws": out })
    };
    emit(&to_json(&doc), cfg.output.as_deref())
}

fn oracle_check(cfg: &RunConfig) -> Outcome {
    let grid = OracleGrid {
        n_x3: cfg.oracle_n.unwrap_or(200),
        n_h: cfg.oracle_n.unwrap_or(200),
        ..OracleGrid::default()
    };
    let cases: Vec<(Tensions, ReducedVolumes)> = if cfg.tensions.is_some() {
        vec![problem(cfg)?]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
        (0..cfg.count.unwrap_or(10))
            .map(|_| -> Result<_, Failure> {
                let t = Tensions::new(
                    rng.gen_range(0.1..4.0),
                    rng.gen_range(0.1..4.0),
                    rng.gen_range(0.1..4.0),
                    cfg.kappa(),
                )?;
                let v = ReducedVolumes::new(rng.gen_range(0.05..5.0), rng.gen_range(0.05..5.0))?;
                Ok((t, v))
            })
            .collect::<Result<_, _>>()?
    };
    let mut worst = 0.0f64;
    let mut items = Vec::new();
    for (t, v) in &cases {
        let (energy, tag) = if t.kappa == 0.0 {
            let s = solve_surface(t, v)?;
            let tag = match &s {
                SurfaceSolution::Interior { .. } => "interior".to_string(),
                SurfaceSolution::Boundary { boundary, .. } => format!("u{}", boundary.which.label()),
            };
            (s.energy(), tag)
        } else {
            let g = global_minimum(t, v, &search(cfg))?;
            (g.energy, g.global.to_string())
        };
        let o = oracle_minimize(t, v, &grid)?;
        let oracle_tag = match o.tag {
            OracleTag::Interior => "interior".to_string(),
            OracleTag::Boundary(k) => format!("u{}", k.label()),
        };
        let rel = (energy - o.energy).abs() / o.energy;
        worst = worst.max(rel);
        items.push(json!({
            "tensions": [t.t1, t.t2, t.t3, t.kappa],
            "volumes": [v.w1, v.w2],
            "solver_energy": energy,
            "solver_global": tag,
            "oracle_energy": o.energy,
            "oracle_global": oracle_tag,
            "relative_difference": rel,
        }));
    }
    let pass = worst <= 1e-6;
    let doc = json!({ "cases": items, "max_relative_difference": worst, "pass": pass });
    emit(&to_json(&doc), cfg.output.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(Failure::internal(format!("solver and oracle disagree (relative {worst:e})")))
    }
}

fn configuration_of(text: &str) -> Result<([f64; 3], f64), Failure> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Failure::invalid(format!("input is not JSON: {e}")))?;
    let c = doc
        .get("configuration")
        .or_else(|| doc.get("point"))
        .ok_or_else(|| Failure::invalid("input has no configuration"))?;
    let x: Vec<f64> = c["x"]
        .as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect())
        .ok_or_else(|| Failure::invalid("configuration has no apex positions"))?;
    let h = c["h"].as_f64().ok_or_else(|| Failure::invalid("configuration has no h"))?;
    let x: [f64; 3] = x
        .try_into()
        .map_err(|_| Failure::invalid("configuration needs three apex positions"))?;
    Ok((x, h))
}

fn draw(cfg: &RunConfig) -> Outcome {
    let (x, h) = if let Some(path) = &cfg.input {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
        configuration_of(&text)?
    } else if cfg.tensions.is_some() && cfg.volumes.is_some() {
        let doc = solve_document(cfg)?;
        configuration_of(&doc.to_string())?
    } else {
        return Err(Failure::invalid(
            "svg needs --input or --tensions and --volumes",
        ));
    };
    emit(&svg::render(x, h), cfg.output.as_deref())
}

