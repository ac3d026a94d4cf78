//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use doublet::inference::{ambiguity_family, infer_from_state, RadiusInference};
use doublet::line::{
    feasibility_prefilter, find_critical_points, global_minimum, hessian_tangent,
    quadrilateral_excess, CriticalPoint, CriticalSearch,
};
use doublet::oracle::{oracle_minimize, OracleGrid, OracleTag};
use doublet::pressure::{solve_pressure, PressureProblem};
use doublet::scan::{
    bulge_boundary_solve, diagonal_singular_tensions, lemma_constants, lemma_g, max_bulge_probe,
    scan_angle_grid, thresholds_equal_volumes,
};
use doublet::surface::{
    angle_laws, build_quintic, solve_monotone, solve_surface, RegimeLabel, SurfaceSolution,
};
use doublet::{Classification, ReducedVolumes, Surface, Tensions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every interior critical point seen by the suite, for the lemma checks.
type Seen = Vec<(CriticalPoint, Tensions, ReducedVolumes)>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn vols(w1: f64, w2: f64) -> ReducedVolumes {
    ReducedVolumes::new(w1, w2).unwrap()
}

fn random_interior(rng: &mut ChaCha8Rng) -> Tensions {
    let a: f64 = rng.gen_range(0.1..10.0);
    let b: f64 = rng.gen_range(0.1..10.0);
    let (lo, hi) = ((a - b).abs(), a + b);
    let c = lo + (hi - lo) * rng.gen_range(0.02..0.98);
    Tensions::surface(a, b, c).unwrap()
}

fn random_volumes(rng: &mut ChaCha8Rng) -> ReducedVolumes {
    vols(rng.gen_range(0.05..5.0), rng.gen_range(0.05..5.0))
}

fn criterion_1() -> Outcome {
    let v = vols(0.5, 0.5);
    let roots = bulge_boundary_solve(1.25, 1.0, 0.1, &v).unwrap();
    let Some(p) = roots.first() else {
        return outcome(false, "no root");
    };
    let t = Tensions::new(p.t1, 1.25, 1.0, 0.1).unwrap();
    let (trace, det) = hessian_tangent(&p.state, &t);
    let z = p.state.z();
    let got = [p.t1, z[0], z[1], z[2], p.state.y(), trace, det];
    let want = [
        0.271244499897851,
        -2.031331771464625,
        1.756721787151541,
        -0.569242100436099,
        2.930530863266979,
        26.158972256436426,
        4.615158111925040,
    ];
    let err = got
        .iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs())
        .fold(0.0, f64::max);
    outcome(err <= 1e-9, format!("max abs error {err:.2e}"))
}

fn criterion_2(seen: &mut Seen) -> Outcome {
    let probe = max_bulge_probe(&CriticalSearch::default()).unwrap();
    let [t1, t2, t3, kappa] = doublet::scan::MAX_BULGE_TENSIONS;
    let [w1, w2] = doublet::scan::MAX_BULGE_VOLUMES;
    seen.push((
        probe.point,
        Tensions::new(t1, t2, t3, kappa).unwrap(),
        vols(w1, w2),
    ));
    let phi1 = probe.phi_degrees[0];
    let err = (phi1 - 182.590653).abs();
    outcome(
        probe.point.classification == Classification::LocalMin && err <= 1e-3,
        format!("phi1 = {phi1:.6} deg, |error| {err:.1e} deg"),
    )
}

fn criterion_3(seen: &mut Seen) -> Outcome {
    let v = vols(0.75, 0.25);
    let t = Tensions::new(5.0, 6.0, 4.0, 1.0).unwrap();
    let g = global_minimum(&t, &v, &CriticalSearch::default()).unwrap();
    for c in &g.critical_points {
        seen.push((*c, t, v));
    }
    let Some(line) = g.local_minima().next() else {
        return outcome(false, "no local minimum");
    };
    let surf = solve_surface(&Tensions::surface(4.2, 8.5, 8.9).unwrap(), &v).unwrap();
    let Some(s) = surf.interior() else {
        return outcome(false, "surface solution is degenerate");
    };
    let a = line.state;
    let b = s.state;
    let got = [a.z()[0], a.z()[1], a.z()[2], a.h()];
    let want = [b.z()[0], b.z()[1], b.z()[2], b.h()];
    let err = got
        .iter()
        .zip(want)
        .map(|(g, w)| ((g - w) / w).abs())
        .fold(0.0, f64::max);
    outcome(err <= 2e-2, format!("max relative difference {err:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = Tensions::surface(1.0, 1.0, 1.0).unwrap();
    let mut err = 0.0f64;
    for _ in 0..100 {
        let v = random_volumes(&mut rng);
        let s = solve_surface(&t, &v).unwrap();
        let Some(i) = s.interior() else {
            return outcome(false, "degenerate solution for equal tensions");
        };
        for a in i.state.junction_angles() {
            err = err.max((a.to_degrees() - 120.0).abs());
        }
    }
    outcome(err <= 1e-9, format!("100 volume pairs, max |phi - 120| = {err:.1e} deg"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut bad_counts = 0;
    for _ in 0..1000 {
        let t = random_interior(&mut rng);
        let v = random_volumes(&mut rng);
        let f = build_quintic(Surface::S3, &t, &v).unwrap();
        if f.count_real_roots() != 1 {
            bad_counts += 1;
            continue;
        }
        let root = f.real_roots()[0];
        let y = angle_laws(&t).unwrap().cot_half;
        let (ym, yp) = (y[1], y[0]);
        let g = v.g();
        let xi = solve_monotone(ym, yp, g[1] / g[0]).unwrap();
        let z3 = (yp - xi * ym) / (1.0 + xi);
        worst = worst.max((root - z3).abs() / z3.abs().max(1.0));
    }
    outcome(
        bad_counts == 0 && worst <= 1e-10,
        format!("{bad_counts} inputs without a unique root, max root mismatch {worst:.1e}"),
    )
}

fn criterion_6(seen: &mut Seen) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = OracleGrid::default();
    let mut worst = 0.0f64;
    let mut regimes = [0usize; 4];
    let mut tag_mismatch = 0;
    for _ in 0..100 {
        let t = Tensions::surface(
            rng.gen_range(0.1..4.0),
            rng.gen_range(0.1..4.0),
            rng.gen_range(0.1..4.0),
        )
        .unwrap();
        let v = random_volumes(&mut rng);
        let s = solve_surface(&t, &v).unwrap();
        regimes[match s.regime().label {
            RegimeLabel::Interior => 0,
            RegimeLabel::Internalize1 => 1,
            RegimeLabel::Internalize2 => 2,
            RegimeLabel::Externalize => 3,
        }] += 1;
        let o = oracle_minimize(&t, &v, &grid).unwrap();
        worst = worst.max((s.energy() - o.energy).abs() / o.energy);
        let same = match (&s, o.tag) {
            (SurfaceSolution::Interior { .. }, OracleTag::Interior) => true,
            (SurfaceSolution::Boundary { boundary, .. }, OracleTag::Boundary(k)) => boundary.which == k,
            _ => false,
        };
        if !same {
            tag_mismatch += 1;
        }
    }
    let mut worst_line = 0.0f64;
    for _ in 0..30 {
        let t = Tensions::new(
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.05..1.5),
        )
        .unwrap();
        let v = vols(rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
        let g = global_minimum(&t, &v, &CriticalSearch::default()).unwrap();
        for c in &g.critical_points {
            seen.push((*c, t, v));
        }
        let o = oracle_minimize(&t, &v, &grid).unwrap();
        worst_line = worst_line.max((g.energy - o.energy).abs() / o.energy);
    }
    outcome(
        worst <= 1e-6 && worst_line <= 1e-6,
        format!(
            "kappa = 0 regimes {regimes:?} (interior, int-1, int-2, ext), max rel diff {worst:.1e}, \
             {tag_mismatch} tag mismatches; kappa > 0 max rel diff {worst_line:.1e}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let t = random_interior(&mut rng);
        let v = random_volumes(&mut rng);
        let s = solve_surface(&t, &v).unwrap();
        let i = s.interior().unwrap();
        let p = PressureProblem::new(t, i.pressures.p1, i.pressures.p2).unwrap();
        let back = solve_pressure(&p).unwrap();
        let (a, b) = (i.state, back);
        let scale = a.x().iter().fold(a.h(), |m, x| m.max(x.abs()));
        for (u, w) in a.x().iter().zip(b.x()) {
            worst = worst.max((u - w).abs() / scale);
        }
        worst = worst.max((a.h() - b.h()).abs() / scale);
    }
    outcome(worst <= 1e-8, format!("50 round trips, max relative error {worst:.1e}"))
}

fn criterion_8(seen: &mut Seen) -> Outcome {
    let v = vols(0.5, 0.5);
    let th = thresholds_equal_volumes(1.0, &v).unwrap();
    let bracket = 1.45 < th.kappa_bounded && th.kappa_bounded < 1.55;
    let bound = *diagonal_singular_tensions(1.0, 1.55, &v).unwrap().last().unwrap();
    let opts = CriticalSearch::default();

    let below = scan_angle_grid(1.0, 1.45, &v, 256).unwrap();
    let above = scan_angle_grid(1.0, 1.55, &v, 256).unwrap();
    let reach = |cells: &[doublet::scan::PhaseCell]| {
        cells
            .iter()
            .filter(|c| c.classification == Classification::LocalMin)
            .map(|c| c.t1.max(c.t2))
            .fold(0.0, f64::max)
    };
    let (reach_below, reach_above) = (reach(&below), reach(&above));

    let has_min = |t: f64, kappa: f64, seen: &mut Seen| {
        let tt = Tensions::new(t, t, 1.0, kappa).unwrap();
        let pts = find_critical_points(&tt, &v, &opts).unwrap();
        for c in &pts {
            seen.push((*c, tt, v));
        }
        pts.iter().any(|c| c.is_local_min())
    };
    let at_1000_below = has_min(1000.0, 1.45, seen);
    let at_1000_above = has_min(1000.0, 1.55, seen);

    // random diagonal tensions past the bound
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sampled_ok = true;
    for _ in 0..16 {
        let t = bound * (1.0 + rng.gen_range(0.01f64..10.0)).powi(2);
        sampled_ok &= has_min(t, 1.45, seen);
        sampled_ok &= !has_min(t, 1.55, seen);
    }
    outcome(
        bracket
            && at_1000_below
            && !at_1000_above
            && reach_below > bound
            && reach_above <= bound
            && sampled_ok,
        format!(
            "kappa_bounded {:.4}, bound at 1.55 t = {bound:.2}; scan reach {reach_below:.1} (1.45) vs \
             {reach_above:.1} (1.55); t1 = t2 = 1000 minimum: {at_1000_below} (1.45), {at_1000_above} (1.55); \
             sampled diagonal {sampled_ok}",
            th.kappa_bounded
        ),
    )
}

fn criterion_9(seen: &mut Seen) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = CriticalSearch::default();
    let mut max_points = 0;
    let mut max_minima = 0;
    let mut certified_violations = 0;
    for case in 0..200 {
        let t = Tensions::new(
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.02..3.0),
        )
        .unwrap();
        let v = vols(rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0));
        let pts = find_critical_points(&t, &v, &opts).unwrap();
        for c in &pts {
            seen.push((*c, t, v));
        }
        let minima = pts.iter().filter(|c| c.is_local_min()).count();
        max_points = max_points.max(pts.len());
        max_minima = max_minima.max(minima);
        if pts.len() > 6 || minima > 1 {
            println!("  violation in case {case}: t = {t:?}, volumes = {v:?}");
            for c in &pts {
                println!(
                    "    z = {:?}, y = {:e}, {} residual {:.1e}",
                    c.state.z(),
                    c.state.y(),
                    c.classification.as_str(),
                    c.residual
                );
            }
            // points that survive a strict residual bound and are well separated
            let strict: Vec<&CriticalPoint> = pts.iter().filter(|c| c.residual <= 1e-12).collect();
            let certified_minima = strict.iter().filter(|c| c.is_local_min()).count();
            if strict.len() > 6 || certified_minima > 1 {
                certified_violations += 1;
            }
        }
    }
    outcome(
        certified_violations == 0,
        format!(
            "200 sets, max {max_points} critical points, max {max_minima} local minima, \
             {certified_violations} certified violations"
        ),
    )
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while b - a > tol {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

fn criterion_10(seen: &Seen) -> Outcome {
    let mut worst_u = f64::INFINITY;
    let mut worst_y = f64::INFINITY;
    let mut worst_quad = f64::NEG_INFINITY;
    let mut count = 0;
    for (c, t, v) in seen {
        count += 1;
        let f = feasibility_prefilter(t, v);
        if let Some(u) = f.u {
            worst_u = worst_u.min(u - 3.0);
        }
        worst_y = worst_y.min(c.state.y() - f.y_lower_bound);
        worst_quad = worst_quad.max(quadrilateral_excess(t, c.state.y()) / (t.sum() + t.kappa * c.state.y()));
    }
    let slack = 1e-9;
    let lemma_ok = worst_u >= -slack && worst_y >= -slack && worst_quad <= slack;

    // independent maximization of g: coarse sampling then golden section
    let samples: Vec<f64> = (1..4000).map(|i| i as f64 * 1e-3).collect();
    let x0 = samples
        .iter()
        .copied()
        .max_by(|a, b| lemma_g(*a).total_cmp(&lemma_g(*b)))
        .unwrap();
    let xm = golden_max(lemma_g, x0 - 2e-3, x0 + 2e-3, 1e-9);
    let m_numeric = lemma_g(xm);
    let (omega0, m_closed) = lemma_constants();
    let m_err = (m_numeric - m_closed).abs();
    let m_ok = m_err <= 1e-10 && (m_closed - 0.3217).abs() < 5e-5 && (xm - omega0).abs() < 1e-6;
    outcome(
        lemma_ok && m_ok && count > 0,
        format!(
            "{count} critical points: min(u - 3) {worst_u:.3}, min(y - bound) {worst_y:.3e}, \
             max quadrilateral excess {worst_quad:.3e}; M = {m_closed:.10} vs numeric {m_numeric:.10} \
             (|diff| {m_err:.1e})"
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = OracleGrid {
        n_x3: 120,
        n_h: 120,
        ..OracleGrid::default()
    };
    let mut failures = Vec::new();
    for k in Surface::ALL {
        for _ in 0..20 {
            let a: f64 = rng.gen_range(0.2..4.0);
            let b: f64 = rng.gen_range(0.2..4.0);
            let mut tt = [0.0; 3];
            tt[k.next().index()] = a;
            tt[k.prev().index()] = b;
            tt[k.index()] = (a + b) * rng.gen_range(1.0..2.0);
            let t = Tensions::from_array(tt, 0.0).unwrap();
            let v = random_volumes(&mut rng);
            let s = solve_surface(&t, &v).unwrap();
            let o = oracle_minimize(&t, &v, &grid).unwrap();
            let ok = match s {
                SurfaceSolution::Boundary { boundary, .. } => {
                    boundary.which == k
                        && o.tag == OracleTag::Boundary(k)
                        && (o.energy - boundary.energy).abs() <= 1e-12 * boundary.energy
                }
                SurfaceSolution::Interior { .. } => false,
            };
            if !ok {
                failures.push(format!("u{} t = {tt:?} v = {v:?}", k.label()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("60 instances, {} failures {:?}", failures.len(), failures),
    )
}

/// Not a numbered criterion: the rescaled Lami member of the ambiguity family
/// reproduces the surface-only tensions of the equivalence example.
fn equivalence_family_check() -> Outcome {
    let v = vols(0.75, 0.25);
    let t = Tensions::new(5.0, 6.0, 4.0, 1.0).unwrap();
    let g = global_minimum(&t, &v, &CriticalSearch::default()).unwrap();
    let Some(p) = g.local_minima().next() else {
        return outcome(false, "no local minimum");
    };
    let lami = ambiguity_family(p, &t).lami_member();
    let s: f64 = lami.iter().sum();
    let scaled = lami.map(|x| x * 21.6 / s);
    let err = scaled
        .iter()
        .zip([4.2, 8.5, 8.9])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let full = matches!(infer_from_state(&p.state), Ok(RadiusInference::Full { .. }));
    outcome(
        err < 0.05 && full,
        format!("Lami member {scaled:.3?}, max deviation {err:.3}"),
    )
}

fn main() {
    let mut seen: Seen = Vec::new();
    let mut all_pass = true;
    let mut report = |n: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= budget;
        all_pass &= pass;
        println!(
            "{} criterion {n}: {} [{:.2} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    };
    let secs = Duration::from_secs;
    report("1", secs(1), &mut criterion_1);
    report("2", secs(5), &mut || criterion_2(&mut seen));
    report("3", secs(5), &mut || criterion_3(&mut seen));
    report("4", secs(10), &mut criterion_4);
    report("5", secs(30), &mut criterion_5);
    report("6", secs(600), &mut || criterion_6(&mut seen));
    report("7", secs(10), &mut criterion_7);
    report("8", secs(300), &mut || criterion_8(&mut seen));
    report("9", secs(600), &mut || criterion_9(&mut seen));
    report("10", secs(600), &mut || criterion_10(&seen));
    report("11", secs(600), &mut criterion_11);
    report("3b", secs(5), &mut equivalence_family_check);
    if !all_pass {
        std::process::exit(1);
    }
}
