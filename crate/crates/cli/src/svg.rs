//! Cross-section schematic: the axis is horizontal, the junction circle
//! meets the drawing plane at `(0, ±h)`.

use std::f64::consts::PI;
use std::fmt::Write;

const SAMPLES: usize = 96;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// Points of the arc from `(0, h)` through the apex `(x, 0)` to `(0, -h)`.
pub fn arc_points(x: f64, h: f64) -> Vec<(f64, f64)> {
    if x == 0.0 {
        return vec![(0.0, h), (0.0, -h)];
    }
    // circle centered on the axis through (0, ±h) and (x, 0)
    let c = (x * x - h * h) / (2.0 * x);
    let apex = if x > c { 0.0 } else { PI };
    let mut delta = (h.atan2(-c) - apex).rem_euclid(2.0 * PI);
    if delta > PI {
        delta -= 2.0 * PI;
    }
    let r = (x - c).abs();
    (0..=SAMPLES)
        .map(|i| {
            let u = 1.0 - 2.0 * i as f64 / SAMPLES as f64;
            let th = apex + delta * u;
            (c + r * th.cos(), r * th.sin())
        })
        .collect()
}

/// SVG of the three interfaces with apexes `x` and junction radius `h`.
///
/// With `h = 0` each interface is a full sphere through the origin; a
/// vanished interface (`x_k = 0`) is omitted.
pub fn render(x: [f64; 3], h: f64) -> String {
    let shapes: Vec<Vec<(f64, f64)>> = x
        .iter()
        .map(|&xk| {
            if h == 0.0 {
                if xk == 0.0 {
                    Vec::new()
                } else {
                    let r = 0.5 * xk.abs();
                    (0..=SAMPLES)
                        .map(|i| {
                            let th = 2.0 * PI * i as f64 / SAMPLES as f64;
                            (0.5 * xk + r * th.cos(), r * th.sin())
                        })
                        .collect()
                }
            } else {
                arc_points(xk, h)
            }
        })
        .collect();
    let pts = shapes.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, -h, h);
    for &(px, py) in pts {
        x0 = x0.min(px);
        x1 = x1.max(px);
        y0 = y0.min(py);
        y1 = y1.max(py);
    }
    let pad = 0.1 * (x1 - x0).max(y1 - y0).max(1e-12);
    let (vx, vy, vw, vh) = (x0 - pad, -(y1 + pad), x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let stroke = 0.005 * vw.max(vh);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx} {vy} {vw} {vh}" width="600" height="{}">"#,
        (600.0 * vh / vw).round()
    );
    let _ = writeln!(
        s,
        r##"  <line x1="{}" y1="0" x2="{}" y2="0" stroke="#999" stroke-width="{}" stroke-dasharray="{} {}"/>"##,
        vx,
        vx + vw,
        0.5 * stroke,
        2.0 * stroke,
        2.0 * stroke
    );
    for (k, shape) in shapes.iter().enumerate() {
        if shape.is_empty() {
            continue;
        }
        let points: Vec<String> = shape.iter().map(|(px, py)| format!("{px},{}", -py)).collect();
        let _ = writeln!(
            s,
            r##"  <polyline id="s{}" points="{}" fill="none" stroke="{}" stroke-width="{stroke}"/>"##,
            k + 1,
            points.join(" "),
            COLORS[k]
        );
    }
    if h > 0.0 {
        for py in [h, -h] {
            let _ = writeln!(
                s,
                r#"  <circle class="junction" cx="0" cy="{}" r="{}" fill="black"/>"#,
                -py,
                1.5 * stroke
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
