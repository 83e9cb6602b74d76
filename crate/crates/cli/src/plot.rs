//! Static SVG line charts of a run.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Error;
use crate::series::TimeSeries;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

/// One trace of a chart.
#[derive(Debug, Clone, Copy)]
pub struct Trace<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

impl<'a> Trace<'a> {
    fn solid(label: &'a str, values: &'a [f64], color: &'a str) -> Self {
        Self {
            label,
            values,
            color,
            dashed: false,
        }
    }

    fn dashed(label: &'a str, values: &'a [f64], color: &'a str) -> Self {
        Self {
            label,
            values,
            color,
            dashed: true,
        }
    }
}

/// Chart files written by [`render_plots`].
pub const PLOT_FILES: [&str; 5] = [
    "extension.svg",
    "rotation.svg",
    "displacement.svg",
    "torque.svg",
    "pressure.svg",
];

/// Writes the five charts into `dir`, creating it if needed.
pub fn render_plots(ts: &TimeSeries, dir: impl AsRef<Path>) -> Result<(), Error> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let t = &ts.t;
    let charts = [
        (
            "Side extensions and references",
            "extension (m)",
            vec![
                Trace::solid("x_L", &ts.x_l, "#1f77b4"),
                Trace::solid("x_R", &ts.x_r, "#d62728"),
                Trace::dashed("x_L ref", &ts.x_ref_l, "#1f77b4"),
                Trace::dashed("x_R ref", &ts.x_ref_r, "#d62728"),
            ],
        ),
        (
            "Body rotation",
            "theta (rad)",
            vec![Trace::solid("theta", &ts.theta, "#2ca02c")],
        ),
        (
            "Linear displacement",
            "z (m)",
            vec![Trace::solid("z", &ts.z, "#9467bd")],
        ),
        (
            "Torque",
            "tau (N·m)",
            vec![Trace::solid("tau", &ts.tau, "#8c564b")],
        ),
        (
            "Supply and chamber pressures",
            "pressure (Pa)",
            vec![
                Trace::dashed("P1_L", &ts.p1_l, "#1f77b4"),
                Trace::solid("P2_L", &ts.p2_l, "#1f77b4"),
                Trace::dashed("P1_R", &ts.p1_r, "#d62728"),
                Trace::solid("P2_R", &ts.p2_r, "#d62728"),
            ],
        ),
    ];
    for (file, (title, y_label, traces)) in PLOT_FILES.iter().zip(charts) {
        let path = dir.join(file);
        fs::write(&path, line_chart(title, "t (s)", y_label, t, &traces))
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Range of the finite values, widened when empty or flat.
fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders one chart. Traces shorter than `t` are drawn over their own
/// length; a chart with no samples has axes and legend but no data paths.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    t: &[f64],
    traces: &[Trace],
) -> String {
    let (x0, x1) = bounds(t.iter());
    let (y0, y1) = bounds(traces.iter().flat_map(|s| s.values.iter()));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}" stroke="#ddd"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(22 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        escape(y_label)
    );

    for (k, trace) in traces.iter().enumerate() {
        let dash = if trace.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let points: Vec<(f64, f64)> = t
            .iter()
            .zip(trace.values)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| (sx(x), sy(y)))
            .collect();
        if !points.is_empty() {
            let mut d = String::new();
            for (i, (px, py)) in points.iter().enumerate() {
                let _ = write!(d, "{}{px:.2} {py:.2}", if i == 0 { "M" } else { " L" });
            }
            let _ = writeln!(
                svg,
                r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                trace.color
            );
        }
        let ly = TOP + 12.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            trace.color,
            lx + 30.0,
            ly + 4.0,
            escape(trace.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
