use std::fmt::Write;

use super::SweepResult;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 56.0;

/// Line chart of sup error against grid size, log₂ x-axis and optionally
/// log₁₀ y-axis. Failed runs and non-positive values (on a log axis) are
/// skipped.
pub fn sweep_svg(result: &SweepResult, log_y: bool) -> String {
    let points: Vec<(f64, f64)> = result
        .grid_sizes
        .iter()
        .zip(&result.sup_errors)
        .filter_map(|(&n, e)| e.map(|e| (n as f64, e)))
        .filter(|&(_, e)| e.is_finite() && (!log_y || e > 0.0))
        .map(|(n, e)| (n.log2(), if log_y { e.log10() } else { e }))
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">sup |MICK - Frank| vs grid size (tau = {})</text>"#,
        WIDTH / 2.0,
        result.tau
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN / 2.0, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );

    if !points.is_empty() {
        let (xmin, xmax) = bounds(points.iter().map(|p| p.0));
        let (ymin, ymax) = bounds(points.iter().map(|p| p.1));
        let sx = |x: f64| x0 + (x - xmin) / (xmax - xmin) * (x1 - x0);
        let sy = |y: f64| y0 - (y - ymin) / (ymax - ymin) * (y0 - y1);

        let mut path = String::new();
        for (k, &(x, y)) in points.iter().enumerate() {
            let _ = write!(
                path,
                "{}{:.2} {:.2} ",
                if k == 0 { "M" } else { "L" },
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#,
            path.trim_end()
        );
        for &(x, y) in &points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
                sx(x),
                sy(y)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
                sx(x),
                y0 + 16.0,
                x.exp2().round()
            );
        }
        for (label, y) in [(ymax, y1), (ymin, y0)] {
            let shown = if log_y { 10f64.powf(label) } else { label };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{:.2e}</text>"#,
                x0 - 4.0,
                y + 4.0,
                shown
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">grid size n</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}
