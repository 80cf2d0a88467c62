//! Dot-and-whisker SVG of Monte Carlo summaries: one row per model, the
//! mean SC as a dot, the percentile interval as whiskers, and dashed
//! reference lines at 0.5 and 0.2.

use std::fmt::Write;

use spillover_core::simulator::SimulationSummary;

const WIDTH: f64 = 640.0;
const ROW_HEIGHT: f64 = 36.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const REFERENCE_LINES: [f64; 2] = [0.5, 0.2];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn dot_whisker_svg(summaries: &[SimulationSummary]) -> String {
    let (mut lo, mut hi) = (0.0f64, 0.6f64);
    for s in summaries {
        lo = lo.min(s.percentile_interval.0);
        hi = hi.max(s.percentile_interval.1);
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_width = WIDTH - LEFT - RIGHT;
    let x = |v: f64| LEFT + (v - lo) / (hi - lo) * plot_width;
    let height = TOP + BOTTOM + ROW_HEIGHT * summaries.len().max(1) as f64;
    let axis_y = height - BOTTOM;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for r in REFERENCE_LINES {
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{axis_y}" stroke="#888" stroke-dasharray="4 3"/>"##,
            x(r)
        );
    }
    for (i, s) in summaries.iter().enumerate() {
        let y = TOP + ROW_HEIGHT * (i as f64 + 0.5);
        let (a, b) = s.percentile_interval;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 10.0,
            y + 4.0,
            escape(&s.model)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
            x(a),
            x(b)
        );
        for end in [a, b] {
            let _ = writeln!(
                svg,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#,
                x(end),
                y - 5.0,
                y + 5.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{y:.2}" r="4" fill="black"><title>{}: {:.3} ({:.3}, {:.3})</title></circle>"#,
            x(s.mean_sc),
            escape(&s.model),
            s.mean_sc,
            a,
            b
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{axis_y}" x2="{:.2}" y2="{axis_y}" stroke="black"/>"#,
        WIDTH - RIGHT
    );
    let step = 0.1;
    let mut tick = (lo / step).ceil() * step;
    while tick <= hi + 1e-12 {
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{axis_y}" x2="{0:.2}" y2="{1}" stroke="black"/><text x="{0:.2}" y="{2}" text-anchor="middle">{3:.1}</text>"#,
            x(tick),
            axis_y + 4.0,
            axis_y + 18.0,
            tick + 0.0
        );
        tick += step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Spillover coefficient</text>"#,
        LEFT + plot_width / 2.0,
        height - 10.0
    );
    svg.push_str("</svg>\n");
    svg
}
