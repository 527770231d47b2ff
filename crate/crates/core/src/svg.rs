//! Minimal static SVG line charts for sweep results.

use std::fmt::Write as _;

use crate::experiments::SweepResult;
use crate::montecarlo::SnrEstimate;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;

struct Panel<'a> {
    title: &'a str,
    color: &'a str,
    analytic: Vec<(f64, f64)>,
    mc: Vec<(f64, SnrEstimate)>,
}

/// Two stacked panels (standard detection, weak-value) sharing the x axis.
/// Analytic rows are drawn as lines, Monte Carlo rows as points with ±1 SE bars.
pub fn sweep_chart(result: &SweepResult) -> String {
    let panels = [
        Panel {
            title: "standard detection",
            color: "#1f77b4",
            analytic: result.rows.iter().filter_map(|r| r.snr_sd_analytic.map(|y| (r.value, y))).collect(),
            mc: result.rows.iter().filter_map(|r| r.snr_sd_mc.map(|e| (r.value, e))).collect(),
        },
        Panel {
            title: "weak-value amplified",
            color: "#d62728",
            analytic: result.rows.iter().filter_map(|r| r.snr_wva_analytic.map(|y| (r.value, y))).collect(),
            mc: result.rows.iter().filter_map(|r| r.snr_wva_mc.map(|e| (r.value, e))).collect(),
        },
    ];
    let height = 2.0 * PANEL_HEIGHT;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x_lo, x_hi) = x_range(result);
    for (i, panel) in panels.iter().enumerate() {
        draw_panel(&mut out, panel, i as f64 * PANEL_HEIGHT, x_lo, x_hi, result.parameter.name());
    }
    out.push_str("</svg>\n");
    out
}

fn x_range(result: &SweepResult) -> (f64, f64) {
    let lo = result.rows.first().map_or(0.0, |r| r.value);
    let hi = result.rows.last().map_or(1.0, |r| r.value);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

fn draw_panel(out: &mut String, panel: &Panel, top: f64, x_lo: f64, x_hi: f64, x_label: &str) {
    let mut ys: Vec<f64> = panel.analytic.iter().map(|p| p.1).collect();
    for (_, e) in &panel.mc {
        ys.push(e.snr - e.std_error);
        ys.push(e.snr + e.std_error);
    }
    let y_lo = ys.iter().copied().fold(0.0, f64::min);
    let mut y_hi = ys.iter().copied().fold(0.0, f64::max);
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| top + MARGIN_TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;

    let (x0, y0) = (MARGIN_LEFT, top + MARGIN_TOP + plot_h);
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#,
        top + MARGIN_TOP
    );
    let _ = writeln!(out, r#"<text x="{x0:.2}" y="{:.2}">{}</text>"#, top + MARGIN_TOP - 8.0, panel.title);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xv:.3e}</text>"#,
            px(xv),
            y0 + 15.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            x0 - 5.0,
            py(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label} (SI)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        y0 + 32.0
    );
    if panel.analytic.len() >= 2 {
        let pts: Vec<String> = panel.analytic.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            panel.color,
            pts.join(" ")
        );
    }
    for (x, e) in &panel.mc {
        let (cx, cy) = (px(*x), py(e.snr));
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            py(e.snr - e.std_error),
            py(e.snr + e.std_error)
        );
        let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="none" stroke="black"/>"#);
    }
}
