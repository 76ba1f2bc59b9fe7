//! Minimal SVG 1.1 line charts. Coordinates are written with two decimals so
//! files are byte-stable.

use std::fmt::Write;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 320.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 46.0;
const LEGEND_STEP: f64 = 16.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    /// Position of `v` in [0, 1], or None when it cannot be drawn.
    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (lo, hi) = (self.lo as i32, self.hi as i32);
            let stride = ((hi - lo) / 6).max(1);
            (lo..=hi)
                .step_by(stride as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|k| k * mag).find(|s| *s >= raw).unwrap_or(raw);
            let mut t = (self.lo / step).ceil() * step;
            let mut out = Vec::new();
            while t <= self.hi + 1e-9 * step {
                let v = if t.abs() < 1e-9 * step { 0.0 } else { t };
                out.push((v, format!("{}", (v * 1e6).round() / 1e6)));
                t += step;
            }
            out
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(out: &mut String, chart: &Chart, ox: f64) {
    let pts = || chart.series.iter().flat_map(|s| s.points.iter());
    let xa = Axis::fit(pts().map(|p| p.0), chart.log_x);
    let ya = Axis::fit(pts().map(|p| p.1), chart.log_y);
    let (x0, x1) = (ox + MARGIN_L, ox + PANEL_W - MARGIN_R);
    let (y0, y1) = (MARGIN_T, PANEL_H - MARGIN_B);
    let px = |f: f64| x0 + f * (x1 - x0);
    let py = |f: f64| y1 - f * (y1 - y0);

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20.00" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        esc(&chart.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        x1 - x0,
        y1 - y0
    );
    for (v, label) in xa.ticks() {
        if let Some(f) = xa.frac(v).filter(|f| (-1e-9..=1.0 + 1e-9).contains(f)) {
            let x = px(f);
            let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##, y1 + 4.0);
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{label}</text>"#,
                y1 + 15.0
            );
        }
    }
    for (v, label) in ya.ticks() {
        if let Some(f) = ya.frac(v).filter(|f| (-1e-9..=1.0 + 1e-9).contains(f)) {
            let y = py(f);
            let _ = writeln!(out, r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#444"/>"##, x0 - 4.0);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{label}</text>"#,
                x0 - 6.0,
                y + 3.5
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
        (x0 + x1) / 2.0,
        y1 + 32.0,
        esc(&chart.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        ox + 14.0,
        (y0 + y1) / 2.0,
        ox + 14.0,
        (y0 + y1) / 2.0,
        esc(&chart.y_label)
    );

    for (i, s) in chart.series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            match (xa.frac(x), ya.frac(y)) {
                (Some(fx), Some(fy)) => {
                    let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(fx), py(fy));
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
        let ly = y0 + 12.0 + LEGEND_STEP * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#,
            x1 - 110.0,
            x1 - 92.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
            x1 - 88.0,
            ly + 3.5,
            esc(&s.name)
        );
    }
}

/// Charts laid out left to right in one document.
pub fn render(charts: &[Chart]) -> String {
    let width = PANEL_W * charts.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{PANEL_H:.0}" viewBox="0 0 {width:.0} {PANEL_H:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, c) in charts.iter().enumerate() {
        panel(&mut out, c, PANEL_W * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_paths_and_skips_unplottable_points() {
        let chart = Chart {
            title: "a < b".into(),
            log_y: true,
            series: vec![Series {
                name: "s".into(),
                points: vec![(1.0, 1.0), (2.0, 0.0), (3.0, 10.0), (4.0, 100.0)],
            }],
            ..Default::default()
        };
        let svg = render(&[chart.clone(), chart]);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<path").count(), 2);
        // the zero breaks the line on a log axis, so each path restarts
        let moves: usize = svg
            .lines()
            .filter(|l| l.starts_with("<path"))
            .map(|l| l.matches('M').count())
            .sum();
        assert_eq!(moves, 4);
    }

    #[test]
    fn linear_ticks_are_round() {
        let a = Axis::fit([0.0, 1.0].into_iter(), false);
        let labels: Vec<String> = a.ticks().into_iter().map(|t| t.1).collect();
        assert_eq!(labels, ["0", "0.2", "0.4", "0.6", "0.8", "1"]);
    }
}
