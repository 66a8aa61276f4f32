//! Minimal deterministic SVG line plots: fixed canvas, fixed palette, fixed
//! number formatting.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn transform(v: f64, log: bool) -> Option<f64> {
    if !v.is_finite() {
        return None;
    }
    if log {
        (v > 0.0).then(|| v.log10())
    } else {
        Some(v)
    }
}

fn range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        lo -= 0.5;
        hi += 0.5;
    }
    Some((lo, hi))
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{:.1}", v).replace(".0", "")
    } else if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// `None` when no series has a plottable point (non-finite values, and
/// non-positive values on log axes, are dropped).
pub fn line_plot(spec: &PlotSpec, series: &[Series]) -> Option<String> {
    let data: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().filter_map(|&(x, y)| Some((transform(x, spec.log_x)?, transform(y, spec.log_y)?))).collect())
        .collect();
    let (x0, x1) = range(data.iter().flatten().map(|p| p.0))?;
    let (y0, y1) = range(data.iter().flatten().map(|p| p.1))?;
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, esc(&spec.title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP, TOP + ph);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ =
            writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(xv, spec.log_x));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, tick_label(yv, spec.log_y));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        esc(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        esc(&spec.y_label)
    );
    for (i, (ser, pts)) in series.iter().zip(&data).enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        }
        if pts.len() <= 40 {
            for &(x, y) in pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, sx(x), sy(y));
            }
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, esc(&ser.label));
    }
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(log: bool) -> PlotSpec {
        PlotSpec { title: "t <1>".into(), x_label: "x".into(), y_label: "y".into(), log_x: log, log_y: log }
    }

    #[test]
    fn empty_data_gives_no_plot() {
        assert!(line_plot(&spec(false), &[]).is_none());
        assert!(line_plot(&spec(false), &[Series::new("a", vec![])]).is_none());
        assert!(line_plot(&spec(true), &[Series::new("a", vec![(1.0, -1.0), (f64::NAN, 1.0)])]).is_none());
    }

    #[test]
    fn deterministic_and_escaped() {
        let s = [Series::new("a&b", vec![(1.0, 2.0), (10.0, 20.0), (100.0, 5.0)])];
        let a = line_plot(&spec(true), &s).unwrap();
        assert_eq!(a, line_plot(&spec(true), &s).unwrap());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("a&amp;b") && a.contains("t &lt;1&gt;"));
        assert_eq!(a.matches("<circle").count(), 3);
    }

    #[test]
    fn single_point_is_drawn() {
        let a = line_plot(&spec(false), &[Series::new("a", vec![(1.0, 1.0)])]).unwrap();
        assert_eq!(a.matches("<circle").count(), 1);
        assert!(!a.contains("<polyline"));
    }

    #[test]
    fn tick_labels() {
        assert_eq!(tick_label(-3.0, true), "1e-3");
        assert_eq!(tick_label(0.5, false), "0.5");
        assert_eq!(tick_label(2.0, false), "2");
        assert_eq!(tick_label(1e-6, false), "1.00e-6");
    }
}
