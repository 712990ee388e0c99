//! Minimal hand-written SVG charts. The CSV files are authoritative; these
//! are for eyeballing.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{BestOfAllShare, Scatter, WindowComparison};

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Frame {
    x_max: f64,
    y_max: f64,
    out: String,
}

impl Frame {
    fn new(title: &str, x_max: f64, y_max: f64, x_label: &str, y_label: &str) -> Frame {
        let x_max = if x_max > 0.0 { x_max } else { 1.0 };
        let y_max = if y_max > 0.0 { y_max } else { 1.0 };
        let mut out = String::new();
        let _ = write!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = write!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = write!(
            out,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let _ = write!(
            out,
            r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{0}" stroke="black"/>"#,
            H - PAD,
            W - PAD
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text><text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 12.0,
            escape(x_label),
            H / 2.0,
            H / 2.0,
            escape(y_label)
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text><text x="{}" y="{}" text-anchor="end">0</text><text x="{}" y="{}" text-anchor="middle">{:.3}</text>"#,
            PAD - 4.0,
            PAD + 4.0,
            y_max,
            PAD - 4.0,
            H - PAD,
            W - PAD,
            H - PAD + 16.0,
            x_max
        );
        Frame { x_max, y_max, out }
    }

    fn x(&self, v: f64) -> f64 {
        PAD + v / self.x_max * (W - 2.0 * PAD)
    }

    fn y(&self, v: f64) -> f64 {
        H - PAD - v / self.y_max * (H - 2.0 * PAD)
    }

    fn legend(&mut self, names: &[&str]) {
        for (i, name) in names.iter().enumerate() {
            let y = PAD + 16.0 * i as f64;
            let _ = write!(
                self.out,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
                W - PAD - 120.0,
                y - 9.0,
                PALETTE[i % PALETTE.len()],
                W - PAD - 105.0,
                y,
                escape(name)
            );
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

pub fn cdf_chart(title: &str, points: &[(f64, f64)]) -> String {
    let x_max = points.last().map_or(1.0, |p| p.0.max(1e-9));
    let mut f = Frame::new(title, x_max, 1.0, "WAPE", "fraction");
    let mut path = format!("M{:.2},{:.2}", f.x(0.0), f.y(0.0));
    let mut prev = 0.0;
    for (t, frac) in points {
        let _ = write!(
            path,
            " L{:.2},{:.2} L{:.2},{:.2}",
            f.x(*t),
            f.y(prev),
            f.x(*t),
            f.y(*frac)
        );
        prev = *frac;
    }
    let _ = write!(
        f.out,
        r#"<path d="{path}" fill="none" stroke="{}" stroke-width="2"/>"#,
        PALETTE[0]
    );
    f.finish()
}

pub fn scatter_chart(title: &str, scatter: &Scatter) -> String {
    let x_max = scatter.points.iter().map(|p| p.rank).max().unwrap_or(1) as f64;
    let y_max = scatter.points.iter().map(|p| p.value).fold(0.0, f64::max);
    let mut f = Frame::new(title, x_max, y_max, "importance rank", "WAPE");
    let models: Vec<&str> = scatter.trends.iter().map(|t| t.model.as_str()).collect();
    let color: BTreeMap<&str, &str> = models
        .iter()
        .enumerate()
        .map(|(i, m)| (*m, PALETTE[i % PALETTE.len()]))
        .collect();
    for p in &scatter.points {
        let _ = write!(
            f.out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.7"/>"#,
            f.x(p.rank as f64),
            f.y(p.value),
            color.get(p.model.as_str()).unwrap_or(&"gray")
        );
    }
    for t in &scatter.trends {
        let y0 = (t.intercept + t.slope).clamp(0.0, f.y_max);
        let y1 = (t.intercept + t.slope * x_max).clamp(0.0, f.y_max);
        let _ = write!(
            f.out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"/>"#,
            f.x(1.0),
            f.y(y0),
            f.x(x_max),
            f.y(y1),
            color[t.model.as_str()]
        );
    }
    f.legend(&models);
    f.finish()
}

pub fn stacked_shares(title: &str, shares: &[BestOfAllShare]) -> String {
    let x_max = shares.iter().map(|s| s.top_k).max().unwrap_or(1) as f64;
    let mut f = Frame::new(title, x_max, 1.0, "top k items", "share");
    let bar = ((W - 2.0 * PAD) / x_max.max(1.0) * 0.8).max(1.0);
    let mut models: Vec<&str> = Vec::new();
    for s in shares {
        let mut base = 0.0;
        for (i, (m, v)) in s.shares.iter().enumerate() {
            if !models.contains(&m.as_str()) {
                models.push(m);
            }
            let top = base + v;
            let _ = write!(
                f.out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                f.x(s.top_k as f64) - bar,
                f.y(top),
                bar,
                f.y(base) - f.y(top),
                PALETTE[i % PALETTE.len()]
            );
            base = top;
        }
    }
    f.legend(&models);
    f.finish()
}

pub fn window_bars(w: &WindowComparison) -> String {
    let y_max = w
        .rows
        .iter()
        .flat_map(|r| [r.wape_window_a, r.wape_window_b])
        .flatten()
        .fold(0.0, f64::max);
    let n = w.rows.len().max(1) as f64;
    let title = format!("{} in {} vs {}", w.metric, w.window_a, w.window_b);
    let mut f = Frame::new(&title, n, y_max, "model", "WAPE");
    let slot = (W - 2.0 * PAD) / n;
    for (i, r) in w.rows.iter().enumerate() {
        let x0 = PAD + slot * i as f64 + slot * 0.1;
        for (j, v) in [r.wape_window_a, r.wape_window_b].into_iter().enumerate() {
            let v = v.unwrap_or(0.0);
            let _ = write!(
                f.out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x0 + j as f64 * slot * 0.4,
                f.y(v),
                slot * 0.4,
                f.y(0.0) - f.y(v),
                PALETTE[j]
            );
        }
        let _ = write!(
            f.out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x0 + slot * 0.4,
            H - PAD + 30.0,
            escape(&r.model)
        );
    }
    f.legend(&["window a", "window b"]);
    f.finish()
}
