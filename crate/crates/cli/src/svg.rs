//! Minimal self-contained SVG scatter plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 60.0;

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Already transformed coordinates (e.g. logs).
    pub points: &'a [(f64, f64)],
    /// Fitted `y = slope x + intercept`.
    pub fit: Option<(f64, f64)>,
    /// Reference slopes drawn through the centroid of the points.
    pub references: &'a [(String, f64)],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot<'_> {
    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self.points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let mx = ((x1 - x0) * 0.08).max(1e-6);
        let my = ((y1 - y0) * 0.08).max(1e-6);
        let (x0, x1, y0, y1) = (x0 - mx, x1 + mx, y0 - my, y1 + my);
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<defs><clipPath id="area"><rect x="{PAD}" y="{PAD}" width="{}" height="{}"/></clipPath></defs>"#, W - 2.0 * PAD, H - 2.0 * PAD);
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(self.title));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(self.y_label)
        );
        for k in 0..=4 {
            let x = x0 + (x1 - x0) * k as f64 / 4.0;
            let y = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{x:.2}</text>"#, sx(x), H - PAD + 16.0);
            let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{y:.2}</text>"#, PAD - 6.0, sy(y) + 4.0);
        }

        let line = |s: &mut String, slope: f64, intercept: f64, style: &str| {
            let (ya, yb) = (slope * x0 + intercept, slope * x1 + intercept);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style} clip-path="url(#area)"/>"#,
                sx(x0),
                sy(ya),
                sx(x1),
                sy(yb)
            );
        };
        let mut legend = Vec::new();
        if !pts.is_empty() {
            let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
            let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
            for (i, (label, slope)) in self.references.iter().enumerate() {
                let grey = 110 + 40 * (i % 3);
                let style = format!(r#"stroke="rgb({grey},{grey},{grey})" stroke-dasharray="5,4""#);
                line(&mut s, *slope, cy - slope * cx, &style);
                legend.push((format!("slope {label}"), style));
            }
        }
        if let Some((slope, intercept)) = self.fit {
            let style = r#"stroke="crimson" stroke-width="2""#.to_string();
            line(&mut s, slope, intercept, &style);
            legend.push((format!("fit, slope {slope:.3}"), style));
        }
        for &(x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#, sx(x), sy(y));
        }
        for (i, (label, style)) in legend.iter().enumerate() {
            let y = PAD + 16.0 + 16.0 * i as f64;
            let _ = writeln!(s, r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" {style}/>"#, PAD + 10.0, PAD + 34.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, PAD + 40.0, y + 4.0, escape(label));
        }
        s.push_str("</svg>\n");
        s
    }
}
