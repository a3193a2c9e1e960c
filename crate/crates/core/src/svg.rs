//! Minimal SVG composition for the figure outputs.
//!
//! Numbers are written with a fixed number of decimals so identical inputs
//! always produce identical bytes.

use std::fmt::Write;

#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a (f64, f64)>) -> Option<Self> {
        let mut b: Option<Bounds> = None;
        for &(x, y) in points {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            b = Some(match b {
                None => Bounds { x_min: x, x_max: x, y_min: y, y_max: y },
                Some(b) => Bounds { x_min: b.x_min.min(x), x_max: b.x_max.max(x), y_min: b.y_min.min(y), y_max: b.y_max.max(y) },
            });
        }
        b.map(|b| b.padded())
    }

    pub fn union(self, other: Bounds) -> Bounds {
        Bounds {
            x_min: self.x_min.min(other.x_min),
            x_max: self.x_max.max(other.x_max),
            y_min: self.y_min.min(other.y_min),
            y_max: self.y_max.max(other.y_max),
        }
    }

    fn padded(self) -> Self {
        let dx = (self.x_max - self.x_min).max(1e-9);
        let dy = (self.y_max - self.y_min).max(1e-9);
        Bounds {
            x_min: self.x_min - 0.05 * dx,
            x_max: self.x_max + 0.05 * dx,
            y_min: self.y_min - 0.05 * dy,
            y_max: self.y_max + 0.05 * dy,
        }
    }
}

/// A plot canvas with data-space coordinates mapped onto a fixed pixel frame.
pub struct Plot {
    width: f64,
    height: f64,
    margin: f64,
    bounds: Bounds,
    body: String,
}

impl Plot {
    pub fn new(bounds: Bounds, width: f64, height: f64) -> Self {
        Plot { width, height, margin: 50.0, bounds, body: String::new() }
    }

    fn px(&self, x: f64) -> f64 {
        let b = &self.bounds;
        self.margin + (x - b.x_min) / (b.x_max - b.x_min) * (self.width - 2.0 * self.margin)
    }

    fn py(&self, y: f64) -> f64 {
        let b = &self.bounds;
        self.height - self.margin - (y - b.y_min) / (b.y_max - b.y_min) * (self.height - 2.0 * self.margin)
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let (cx, cy) = (self.px(x), self.py(y));
        let _ = writeln!(self.body, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{fill}"/>"#);
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let mut coords = String::new();
        for &(x, y) in pts {
            let _ = write!(coords, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width:.2}"/>"#,
            coords.trim_end()
        );
    }

    pub fn segment(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="{width:.2}"/>"#,
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1)
        );
    }

    /// Arrow from `a` to `b` in data space with a small head.
    pub fn arrow(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str) {
        let (x1, y1, x2, y2) = (self.px(a.0), self.py(a.1), self.px(b.0), self.py(b.1));
        let (dx, dy) = (x2 - x1, y2 - y1);
        let len = (dx * dx + dy * dy).sqrt();
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1.00"/>"#
        );
        if len > 1e-6 {
            let (ux, uy) = (dx / len, dy / len);
            let head = 4.0_f64.min(0.5 * len);
            let (hx1, hy1) = (x2 - head * (ux - 0.5 * uy), y2 - head * (uy + 0.5 * ux));
            let (hx2, hy2) = (x2 - head * (ux + 0.5 * uy), y2 - head * (uy - 0.5 * ux));
            let _ =
                writeln!(self.body, r#"<polygon points="{x2:.2},{y2:.2} {hx1:.2},{hy1:.2} {hx2:.2},{hy2:.2}" fill="{stroke}"/>"#);
        }
    }

    /// Filled rectangle spanning data coordinates `[x0, x1] x [y0, y1]`.
    pub fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, fill: &str) {
        let (a, b) = (self.px(x0), self.px(x1));
        let (c, d) = (self.py(y1), self.py(y0));
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="black" stroke-width="0.50"/>"#,
            a.min(b),
            c.min(d),
            (b - a).abs(),
            (d - c).abs()
        );
    }

    /// Dashed vertical line across the plot area at data coordinate `x`.
    pub fn dashed(&mut self, x: f64, stroke: &str) {
        let px = self.px(x);
        let (top, bottom) = (self.margin, self.height - self.margin);
        let _ = writeln!(
            self.body,
            r#"<line x1="{px:.2}" y1="{top:.2}" x2="{px:.2}" y2="{bottom:.2}" stroke="{stroke}" stroke-width="1.00" stroke-dasharray="4 3"/>"#
        );
    }

    pub fn error_bar(&mut self, x: f64, lo: f64, hi: f64, stroke: &str) {
        self.segment((x, lo), (x, hi), stroke, 1.0);
    }

    pub fn finish(self, title: &str, x_label: &str, y_label: &str) -> String {
        let (w, h, m) = (self.width, self.height, self.margin);
        let b = self.bounds;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<rect x="{m:.0}" y="{m:.0}" width="{:.0}" height="{:.0}" fill="none" stroke="black"/>"#,
            w - 2.0 * m,
            h - 2.0 * m
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            w / 2.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
            w / 2.0,
            h - 12.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {:.1})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            escape(y_label)
        );
        for (v, anchor_x, anchor_y) in [(b.x_min, m, h - m + 15.0), (b.x_max, w - m, h - m + 15.0)] {
            let _ = writeln!(
                out,
                r#"<text x="{anchor_x:.1}" y="{anchor_y:.1}" text-anchor="middle" font-family="sans-serif" font-size="10">{v:.2}</text>"#
            );
        }
        for (v, y) in [(b.y_min, h - m), (b.y_max, m)] {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{y:.1}" text-anchor="end" font-family="sans-serif" font-size="10">{v:.2}</text>"#,
                m - 4.0
            );
        }
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_plots_are_byte_identical() {
        let draw = || {
            let b = Bounds::from_points(&[(0.0, 0.0), (1.0, 2.0)]).unwrap();
            let mut p = Plot::new(b, 400.0, 300.0);
            p.circle(0.5, 1.0, 2.0, "red");
            p.arrow((0.0, 0.0), (1.0, 1.0), "black");
            p.polyline(&[(0.0, 0.0), (0.5, 1.5), (1.0, 2.0)], "blue", 1.0);
            p.finish("t", "x", "y")
        };
        assert_eq!(draw(), draw());
        assert!(draw().starts_with("<svg"));
    }
}
