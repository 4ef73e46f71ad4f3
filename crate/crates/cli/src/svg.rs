//! Self-contained SVG documents with inline styles.

use std::fmt::Write;

use shapeflow::Vec2;

/// Maps world coordinates into a `width`-pixel-wide viewport with `y` up.
#[derive(Debug, Clone, Copy)]
pub struct Canvas {
    min: Vec2,
    scale: f64,
    pub width: f64,
    pub height: f64,
    margin: f64,
}

impl Canvas {
    /// Fits the bounding box of `points` with a margin of 5% of the width.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a Vec2>, width: f64) -> Self {
        let (mut lo, mut hi) = (
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let margin = 0.05 * width;
        let scale = (width - 2.0 * margin) / span;
        let height = (hi.y - lo.y) * scale + 2.0 * margin;
        Self {
            min: Vec2::new(lo.x, hi.y),
            scale,
            width,
            height,
            margin,
        }
    }

    pub fn map(&self, p: Vec2) -> (f64, f64) {
        (
            self.margin + (p.x - self.min.x) * self.scale,
            self.margin + (self.min.y - p.y) * self.scale,
        )
    }
}

/// An SVG document under construction.
pub struct Svg {
    canvas: Canvas,
    body: String,
}

impl Svg {
    pub fn new(canvas: Canvas) -> Self {
        Self {
            canvas,
            body: String::new(),
        }
    }

    /// Closed polygon through `points`.
    pub fn polygon(&mut self, points: &[Vec2], style: &str) {
        let pts: Vec<String> = points.iter().map(|&p| self.point(p)).collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" style="{style}"/>"#,
            pts.join(" ")
        );
    }

    pub fn polyline(&mut self, points: &[Vec2], style: &str) {
        let pts: Vec<String> = points.iter().map(|&p| self.point(p)).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" style="{style}"/>"#,
            pts.join(" ")
        );
    }

    pub fn circle(&mut self, centre: Vec2, radius_px: f64, style: &str) {
        let (x, y) = self.canvas.map(centre);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{radius_px:.3}" style="{style}"/>"#
        );
    }

    /// Arrow from `from` along the world vector `v`, with a head sized to the
    /// shaft.
    pub fn arrow(&mut self, from: Vec2, v: Vec2, style: &str) {
        let len = v.norm();
        if len == 0.0 {
            return;
        }
        let tip = from + v;
        let dir = v * (1.0 / len);
        let head = 0.3 * len;
        let left = tip - dir * head + dir.rot_ccw() * (0.5 * head);
        let right = tip - dir * head - dir.rot_ccw() * (0.5 * head);
        let (a, b) = (self.point(from), self.point(tip));
        let _ = writeln!(
            self.body,
            r#"<path d="M {a} L {b} M {} L {b} L {}" style="{style}"/>"#,
            self.point(left),
            self.point(right)
        );
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.3}" y="{:.3}" style="font-family:sans-serif;font-size:{size:.1}px;fill:#222">{}</text>"#,
            at.0,
            at.1,
            escape(content)
        );
    }

    pub fn finish(self) -> String {
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#,
                "\n",
                r#"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" style="fill:#ffffff"/>"#,
                "\n{body}</svg>\n"
            ),
            w = self.canvas.width,
            h = self.canvas.height,
            body = self.body
        )
    }

    fn point(&self, p: Vec2) -> String {
        let (x, y) = self.canvas.map(p);
        format!("{x:.3},{y:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Diverging blue to white to red colour for `s` in `[-1, 1]`.
pub fn diverging(s: f64) -> String {
    let s = s.clamp(-1.0, 1.0);
    let (r, g, b) = if s < 0.0 {
        let k = -s;
        (255.0 * (1.0 - 0.8 * k), 255.0 * (1.0 - 0.6 * k), 255.0)
    } else {
        (255.0, 255.0 * (1.0 - 0.6 * s), 255.0 * (1.0 - 0.8 * s))
    };
    format!(
        "#{:02x}{:02x}{:02x}",
        r.round() as u8,
        g.round() as u8,
        b.round() as u8
    )
}

/// Sequential colour for `s` in `[0, 1]`, dark blue to orange.
pub fn sequential(s: f64) -> String {
    let s = s.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * s).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(30.0, 230.0),
        lerp(60.0, 120.0),
        lerp(160.0, 30.0)
    )
}
