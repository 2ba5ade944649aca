//! Static SVG plots: a fixed 800x800 view box with the data transform
//! recorded in a metadata element.

use std::fmt::Write;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

pub struct Plot {
    scale: f64,
    cx: f64,
    cy: f64,
    body: String,
}

impl Plot {
    /// Fits every point of `extent` into the view box, preserving aspect.
    pub fn new(extent: &[[f64; 2]]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in extent {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if !lo[0].is_finite() {
            lo = [-1.0, -1.0];
            hi = [1.0, 1.0];
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        Self {
            scale: (SIZE - 2.0 * MARGIN) / span,
            cx: 0.5 * (lo[0] + hi[0]),
            cy: 0.5 * (lo[1] + hi[1]),
            body: String::new(),
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (SIZE / 2.0 + (p[0] - self.cx) * self.scale, SIZE / 2.0 - (p[1] - self.cy) * self.scale)
    }

    pub fn polygon(&mut self, pts: &[[f64; 2]], stroke: &str, fill: &str) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" stroke="{stroke}" fill="{fill}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    pub fn dots(&mut self, pts: &[[f64; 2]], color: &str, r: f64) {
        for &p in pts {
            let (x, y) = self.map(p);
            let _ = writeln!(self.body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{color}"/>"#);
        }
    }

    pub fn finish(self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(out, "<!-- so-orbit {} -->", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 800" width="800" height="800">"#);
        let _ = writeln!(
            out,
            r#"<metadata>{{"transform":{{"scale":{},"center":[{},{}],"view":[800,800],"y_axis":"up"}}}}</metadata>"#,
            self.scale, self.cx, self.cy
        );
        let _ = writeln!(out, "<title>{title}</title>");
        let _ = writeln!(out, r#"<rect width="800" height="800" fill="white"/>"#);
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}
