//! Planar convex geometry on `[f64; 2]` points: hulls, half-plane
//! clipping and distances.

pub type Point = [f64; 2];

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Convex polygon, vertices counter-clockwise. May degenerate to a
/// segment (two vertices) or a point (one vertex).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d = 0.0_f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(dist(v[i], v[j]));
            }
        }
        d
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        0.5 * (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>()
    }

    pub fn contains(&self, p: Point, slack: f64) -> bool {
        self.distance(p) <= slack
    }

    /// Euclidean distance from `p` to the polygon (zero inside).
    pub fn distance(&self, p: Point) -> f64 {
        let v = &self.vertices;
        match v.len() {
            0 => f64::INFINITY,
            1 => dist(p, v[0]),
            2 => segment_distance(p, v[0], v[1]),
            n => {
                let inside = (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= 0.0);
                if inside {
                    0.0
                } else {
                    (0..n).map(|i| segment_distance(p, v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    /// `max_{v in self} dist(v, other)`; for convex sets this is the
    /// one-sided Hausdorff distance.
    pub fn excess_over(&self, other: &Polygon) -> f64 {
        self.vertices.iter().map(|&p| other.distance(p)).fold(0.0, f64::max)
    }

    /// Keeps the part with `d . x <= r`.
    pub fn clip(&self, d: Point, r: f64) -> Polygon {
        let v = &self.vertices;
        let n = v.len();
        let f = |p: Point| d[0] * p[0] + d[1] * p[1] - r;
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let (fa, fb) = (f(a), f(b));
            if fa <= 0.0 {
                out.push(a);
            }
            if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
                let t = fa / (fa - fb);
                out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        Polygon { vertices: dedup(out) }
    }
}

fn dedup(mut v: Vec<Point>) -> Vec<Point> {
    v.dedup_by(|a, b| dist(*a, *b) <= 1e-15 * (1.0 + a[0].abs().max(a[1].abs())));
    while v.len() > 1 && dist(v[0], *v.last().unwrap()) <= 1e-15 * (1.0 + v[0][0].abs().max(v[0][1].abs())) {
        v.pop();
    }
    v
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[Point]) -> Polygon {
    let mut pts: Vec<Point> = points.iter().copied().filter(|p| p[0].is_finite() && p[1].is_finite()).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return Polygon { vertices: pts };
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Polygon { vertices: lower }
}

/// Intersection of the half-planes `{ x : (cos t, sin t) . x <= r }`.
///
/// Directions closer than `1e-12` rad are merged keeping the smaller
/// bound. Each bound is relaxed by a few ulps of the data scale so that a
/// region collapsing to a point or segment is not lost to roundoff.
pub fn halfplane_region(constraints: &[(f64, f64)]) -> Polygon {
    if constraints.is_empty() {
        return Polygon { vertices: Vec::new() };
    }
    let mut cs: Vec<(f64, f64)> =
        constraints.iter().map(|&(t, r)| (t.rem_euclid(std::f64::consts::TAU), r)).collect();
    cs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pruned: Vec<(f64, f64)> = Vec::with_capacity(cs.len());
    for (t, r) in cs {
        match pruned.last_mut() {
            Some(last) if (t - last.0).abs() <= 1e-12 => last.1 = last.1.min(r),
            _ => pruned.push((t, r)),
        }
    }
    let scale = pruned.iter().fold(1.0_f64, |m, c| m.max(c.1.abs()));
    let bound = 4.0 * scale + 1.0;
    let slack = 64.0 * f64::EPSILON * scale;
    let mut poly = Polygon { vertices: vec![[-bound, -bound], [bound, -bound], [bound, bound], [-bound, bound]] };
    for (t, r) in pruned {
        let (s, c) = t.sin_cos();
        poly = poly.clip([c, s], r + slack);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hull_of_square_with_interior() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h.vertices.len(), 4);
        assert!((h.area() - 1.0).abs() < 1e-15);
        assert_eq!(h.distance([0.5, 0.5]), 0.0);
        assert!((h.distance([2.0, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_from_halfplanes() {
        let cs: Vec<(f64, f64)> = (0..720).map(|k| (2.0 * PI * k as f64 / 720.0, 1.0)).collect();
        let p = halfplane_region(&cs);
        assert!((p.area() - PI).abs() < 1e-4);
        for v in &p.vertices {
            let r = v[0].hypot(v[1]);
            assert!((1.0..1.0 + 1e-4).contains(&r));
        }
    }

    #[test]
    fn point_region() {
        let cs: Vec<(f64, f64)> = (0..16).map(|k| (2.0 * PI * k as f64 / 16.0, 0.0)).collect();
        let p = halfplane_region(&cs);
        assert!(!p.is_empty());
        assert!(p.diameter() < 1e-12);
        assert!(p.distance([0.0, 0.0]) < 1e-12);
    }

    #[test]
    fn duplicate_directions_keep_tighter_bound() {
        let cs = [(0.0, 2.0), (1e-13, 1.0), (PI / 2.0, 1.0), (PI, 1.0), (1.5 * PI, 1.0)];
        let p = halfplane_region(&cs);
        assert!(p.vertices.iter().all(|v| v[0] <= 1.0 + 1e-12));
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(convex_hull(&[[1.0, 1.0]; 5]).vertices.len(), 1);
        let seg = convex_hull(&[[0.0, 0.0], [1.0, 1.0], [0.5, 0.5]]);
        assert_eq!(seg.vertices.len(), 2);
        assert!((seg.distance([1.0, 0.0]) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
