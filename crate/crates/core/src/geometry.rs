//! Planar convex geometry: upper concave envelopes and convex hulls.

use crate::error::{Error, Result};

pub type Point = (f64, f64);

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn sorted_dedup(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    pts.dedup();
    pts
}

/// Nondecreasing concave majorant of a point set.
///
/// The envelope is the upper hull up to its highest vertex and is
/// extended flat to the right of it. It is undefined left of the smallest
/// abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    vertices: Vec<Point>,
}

impl Envelope {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Envelope value at `x`, or `None` when `x` lies left of every point.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let v = &self.vertices;
        if x < v[0].0 {
            return None;
        }
        let last = v[v.len() - 1];
        if x >= last.0 {
            return Some(last.1);
        }
        let i = v.partition_point(|p| p.0 <= x);
        let (a, b) = (v[i - 1], v[i]);
        let t = (x - a.0) / (b.0 - a.0);
        Some(a.1 + t * (b.1 - a.1))
    }

    /// Highest point.
    pub fn peak(&self) -> Point {
        self.vertices[self.vertices.len() - 1]
    }
}

/// Upper concave envelope, truncated at its maximum and extended flat.
pub fn upper_concave_envelope(points: &[Point]) -> Result<Envelope> {
    if points.is_empty() {
        return Err(Error::Empty("envelope needs at least one point".into()));
    }
    let pts = sorted_dedup(points);
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        // Same abscissa: only the highest matters, and sorting puts it last.
        while let Some(&last) = hull.last() {
            if last.0 == p.0 {
                hull.pop();
            } else {
                break;
            }
        }
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let peak = hull
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if p.1 > hull[best].1 { i } else { best });
    hull.truncate(peak + 1);
    Ok(Envelope { vertices: hull })
}

/// Convex polygon with vertices in counter-clockwise order.
///
/// Degenerate inputs give a one- or two-vertex hull.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Euclidean distance from `p` to the polygon (0 inside).
    pub fn distance(&self, p: Point) -> f64 {
        let v = &self.vertices;
        match v.len() {
            1 => return dist(p, v[0]),
            2 => return segment_distance(p, v[0], v[1]),
            _ => {}
        }
        let n = v.len();
        let inside = (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= 0.0);
        if inside {
            return 0.0;
        }
        (0..n)
            .map(|i| segment_distance(p, v[i], v[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Whether the whole segment `a`–`b` lies within `tol` of the polygon.
    pub fn contains_segment(&self, a: Point, b: Point, tol: f64) -> bool {
        // The polygon is convex, so checking the endpoints suffices.
        self.contains(a, tol) && self.contains(b, tol)
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    dist(p, (a.0 + t * dx, a.1 + t * dy))
}

/// Turns flatter than this count as collinear.
const COLLINEAR_TOL: f64 = 1e-12;

/// Andrew's monotone chain. Collinear boundary points are dropped.
pub fn convex_hull(points: &[Point]) -> Result<ConvexPolygon> {
    if points.is_empty() {
        return Err(Error::Empty("convex hull needs at least one point".into()));
    }
    let pts = sorted_dedup(points);
    if pts.len() <= 2 {
        return Ok(ConvexPolygon { vertices: pts });
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= COLLINEAR_TOL {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= COLLINEAR_TOL
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    Ok(ConvexPolygon { vertices: hull })
}
