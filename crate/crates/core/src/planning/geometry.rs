//! Planar points and convex polygons with separating-axis intersection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    /// Rotates by `yaw` about the origin, then translates by `origin`.
    pub fn transform(self, origin: Point2, yaw: f64) -> Point2 {
        let (s, c) = yaw.sin_cos();
        Point2::new(origin.x + c * self.x - s * self.y, origin.y + s * self.x + c * self.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(p: [f64; 2]) -> Self {
        Point2::new(p[0], p[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

const AREA_EPS: f64 = 1e-12;

impl ConvexPolygon {
    /// Accepts vertices in either winding; rejects fewer than three vertices,
    /// non-finite coordinates, zero area, and non-convex outlines.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidInput("polygon has non-finite vertices".into()));
        }
        let area2 = signed_area2(&vertices);
        if area2.abs() <= AREA_EPS {
            return Err(Error::InvalidInput("degenerate polygon with zero area".into()));
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) < -1e-12 {
                return Err(Error::InvalidInput("polygon is not convex".into()));
            }
        }
        Ok(Self { vertices })
    }

    /// Convex hull of `points` (Andrew's monotone chain).
    pub fn hull(points: &[Point2]) -> Result<Self> {
        let mut pts: Vec<Point2> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::InvalidInput("hull of fewer than 3 distinct points".into()));
        }
        let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
                Box::new(pts.iter())
            } else {
                Box::new(pts.iter().rev())
            };
            for &p in iter {
                while hull.len() >= start + 2 {
                    let a = hull[hull.len() - 2];
                    let b = hull[hull.len() - 1];
                    if (b - a).cross(p - b) <= 0.0 {
                        hull.pop();
                    } else {
                        break;
                    }
                }
                hull.push(p);
            }
            hull.pop();
        }
        Self::new(hull)
    }

    /// Axis-aligned rectangle `[min_x, max_x] x [min_y, max_y]`.
    pub fn rectangle(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        Self::new(vec![
            Point2::new(min_x, min_y),
            Point2::new(max_x, min_y),
            Point2::new(max_x, max_y),
            Point2::new(min_x, max_y),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area2(&self.vertices) / 2.0
    }

    /// Rigid motion of the polygon; convexity and winding are preserved.
    pub fn transformed(&self, origin: Point2, yaw: f64) -> ConvexPolygon {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|p| p.transform(origin, yaw)).collect(),
        }
    }

    /// Closed-set containment test.
    pub fn contains(&self, p: Point2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= 0.0
        })
    }

    /// Separating-axis test. Both polygons are closed sets, so touching
    /// boundaries count as an intersection.
    pub fn intersects(&self, other: &ConvexPolygon) -> bool {
        !has_separating_axis(self, other) && !has_separating_axis(other, self)
    }
}

impl TryFrom<Vec<Point2>> for ConvexPolygon {
    type Error = Error;

    fn try_from(v: Vec<Point2>) -> Result<Self> {
        ConvexPolygon::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Point2> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

/// Validating front-end for raw vertex lists.
pub fn polygons_intersect(a: &[Point2], b: &[Point2]) -> Result<bool> {
    let a = ConvexPolygon::new(a.to_vec())?;
    let b = ConvexPolygon::new(b.to_vec())?;
    Ok(a.intersects(&b))
}

fn has_separating_axis(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
    let n = a.vertices.len();
    (0..n).any(|i| {
        let edge = a.vertices[(i + 1) % n] - a.vertices[i];
        let axis = Point2::new(-edge.y, edge.x);
        let (min_a, max_a) = project(&a.vertices, axis);
        let (min_b, max_b) = project(&b.vertices, axis);
        max_a < min_b || max_b < min_a
    })
}

fn project(points: &[Point2], axis: Point2) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.dot(axis);
        (lo.min(d), hi.max(d))
    })
}

fn signed_area2(v: &[Point2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum()
}
