//! Reference paths and the per-step reference trajectory the planner tracks.

use serde::{Deserialize, Serialize};

use super::geometry::Point2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
}

impl ReferencePoint {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Reference points for steps `k+1 ..= k+H_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrajectory {
    pub points: Vec<ReferencePoint>,
}

impl ReferenceTrajectory {
    pub fn horizon(&self) -> usize {
        self.points.len()
    }
}

/// Polyline with cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    points: Vec<Point2>,
    cumulative: Vec<f64>,
}

impl ReferencePath {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("reference path needs at least 2 points".into()));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for w in points.windows(2) {
            let seg = w[0].distance(w[1]);
            if !(seg.is_finite() && seg > 0.0) {
                return Err(Error::InvalidInput("reference path has repeated points".into()));
            }
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        Ok(Self { points, cumulative })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn end(&self) -> Point2 {
        *self.points.last().unwrap()
    }

    /// Arc length of the point on the path closest to `p`.
    pub fn project(&self, p: Point2) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (i, w) in self.points.windows(2).enumerate() {
            let d = w[1] - w[0];
            let len2 = d.dot(d);
            let t = ((p - w[0]).dot(d) / len2).clamp(0.0, 1.0);
            let q = Point2::new(w[0].x + t * d.x, w[0].y + t * d.y);
            let dist = q.distance(p);
            if dist < best.0 {
                best = (dist, self.cumulative[i] + t * len2.sqrt());
            }
        }
        best.1
    }

    /// Point at arc length `s`, clamped to the path ends.
    pub fn point_at(&self, s: f64) -> Point2 {
        let s = s.clamp(0.0, self.length());
        let i = match self.cumulative.iter().position(|&c| c >= s) {
            Some(0) | None => 1,
            Some(i) => i,
        };
        let (a, b) = (self.points[i - 1], self.points[i]);
        let span = self.cumulative[i] - self.cumulative[i - 1];
        let t = ((s - self.cumulative[i - 1]) / span).clamp(0.0, 1.0);
        Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
    }

    /// Reference for the next `horizon` steps when the vehicle is at `p`:
    /// points advance by `speed * dt` per step from the projection of `p` and
    /// stop at the path end, where the reference speed drops to zero.
    pub fn trajectory(&self, p: Point2, speed: f64, dt: f64, horizon: usize) -> ReferenceTrajectory {
        let s0 = self.project(p);
        let points = (1..=horizon)
            .map(|l| {
                let s = s0 + speed * dt * l as f64;
                let at_end = s >= self.length();
                let q = self.point_at(s);
                ReferencePoint {
                    x: q.x,
                    y: q.y,
                    speed: if at_end { 0.0 } else { speed },
                }
            })
            .collect();
        ReferenceTrajectory { points }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_path() -> ReferencePath {
        ReferencePath::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn projection_and_interpolation() {
        let path = l_path();
        assert_eq!(path.length(), 2.0);
        assert_eq!(path.project(Point2::new(0.5, 0.2)), 0.5);
        assert_eq!(path.project(Point2::new(1.3, 0.5)), 1.5);
        assert_eq!(path.project(Point2::new(-1.0, 0.0)), 0.0);
        assert_eq!(path.point_at(1.5), Point2::new(1.0, 0.5));
        assert_eq!(path.point_at(5.0), Point2::new(1.0, 1.0));
        assert_eq!(path.point_at(0.0), Point2::new(0.0, 0.0));
    }

    #[test]
    fn trajectory_clamps_at_end() {
        let path = l_path();
        let r = path.trajectory(Point2::new(1.0, 0.5), 0.5, 0.2, 8);
        assert_eq!(r.horizon(), 8);
        assert_eq!(r.points[0].speed, 0.5);
        assert!((r.points[0].y - 0.6).abs() < 1e-12);
        assert_eq!(r.points[7].position(), Point2::new(1.0, 1.0));
        assert_eq!(r.points[7].speed, 0.0);
    }

    #[test]
    fn rejects_short_or_repeated_paths() {
        assert!(ReferencePath::new(vec![Point2::new(0.0, 0.0)]).is_err());
        assert!(ReferencePath::new(vec![Point2::new(0.0, 0.0), Point2::new(0.0, 0.0)]).is_err());
    }
}
