//! n-dimensional geometric kernel.
//!
//! Obstacles are closed sets: every containment predicate is boundary
//! inclusive with tolerance [`EPS`]. Polytopes are stored in H-representation
//! with unit normals and a cached vertex list; exact volume and surface
//! measure are available for n <= 3.

mod enclosing;
mod motion;
mod polyconvex;
mod polytope;

pub use enclosing::min_enclosing_ball;
pub use motion::RigidMotion;
pub use polyconvex::PolyconvexSet;
pub use polytope::ConvexPolytope;
pub(crate) use polytope::{enumerate_vertices, max_pairwise_distance};

use crate::error::{Error, Result};

/// Tolerance for containment, orthonormality and boundary predicates.
pub const EPS: f64 = 1e-9;

/// A point in configuration space.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("point must have at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("coordinate {i} is not finite")));
        }
        Ok(Self { coords })
    }

    /// Builds a point without validation. Callers guarantee finite, nonempty input.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Self { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Self::from_vec(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.coords, &other.coords)
    }

    /// `self + t * dir`
    pub fn along(&self, dir: &[f64], t: f64) -> Point {
        Point::from_vec(self.coords.iter().zip(dir).map(|(x, d)| x + t * d).collect())
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point::from_vec(c.to_vec())
    }
}

impl From<[f64; 3]> for Point {
    fn from(c: [f64; 3]) -> Self {
        Point::from_vec(c.to_vec())
    }
}

/// Closed half-space `{x : normal . x <= offset}` with unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    normal: Vec<f64>,
    offset: f64,
}

impl HalfSpace {
    /// Normalizes `normal` to unit length and rescales `offset` accordingly.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() {
            return Err(Error::invalid("half-space normal is empty"));
        }
        if !offset.is_finite() || normal.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("half-space has non-finite entries"));
        }
        let len = norm(&normal);
        if len <= EPS {
            return Err(Error::invalid("half-space normal has zero length"));
        }
        Ok(Self {
            normal: normal.iter().map(|c| c / len).collect(),
            offset: offset / len,
        })
    }

    pub(crate) fn unit(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Signed distance of `x` past the bounding hyperplane (positive outside).
    pub fn excess(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub(crate) fn approx_eq(&self, other: &HalfSpace, tol: f64) -> bool {
        (self.offset - other.offset).abs() <= tol
            && self.normal.iter().zip(&other.normal).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Closed ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("ball radius must be positive"));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.center.distance(x) <= self.radius + EPS
    }

    /// Whether the closed segment meets the ball.
    pub fn meets_segment(&self, seg: &Segment) -> bool {
        segment_point_distance(seg.p.coords(), seg.q.coords(), self.center.coords()) <= self.radius
    }
}

/// Line segment between two points. Zero length is allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub p: Point,
    pub q: Point,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: q.dim(),
            });
        }
        Ok(Self { p, q })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn length(&self) -> f64 {
        self.p.distance(&self.q)
    }

    pub fn midpoint(&self) -> Point {
        Point::from_vec(
            self.p
                .coords()
                .iter()
                .zip(self.q.coords())
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn segment_point_distance(p: &[f64], q: &[f64], x: &[f64]) -> f64 {
    let pq = sub(q, p);
    let len2 = dot(&pq, &pq);
    if len2 == 0.0 {
        return distance(p, x);
    }
    let t = (dot(&sub(x, p), &pq) / len2).clamp(0.0, 1.0);
    let closest: Vec<f64> = p.iter().zip(&pq).map(|(a, d)| a + t * d).collect();
    distance(&closest, x)
}

/// Affine rank of a point set, using Gram-Schmidt with tolerance `tol`.
pub(crate) fn affine_rank(points: &[&[f64]], tol: f64) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &points[1..] {
        let mut v = sub(p, first);
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let len = norm(&v);
        if len > tol {
            basis.push(v.iter().map(|c| c / len).collect());
            if basis.len() == first.len() {
                break;
            }
        }
    }
    basis.len()
}
