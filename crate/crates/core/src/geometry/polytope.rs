use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use super::{affine_rank, check_dim, cross3, distance, dot, norm, sub, HalfSpace, Point, EPS};
use crate::error::{Error, Result};

/// Bounded intersection of half-spaces with nonempty interior.
///
/// Every stored half-space supports a facet. `facets[i]` lists the indices of
/// the vertices lying on half-space `i`; for n = 2 and n = 3 they are ordered
/// around the facet boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolytope {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<Point>,
    facets: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Redundancy {
    Reject,
    Prune,
}

/// Vertex enumeration result: candidate vertices plus whether any of them
/// sits on the artificial bounding box (the set is unbounded).
pub(crate) struct Enumeration {
    pub vertices: Vec<Vec<f64>>,
    pub unbounded: bool,
}

fn scale_of(hs: &[HalfSpace]) -> f64 {
    1.0 + hs.iter().map(|h| h.offset().abs()).fold(0.0, f64::max)
}

fn combinations(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + m - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Enumerates vertices of `{x : h.x <= b for h in hs}` by solving every
/// n-subset of boundary hyperplanes, with an enclosing box to detect
/// unboundedness. Works in any dimension; cost grows as C(m + 2n, n).
pub(crate) fn enumerate_vertices(dim: usize, hs: &[HalfSpace]) -> Enumeration {
    let scale = scale_of(hs);
    let big = 1e8 * scale;
    let feas_tol = EPS * scale;
    let merge_tol = 1e-7 * scale;

    let mut rows: Vec<(Vec<f64>, f64)> = hs.iter().map(|h| (h.normal().to_vec(), h.offset())).collect();
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        rows.push((e.clone(), big));
        e[j] = -1.0;
        rows.push((e, big));
    }

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut unbounded = false;
    combinations(rows.len(), dim, |pick| {
        let a = DMatrix::from_fn(dim, dim, |r, c| rows[pick[r]].0[c]);
        let b = DVector::from_fn(dim, |r, _| rows[pick[r]].1);
        let lu = a.lu();
        if lu.determinant().abs() < 1e-12 {
            return;
        }
        let Some(x) = lu.solve(&b) else { return };
        let x: Vec<f64> = x.iter().copied().collect();
        if x.iter().any(|c| !c.is_finite()) {
            return;
        }
        if hs.iter().any(|h| h.excess(&x) > feas_tol) {
            return;
        }
        if x.iter().any(|c| c.abs() > big + feas_tol) {
            return;
        }
        if vertices.iter().any(|v| distance(v, &x) <= merge_tol) {
            return;
        }
        if x.iter().any(|c| c.abs() >= big * (1.0 - 1e-9)) {
            unbounded = true;
        }
        vertices.push(x);
    });
    Enumeration { vertices, unbounded }
}

impl ConvexPolytope {
    /// Builds a polytope from irredundant half-spaces. A half-space that does
    /// not support a facet is reported by index.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        Self::build(dim, halfspaces, Redundancy::Reject)
    }

    /// Builds a polytope, silently dropping half-spaces that do not support a facet.
    pub fn from_halfspaces_pruned(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        Self::build(dim, halfspaces, Redundancy::Prune)
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn axis_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let dim = lo.len();
        let mut hs = Vec::with_capacity(2 * dim);
        for j in 0..dim {
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            hs.push(HalfSpace::new(e.clone(), hi[j])?);
            e[j] = -1.0;
            hs.push(HalfSpace::new(e, -lo[j])?);
        }
        Self::from_halfspaces(dim, hs)
    }

    /// Regular polygon with `sides` vertices on a circle, first vertex at angle `phase`.
    pub fn regular_polygon(sides: usize, circumradius: f64, center: [f64; 2], phase: f64) -> Result<Self> {
        if sides < 3 || !(circumradius > 0.0) {
            return Err(Error::invalid("regular polygon needs >= 3 sides and positive radius"));
        }
        let pts: Vec<Point> = (0..sides)
            .map(|k| {
                let a = phase + 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
                Point::from_vec(vec![
                    center[0] + circumradius * a.cos(),
                    center[1] + circumradius * a.sin(),
                ])
            })
            .collect();
        Self::from_vertices(&pts)
    }

    /// Convex hull of a point cloud (n <= 3).
    pub fn from_vertices(points: &[Point]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyInterior);
        };
        let dim = first.dim();
        for p in points {
            check_dim(dim, p.dim())?;
        }
        let hs = match dim {
            1 => {
                let lo = points.iter().map(|p| p.coords()[0]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p.coords()[0]).fold(f64::NEG_INFINITY, f64::max);
                if hi - lo <= EPS {
                    return Err(Error::EmptyInterior);
                }
                vec![HalfSpace::unit(vec![1.0], hi), HalfSpace::unit(vec![-1.0], -lo)]
            }
            2 => hull_2d(points)?,
            3 => hull_3d(points)?,
            n => return Err(Error::UnsupportedDimension(n)),
        };
        Self::from_halfspaces_pruned(dim, hs)
    }

    fn build(dim: usize, halfspaces: Vec<HalfSpace>, redundancy: Redundancy) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if halfspaces.is_empty() {
            return Err(Error::Unbounded);
        }
        for (index, h) in halfspaces.iter().enumerate() {
            if h.dim() != dim {
                return Err(Error::InvalidHalfSpace {
                    index,
                    reason: format!("normal has length {}, expected {dim}", h.dim()),
                });
            }
        }
        let en = enumerate_vertices(dim, &halfspaces);
        if en.vertices.is_empty() {
            return Err(Error::EmptyInterior);
        }
        if en.unbounded {
            return Err(Error::Unbounded);
        }
        let refs: Vec<&[f64]> = en.vertices.iter().map(|v| v.as_slice()).collect();
        let scale = scale_of(&halfspaces);
        if en.vertices.len() < dim + 1 || affine_rank(&refs, 1e-7 * scale) < dim {
            return Err(Error::EmptyInterior);
        }

        let tight_tol = 1e-7 * scale;
        let mut kept: Vec<HalfSpace> = Vec::with_capacity(halfspaces.len());
        let mut facets: Vec<Vec<usize>> = Vec::with_capacity(halfspaces.len());
        for (index, h) in halfspaces.iter().enumerate() {
            let duplicate = kept.iter().any(|k| k.approx_eq(h, 1e-9));
            let tight: Vec<usize> = (0..en.vertices.len())
                .filter(|&v| h.excess(&en.vertices[v]).abs() <= tight_tol)
                .collect();
            let tight_refs: Vec<&[f64]> = tight.iter().map(|&v| en.vertices[v].as_slice()).collect();
            let is_facet = !duplicate && !tight.is_empty() && affine_rank(&tight_refs, 1e-7 * scale) + 1 >= dim;
            if is_facet {
                kept.push(h.clone());
                facets.push(tight);
            } else if redundancy == Redundancy::Reject {
                return Err(Error::RedundantHalfSpace { index });
            }
        }

        let vertices: Vec<Point> = en.vertices.into_iter().map(Point::from_vec).collect();
        let mut poly = Self {
            dim,
            halfspaces: kept,
            vertices,
            facets,
        };
        poly.order_boundary();
        Ok(poly)
    }

    pub(crate) fn from_parts(
        dim: usize,
        halfspaces: Vec<HalfSpace>,
        vertices: Vec<Point>,
        facets: Vec<Vec<usize>>,
    ) -> Self {
        Self {
            dim,
            halfspaces,
            vertices,
            facets,
        }
    }

    /// Sorts vertices counter-clockwise (n = 2) and orders each facet's
    /// vertex cycle (n = 3).
    fn order_boundary(&mut self) {
        match self.dim {
            2 => {
                let c = mean(&self.vertices);
                let mut order: Vec<usize> = (0..self.vertices.len()).collect();
                let angle = |p: &Point| (p.coords()[1] - c[1]).atan2(p.coords()[0] - c[0]);
                order.sort_by(|&a, &b| {
                    angle(&self.vertices[a])
                        .partial_cmp(&angle(&self.vertices[b]))
                        .unwrap_or(Ordering::Equal)
                });
                let mut remap = vec![0; order.len()];
                for (new, &old) in order.iter().enumerate() {
                    remap[old] = new;
                }
                self.vertices = order.iter().map(|&i| self.vertices[i].clone()).collect();
                for f in &mut self.facets {
                    for v in f.iter_mut() {
                        *v = remap[*v];
                    }
                    f.sort_unstable();
                }
            }
            3 => {
                for (h, f) in self.halfspaces.iter().zip(self.facets.iter_mut()) {
                    let n = h.normal();
                    let pts: Vec<&[f64]> = f.iter().map(|&i| self.vertices[i].coords()).collect();
                    let c = mean_slices(&pts);
                    let u = any_perpendicular(n);
                    let w = cross3(n, &u);
                    let angle = |p: &[f64]| {
                        let d = sub(p, &c);
                        dot(&d, &w).atan2(dot(&d, &u))
                    };
                    f.sort_by(|&a, &b| {
                        angle(self.vertices[a].coords())
                            .partial_cmp(&angle(self.vertices[b].coords()))
                            .unwrap_or(Ordering::Equal)
                    });
                }
            }
            _ => {}
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Vertex indices incident to facet `i`.
    pub fn facet_vertices(&self, i: usize) -> &[usize] {
        &self.facets[i]
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        check_dim(self.dim, x.dim())?;
        Ok(self.contains_coords(x.coords()))
    }

    pub(crate) fn contains_coords(&self, x: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| h.excess(x) <= EPS)
    }

    /// Strictly inside, at least `EPS` from every facet plane.
    pub(crate) fn interior_coords(&self, x: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| h.excess(x) < -EPS)
    }

    /// Parameter interval `[t_in, t_out]` where `origin + t * dir` lies in the
    /// polytope. Rays parallel to a facet plane and within `EPS` of it are not
    /// clipped by that facet.
    pub(crate) fn clip_line(&self, origin: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for h in &self.halfspaces {
            let rate = dot(h.normal(), dir);
            let excess = h.excess(origin);
            if rate.abs() <= 1e-15 {
                if excess > EPS {
                    return None;
                }
                continue;
            }
            let t = -excess / rate;
            if rate > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    /// n-volume. Exact for n <= 3.
    pub fn volume(&self) -> Result<f64> {
        match self.dim {
            1 => Ok(self.extent_1d()),
            2 => Ok(polygon_area(&self.vertices)),
            3 => Ok(self.tetra_decomposition().iter().map(|(v, _)| v).sum()),
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// (n-1)-measure of the boundary: perimeter for n = 2, facet area sum for
    /// n = 3, and the number of boundary points (2) for n = 1.
    pub fn surface_measure(&self) -> Result<f64> {
        match self.dim {
            1 => Ok(2.0),
            2 | 3 => Ok((0..self.facets.len()).map(|i| self.facet_area(i)).sum()),
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// (n-1)-measure of facet `i` (edge length for n = 2).
    pub fn facet_area(&self, i: usize) -> f64 {
        let f = &self.facets[i];
        match self.dim {
            2 => {
                if f.len() < 2 {
                    return 0.0;
                }
                // Endpoints of an edge are its two extreme vertices.
                let mut best = 0.0;
                for a in 0..f.len() {
                    for b in a + 1..f.len() {
                        best = f64::max(best, self.vertices[f[a]].distance(&self.vertices[f[b]]));
                    }
                }
                best
            }
            3 => {
                let p0 = self.vertices[f[0]].coords();
                let mut area = 0.0;
                for k in 1..f.len().saturating_sub(1) {
                    let a = sub(self.vertices[f[k]].coords(), p0);
                    let b = sub(self.vertices[f[k + 1]].coords(), p0);
                    area += 0.5 * norm(&cross3(&a, &b));
                }
                area
            }
            _ => 0.0,
        }
    }

    /// Volume-weighted centroid.
    pub fn centroid(&self) -> Result<Point> {
        match self.dim {
            1 => {
                let lo = self
                    .vertices
                    .iter()
                    .map(|p| p.coords()[0])
                    .fold(f64::INFINITY, f64::min);
                let hi = self
                    .vertices
                    .iter()
                    .map(|p| p.coords()[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                Ok(Point::from_vec(vec![0.5 * (lo + hi)]))
            }
            2 => {
                let v = &self.vertices;
                let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
                for i in 0..v.len() {
                    let p = v[i].coords();
                    let q = v[(i + 1) % v.len()].coords();
                    let cr = p[0] * q[1] - q[0] * p[1];
                    a2 += cr;
                    cx += (p[0] + q[0]) * cr;
                    cy += (p[1] + q[1]) * cr;
                }
                if a2.abs() <= EPS {
                    return Err(Error::Degenerate("zero-area polygon".into()));
                }
                Ok(Point::from_vec(vec![cx / (3.0 * a2), cy / (3.0 * a2)]))
            }
            3 => {
                let parts = self.tetra_decomposition();
                let total: f64 = parts.iter().map(|(v, _)| v).sum();
                if total <= EPS {
                    return Err(Error::Degenerate("zero-volume polytope".into()));
                }
                let mut c = [0.0; 3];
                for (v, g) in &parts {
                    for k in 0..3 {
                        c[k] += v * g[k];
                    }
                }
                Ok(Point::from_vec(c.iter().map(|x| x / total).collect()))
            }
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        max_pairwise_distance(self.vertices.iter())
    }

    /// Intersection with another polytope; `None` when it has empty interior.
    pub fn intersection(&self, other: &ConvexPolytope) -> Result<Option<ConvexPolytope>> {
        check_dim(self.dim, other.dim)?;
        let hs: Vec<HalfSpace> = self.halfspaces.iter().chain(&other.halfspaces).cloned().collect();
        match Self::from_halfspaces_pruned(self.dim, hs) {
            Ok(p) => Ok(Some(p)),
            Err(Error::EmptyInterior) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Image under `x -> scale * x`.
    pub fn scaled(&self, scale: f64) -> Result<ConvexPolytope> {
        if !(scale > 0.0) {
            return Err(Error::invalid("scale must be positive"));
        }
        Ok(Self::from_parts(
            self.dim,
            self.halfspaces
                .iter()
                .map(|h| HalfSpace::unit(h.normal().to_vec(), h.offset() * scale))
                .collect(),
            self.vertices
                .iter()
                .map(|p| Point::from_vec(p.coords().iter().map(|c| c * scale).collect()))
                .collect(),
            self.facets.clone(),
        ))
    }

    /// Image under `x -> x + shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<ConvexPolytope> {
        check_dim(self.dim, shift.len())?;
        Ok(Self::from_parts(
            self.dim,
            self.halfspaces
                .iter()
                .map(|h| HalfSpace::unit(h.normal().to_vec(), h.offset() + dot(h.normal(), shift)))
                .collect(),
            self.vertices
                .iter()
                .map(|p| Point::from_vec(p.coords().iter().zip(shift).map(|(a, b)| a + b).collect()))
                .collect(),
            self.facets.clone(),
        ))
    }

    fn extent_1d(&self) -> f64 {
        let lo = self
            .vertices
            .iter()
            .map(|p| p.coords()[0])
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .vertices
            .iter()
            .map(|p| p.coords()[0])
            .fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Tetrahedra (volume, centroid) from fanning each facet to the vertex mean.
    fn tetra_decomposition(&self) -> Vec<(f64, [f64; 3])> {
        let apex = mean(&self.vertices);
        let mut out = Vec::new();
        for f in &self.facets {
            let p0 = self.vertices[f[0]].coords();
            for k in 1..f.len().saturating_sub(1) {
                let p1 = self.vertices[f[k]].coords();
                let p2 = self.vertices[f[k + 1]].coords();
                let a = sub(p0, &apex);
                let b = sub(p1, &apex);
                let c = sub(p2, &apex);
                let vol = dot(&a, &cross3(&b, &c)).abs() / 6.0;
                let mut g = [0.0; 3];
                for j in 0..3 {
                    g[j] = 0.25 * (apex[j] + p0[j] + p1[j] + p2[j]);
                }
                out.push((vol, g));
            }
        }
        out
    }
}

pub(crate) fn max_pairwise_distance<'a>(points: impl Iterator<Item = &'a Point> + Clone) -> f64 {
    let pts: Vec<&Point> = points.collect();
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(pts[i].distance(pts[j]));
        }
    }
    best
}

fn mean(points: &[Point]) -> Vec<f64> {
    let refs: Vec<&[f64]> = points.iter().map(|p| p.coords()).collect();
    mean_slices(&refs)
}

fn mean_slices(points: &[&[f64]]) -> Vec<f64> {
    let dim = points[0].len();
    let mut c = vec![0.0; dim];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p.iter()) {
            *ci += pi;
        }
    }
    c.iter_mut().for_each(|x| *x /= points.len() as f64);
    c
}

fn any_perpendicular(n: &[f64]) -> Vec<f64> {
    let axis = if n[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let u = cross3(n, &axis);
    let len = norm(&u);
    u.iter().map(|c| c / len).collect()
}

/// Shoelace area of vertices listed in cyclic order.
pub(crate) fn polygon_area(v: &[Point]) -> f64 {
    let mut a2 = 0.0;
    for i in 0..v.len() {
        let p = v[i].coords();
        let q = v[(i + 1) % v.len()].coords();
        a2 += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a2.abs()
}

fn hull_2d(points: &[Point]) -> Result<Vec<HalfSpace>> {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p.coords()[0], p.coords()[1]]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= EPS && (a[1] - b[1]).abs() <= EPS);
    if pts.len() < 3 {
        return Err(Error::EmptyInterior);
    }
    let turn = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= EPS {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return Err(Error::EmptyInterior);
    }
    let mut hs = Vec::with_capacity(hull.len());
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        // Counter-clockwise boundary: outward normal is the edge rotated clockwise.
        let n = vec![b[1] - a[1], a[0] - b[0]];
        let off = n[0] * a[0] + n[1] * a[1];
        hs.push(HalfSpace::new(n, off)?);
    }
    Ok(hs)
}

/// Facet planes of the hull: every plane through three input points with all
/// points on one side. Quartic in the point count; meant for small inputs.
fn hull_3d(points: &[Point]) -> Result<Vec<HalfSpace>> {
    let pts: Vec<&[f64]> = points.iter().map(|p| p.coords()).collect();
    let scale = 1.0 + pts.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-9 * scale;
    let mut planes: Vec<HalfSpace> = Vec::new();
    let m = pts.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let n = cross3(&sub(pts[j], pts[i]), &sub(pts[k], pts[i]));
                let len = norm(&n);
                if len <= 1e-12 * scale * scale {
                    continue;
                }
                let mut n: Vec<f64> = n.iter().map(|c| c / len).collect();
                let mut off = dot(&n, pts[i]);
                let above = pts.iter().any(|p| dot(&n, p) - off > tol);
                let below = pts.iter().any(|p| dot(&n, p) - off < -tol);
                if above && below {
                    continue;
                }
                if above {
                    n.iter_mut().for_each(|c| *c = -*c);
                    off = -off;
                }
                let h = HalfSpace::unit(n, off);
                if !planes.iter().any(|q| q.approx_eq(&h, 1e-7)) {
                    planes.push(h);
                }
            }
        }
    }
    if planes.len() < 4 {
        return Err(Error::EmptyInterior);
    }
    Ok(planes)
}
