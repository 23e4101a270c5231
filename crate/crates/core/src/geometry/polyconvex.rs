use std::cmp::Ordering;

use super::polytope::max_pairwise_distance;
use super::{check_dim, cross3, dot, min_enclosing_ball, norm, sub, Ball, ConvexPolytope, Point, Segment, EPS};
use crate::error::{Error, Result};

/// Finite union of convex polytopes. Parts may overlap or abut.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyconvexSet {
    dim: usize,
    parts: Vec<ConvexPolytope>,
}

impl PolyconvexSet {
    pub fn new(parts: Vec<ConvexPolytope>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::invalid("polyconvex set needs at least one part"));
        };
        let dim = first.dim();
        for (i, p) in parts.iter().enumerate() {
            check_dim(dim, p.dim()).map_err(|e| e.in_part(i))?;
        }
        Ok(Self { dim, parts })
    }

    pub fn single(part: ConvexPolytope) -> Self {
        Self {
            dim: part.dim(),
            parts: vec![part],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parts(&self) -> &[ConvexPolytope] {
        &self.parts
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point> + Clone {
        self.parts.iter().flat_map(|p| p.vertices().iter())
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        check_dim(self.dim, x.dim())?;
        Ok(self.contains_coords(x.coords()))
    }

    pub(crate) fn contains_coords(&self, x: &[f64]) -> bool {
        self.parts.iter().any(|p| p.contains_coords(x))
    }

    /// Closed membership without EPS-deep interior membership in any part.
    pub(crate) fn on_boundary_coords(&self, x: &[f64]) -> bool {
        self.contains_coords(x) && !self.parts.iter().any(|p| p.interior_coords(x))
    }

    /// Parameters `t` in `(0, max_len]` where membership flips along
    /// `origin + t * dir`, strictly increasing.
    pub fn ray_boundary_hits(&self, origin: &Point, dir: &[f64], max_len: f64) -> Result<Vec<f64>> {
        check_dim(self.dim, origin.dim())?;
        check_dim(self.dim, dir.len())?;
        if (norm(dir) - 1.0).abs() > EPS {
            return Err(Error::invalid("ray direction must be a unit vector"));
        }
        if !(max_len > 0.0) {
            return Err(Error::invalid("ray length must be positive"));
        }
        let mut out = Vec::new();
        self.flips(origin.coords(), dir, max_len, &mut out);
        Ok(out)
    }

    /// Membership intervals of the whole line, merged across parts. Touching
    /// (zero-length) contacts are dropped and gaps up to EPS are closed, so
    /// part-to-part interfaces produce no flip.
    pub(crate) fn line_intervals(&self, origin: &[f64], dir: &[f64]) -> Vec<(f64, f64)> {
        let mut iv: Vec<(f64, f64)> = self
            .parts
            .iter()
            .filter_map(|p| p.clip_line(origin, dir))
            .filter(|(a, b)| b - a > EPS)
            .collect();
        iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 + EPS => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        merged
    }

    pub(crate) fn flips(&self, origin: &[f64], dir: &[f64], max_len: f64, out: &mut Vec<f64>) {
        for (a, b) in self.line_intervals(origin, dir) {
            for t in [a, b] {
                if t > 0.0 && t <= max_len {
                    out.push(t);
                }
            }
        }
    }

    /// Number of boundary crossings along the closed segment `p -> q`.
    pub(crate) fn crossing_count(&self, p: &[f64], q: &[f64]) -> usize {
        let d = sub(q, p);
        let len = norm(&d);
        if len == 0.0 {
            return 0;
        }
        let dir: Vec<f64> = d.iter().map(|c| c / len).collect();
        self.line_intervals(p, &dir)
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .filter(|&t| t > 0.0 && t <= len)
            .count()
    }

    /// True iff membership flips along the segment or an endpoint lies on the boundary.
    pub fn segment_intersects_boundary(&self, seg: &Segment) -> Result<bool> {
        check_dim(self.dim, seg.dim())?;
        Ok(self.segment_hits_boundary(seg.p.coords(), seg.q.coords()))
    }

    pub(crate) fn segment_hits_boundary(&self, p: &[f64], q: &[f64]) -> bool {
        self.on_boundary_coords(p) || self.on_boundary_coords(q) || self.crossing_count(p, q) > 0
    }

    /// Largest distance between any two vertices of any parts.
    pub fn diameter(&self) -> f64 {
        max_pairwise_distance(self.vertices())
    }

    /// Minimum enclosing ball of all vertices.
    pub fn enclosing_ball(&self) -> Ball {
        let pts: Vec<Point> = self.vertices().cloned().collect();
        min_enclosing_ball(&pts).expect("polyconvex set has vertices")
    }

    /// n-volume of the union. Exact for n = 2 (vertical slab decomposition)
    /// and n = 3 (inclusion-exclusion over part intersections).
    pub fn volume(&self) -> Result<f64> {
        if self.parts.len() == 1 {
            return self.parts[0].volume();
        }
        match self.dim {
            2 => Ok(union_area_2d(&self.parts)),
            3 => inclusion_exclusion_volume(&self.parts),
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// (n-1)-measure of the union's boundary. Facet portions covered by other
    /// parts are removed; shared coplanar facets facing the same way count once.
    pub fn surface_measure(&self) -> Result<f64> {
        if self.parts.len() == 1 {
            return self.parts[0].surface_measure();
        }
        match self.dim {
            2 | 3 => {
                let mut total = 0.0;
                for (i, part) in self.parts.iter().enumerate() {
                    for f in 0..part.halfspaces().len() {
                        total += self.exposed_facet_measure(i, f);
                    }
                }
                Ok(total)
            }
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// Other parts whose intersection with facet `f` of part `i` is hidden.
    fn covering_parts(&self, i: usize, f: usize) -> Vec<usize> {
        let h = &self.parts[i].halfspaces()[f];
        (0..self.parts.len())
            .filter(|&j| j != i)
            .filter(|&j| {
                let same_side = self.parts[j].halfspaces().iter().any(|g| {
                    (g.offset() - h.offset()).abs() <= 1e-9
                        && g.normal().iter().zip(h.normal()).all(|(a, b)| (a - b).abs() <= 1e-9)
                });
                !(same_side && j > i)
            })
            .collect()
    }

    fn exposed_facet_measure(&self, i: usize, f: usize) -> f64 {
        let part = &self.parts[i];
        let full = part.facet_area(f);
        let covering = self.covering_parts(i, f);
        if covering.is_empty() || full <= 0.0 {
            return full;
        }
        let verts: Vec<&[f64]> = part
            .facet_vertices(f)
            .iter()
            .map(|&v| part.vertices()[v].coords())
            .collect();
        match self.dim {
            2 => {
                let (a, b) = farthest_pair(&verts);
                let d = sub(b, a);
                let len = norm(&d);
                let dir: Vec<f64> = d.iter().map(|c| c / len).collect();
                let mut iv: Vec<(f64, f64)> = covering
                    .iter()
                    .filter_map(|&j| self.parts[j].clip_line(a, &dir))
                    .map(|(s, t)| (s.max(0.0), t.min(len)))
                    .filter(|(s, t)| t > s)
                    .collect();
                (full - union_length(&mut iv)).max(0.0)
            }
            _ => {
                let normal = part.halfspaces()[f].normal();
                let origin = verts[0];
                let u = {
                    let e = sub(verts[1], origin);
                    let l = norm(&e);
                    e.iter().map(|c| c / l).collect::<Vec<_>>()
                };
                let w = cross3(normal, &u);
                let to_plane = |p: &[f64]| {
                    let d = sub(p, origin);
                    Point::from_vec(vec![dot(&d, &u), dot(&d, &w)])
                };
                let pieces: Vec<ConvexPolytope> = covering
                    .iter()
                    .filter_map(|&j| clip_polygon(&verts, &self.parts[j]))
                    .filter_map(|poly| {
                        let flat: Vec<Point> = poly.iter().map(|p| to_plane(p)).collect();
                        ConvexPolytope::from_vertices(&flat).ok()
                    })
                    .collect();
                if pieces.is_empty() {
                    return full;
                }
                (full - union_area_2d(&pieces)).max(0.0)
            }
        }
    }
}

fn farthest_pair<'a>(pts: &[&'a [f64]]) -> (&'a [f64], &'a [f64]) {
    let mut best = (pts[0], pts[pts.len() - 1], -1.0);
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let d = super::distance(pts[a], pts[b]);
            if d > best.2 {
                best = (pts[a], pts[b], d);
            }
        }
    }
    (best.0, best.1)
}

fn union_length(iv: &mut [(f64, f64)]) -> f64 {
    iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &(a, b) in iv.iter() {
        cur = match cur {
            Some((s, e)) if a <= e => Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((s, e)) = cur {
        total += e - s;
    }
    total
}

/// Sutherland-Hodgman clip of a planar convex polygon (3D coordinates)
/// against a polytope. Facet planes coplanar with the polygon do not clip it
/// when the polygon lies on their inner side.
fn clip_polygon(poly: &[&[f64]], clip: &ConvexPolytope) -> Option<Vec<Vec<f64>>> {
    let mut cur: Vec<Vec<f64>> = poly.iter().map(|p| p.to_vec()).collect();
    for h in clip.halfspaces() {
        if cur.is_empty() {
            return None;
        }
        let ex: Vec<f64> = cur.iter().map(|p| h.excess(p)).collect();
        if ex.iter().all(|e| *e <= EPS) {
            continue;
        }
        if ex.iter().all(|e| *e >= -EPS) {
            return None;
        }
        let mut next = Vec::with_capacity(cur.len() + 1);
        for k in 0..cur.len() {
            let (p, q) = (&cur[k], &cur[(k + 1) % cur.len()]);
            let (ep, eq) = (ex[k], ex[(k + 1) % cur.len()]);
            if ep <= 0.0 {
                next.push(p.clone());
            }
            if (ep < 0.0 && eq > 0.0) || (ep > 0.0 && eq < 0.0) {
                let t = ep / (ep - eq);
                next.push(p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect());
            }
        }
        cur = next;
    }
    (cur.len() >= 3).then_some(cur)
}

/// Exact area of a union of convex polygons: between consecutive event
/// abscissae (vertices and pairwise edge crossings) the union's vertical
/// cross-section length is affine in x, so the midpoint rule is exact.
pub(crate) fn union_area_2d(parts: &[ConvexPolytope]) -> f64 {
    let edges: Vec<Vec<([f64; 2], [f64; 2])>> = parts
        .iter()
        .map(|p| {
            let v = p.vertices();
            (0..v.len())
                .map(|k| {
                    let a = v[k].coords();
                    let b = v[(k + 1) % v.len()].coords();
                    ([a[0], a[1]], [b[0], b[1]])
                })
                .collect()
        })
        .collect();
    let mut xs: Vec<f64> = parts
        .iter()
        .flat_map(|p| p.vertices().iter().map(|v| v.coords()[0]))
        .collect();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            for e in &edges[i] {
                for g in &edges[j] {
                    if let Some(x) = edge_crossing_x(e, g) {
                        xs.push(x);
                    }
                }
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    xs.dedup();
    let mut area = 0.0;
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 - x0 <= 0.0 {
            continue;
        }
        let xm = 0.5 * (x0 + x1);
        let mut iv: Vec<(f64, f64)> = parts
            .iter()
            .filter_map(|p| p.clip_line(&[xm, 0.0], &[0.0, 1.0]))
            .filter(|(a, b)| b > a)
            .collect();
        area += (x1 - x0) * union_length(&mut iv);
    }
    area
}

fn edge_crossing_x(e: &([f64; 2], [f64; 2]), g: &([f64; 2], [f64; 2])) -> Option<f64> {
    let (p, r) = (e.0, [e.1[0] - e.0[0], e.1[1] - e.0[1]]);
    let (q, s) = (g.0, [g.1[0] - g.0[0], g.1[1] - g.0[1]]);
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom.abs() < 1e-15 {
        return None;
    }
    let qp = [q[0] - p[0], q[1] - p[1]];
    let t = (qp[0] * s[1] - qp[1] * s[0]) / denom;
    let u = (qp[0] * r[1] - qp[1] * r[0]) / denom;
    ((-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u)).then(|| p[0] + t * r[0])
}

fn inclusion_exclusion_volume(parts: &[ConvexPolytope]) -> Result<f64> {
    if parts.len() > 16 {
        return Err(Error::invalid("inclusion-exclusion limited to 16 parts"));
    }
    fn recurse(
        parts: &[ConvexPolytope],
        start: usize,
        current: &ConvexPolytope,
        depth: usize,
        acc: &mut f64,
    ) -> Result<()> {
        let sign = if depth % 2 == 1 { 1.0 } else { -1.0 };
        *acc += sign * current.volume()?;
        for j in start..parts.len() {
            if let Some(next) = current.intersection(&parts[j])? {
                recurse(parts, j + 1, &next, depth + 1, acc)?;
            }
        }
        Ok(())
    }
    let mut acc = 0.0;
    for i in 0..parts.len() {
        recurse(parts, i + 1, &parts[i], 1, &mut acc)?;
    }
    Ok(acc)
}
