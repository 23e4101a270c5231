//! Intrinsic volumes and integral-geometry formulas.
//!
//! Normalization follows the intrinsic-volume convention in which
//! `mu_i(B_n) = C(n, i) * omega_n / omega_{n-i}` for the unit ball: `mu_n` is
//! volume, `mu_{n-1}` of a convex body is half its surface area, and `mu_0` is
//! the Euler characteristic. For a boundary `dA`, `mu_{n-1}(dA)` is the full
//! surface area.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, ConvexPolytope, Point, PolyconvexSet, EPS};
use crate::rng::SeededRng;

/// Volume of the unit ball in R^n, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn omega(n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::invalid(format!("omega: negative dimension {n}")));
    }
    let half = n as f64 / 2.0;
    Ok(std::f64::consts::PI.powf(half) / statrs::function::gamma::gamma(half + 1.0))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Flag coefficient `C(n, i)^-1 * omega_i * omega_{n-i} / omega_n` of the
/// principal kinematic formula.
pub fn kinematic_coefficient(n: usize, i: usize) -> f64 {
    let w = |k: usize| omega(k as i64).expect("non-negative");
    w(i) * w(n - i) / (binomial(n, i) * w(n))
}

/// `mu_i` of the n-ball of radius `r`.
pub fn mu_ball(i: usize, n: usize, r: f64) -> Result<f64> {
    if i > n {
        return Err(Error::invalid(format!("mu_ball: index {i} exceeds dimension {n}")));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("mu_ball: radius must be positive"));
    }
    Ok(binomial(n, i) * omega(n as i64)? / omega((n - i) as i64)? * r.powi(i as i32))
}

/// `mu_i` of a segment of length `len`: `(1, len, 0, 0, ...)`.
pub fn mu_segment(i: usize, len: f64) -> Result<f64> {
    if !(len >= 0.0) {
        return Err(Error::invalid("mu_segment: negative length"));
    }
    Ok(match i {
        0 => 1.0,
        1 => len,
        _ => 0.0,
    })
}

/// `mu_i` of a polytope boundary, defined for `i = n - 1` (surface measure)
/// and `i = n` (zero).
pub fn mu_boundary(p: &ConvexPolytope, i: usize) -> Result<f64> {
    let n = p.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if i == n {
        Ok(0.0)
    } else if i + 1 == n {
        p.surface_measure()
    } else {
        Err(Error::invalid(format!(
            "mu_boundary: index {i} outside {{{}, {n}}}",
            n - 1
        )))
    }
}

/// `(mu_0, ..., mu_n)` of a shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValuationVector {
    dimension: usize,
    mu: Vec<f64>,
}

impl ValuationVector {
    pub fn new(dimension: usize, mu: Vec<f64>) -> Result<Self> {
        if mu.len() != dimension + 1 {
            return Err(Error::invalid(format!(
                "expected {} valuations, got {}",
                dimension + 1,
                mu.len()
            )));
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("valuations must be finite"));
        }
        Ok(Self { dimension, mu })
    }

    pub fn point(n: usize) -> Self {
        let mut mu = vec![0.0; n + 1];
        mu[0] = 1.0;
        Self { dimension: n, mu }
    }

    pub fn ball(n: usize, r: f64) -> Result<Self> {
        Self::new(n, (0..=n).map(|i| mu_ball(i, n, r)).collect::<Result<_>>()?)
    }

    pub fn segment(n: usize, len: f64) -> Result<Self> {
        Self::new(n, (0..=n).map(|i| mu_segment(i, len)).collect::<Result<_>>()?)
    }

    /// Intrinsic volumes of a convex polytope, n <= 3. In R^3, `mu_1` sums
    /// edge length times exterior dihedral angle over `2 pi`.
    pub fn polytope(p: &ConvexPolytope) -> Result<Self> {
        let n = p.dim();
        let mu = match n {
            1 => vec![1.0, p.volume()?],
            2 => vec![1.0, 0.5 * p.surface_measure()?, p.volume()?],
            3 => vec![1.0, edge_curvature_measure(p), 0.5 * p.surface_measure()?, p.volume()?],
            _ => return Err(Error::UnsupportedDimension(n)),
        };
        Self::new(n, mu)
    }

    /// Intrinsic volumes of the boundary of a convex polytope. The top two
    /// entries come from [`mu_boundary`]; lower entries use the parity
    /// relation `mu_j(dK) = (1 + (-1)^(n-1-j)) mu_j(K)` for convex bodies.
    pub fn boundary(p: &ConvexPolytope) -> Result<Self> {
        let n = p.dim();
        let body = Self::polytope(p)?;
        let mut mu: Vec<f64> = (0..=n)
            .map(|j| {
                if (n - 1 - j.min(n - 1)).is_multiple_of(2) {
                    2.0 * body.mu[j]
                } else {
                    0.0
                }
            })
            .collect();
        mu[n - 1] = mu_boundary(p, n - 1)?;
        mu[n] = mu_boundary(p, n)?;
        Self::new(n, mu)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn get(&self, i: usize) -> f64 {
        self.mu[i]
    }
}

fn edge_curvature_measure(p: &ConvexPolytope) -> f64 {
    let hs = p.halfspaces();
    let mut total = 0.0;
    for a in 0..hs.len() {
        for b in a + 1..hs.len() {
            let fa = p.facet_vertices(a);
            let shared: Vec<usize> = p.facet_vertices(b).iter().copied().filter(|v| fa.contains(v)).collect();
            if shared.len() < 2 {
                continue;
            }
            let mut len: f64 = 0.0;
            for i in 0..shared.len() {
                for j in i + 1..shared.len() {
                    len = len.max(p.vertices()[shared[i]].distance(&p.vertices()[shared[j]]));
                }
            }
            let cos = geometry::dot(hs[a].normal(), hs[b].normal()).clamp(-1.0, 1.0);
            total += len * cos.acos() / (2.0 * std::f64::consts::PI);
        }
    }
    total
}

/// Intrinsic volumes of `A ∩ B`, which may be empty or lower dimensional.
/// Supports n <= 3.
pub fn intersection_valuations(a: &ConvexPolytope, b: &ConvexPolytope) -> Result<ValuationVector> {
    let n = a.dim();
    geometry::check_dim(n, b.dim())?;
    if let Some(p) = a.intersection(b)? {
        return ValuationVector::polytope(&p);
    }
    let hs: Vec<_> = a.halfspaces().iter().chain(b.halfspaces()).cloned().collect();
    let verts = geometry::enumerate_vertices(n, &hs).vertices;
    let mut mu = vec![0.0; n + 1];
    if verts.is_empty() {
        return ValuationVector::new(n, mu);
    }
    mu[0] = 1.0;
    let refs: Vec<&[f64]> = verts.iter().map(Vec::as_slice).collect();
    match geometry::affine_rank(&refs, 1e-9) {
        0 => {}
        1 => {
            let pts: Vec<Point> = verts.iter().cloned().map(Point::from_vec).collect();
            mu[1] = geometry::max_pairwise_distance(pts.iter());
        }
        2 if n == 3 => {
            let (u, v) = plane_basis(&refs);
            let flat: Vec<Point> = refs
                .iter()
                .map(|x| {
                    let d = geometry::sub(x, refs[0]);
                    Point::from_vec(vec![geometry::dot(&d, &u), geometry::dot(&d, &v)])
                })
                .collect();
            let poly = ConvexPolytope::from_vertices(&flat)?;
            mu[1] = 0.5 * poly.surface_measure()?;
            mu[2] = poly.volume()?;
        }
        _ => return Err(Error::UnsupportedDimension(n)),
    }
    ValuationVector::new(n, mu)
}

fn plane_basis(points: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &points[1..] {
        let mut d = geometry::sub(p, points[0]);
        for b in &basis {
            let c = geometry::dot(&d, b);
            d.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let len = geometry::norm(&d);
        if len > 1e-9 {
            basis.push(d.iter().map(|x| x / len).collect());
            if basis.len() == 2 {
                break;
            }
        }
    }
    (basis[0].clone(), basis[1].clone())
}

/// `|mu_i(A ∪ B) - mu_i(A) - mu_i(B) + mu_i(A ∩ B)|` for convex polytopes in
/// the plane or space. `mu_n` and `mu_{n-1}` of the union are evaluated
/// directly from its area/volume and exposed boundary, so any pair works;
/// `mu_0` of the union is its Euler characteristic (1 when the parts meet,
/// 2 otherwise). In R^3, `mu_1` requires a convex union.
pub fn valuation_additivity_check(a: &ConvexPolytope, b: &ConvexPolytope, i: usize) -> Result<f64> {
    let n = a.dim();
    geometry::check_dim(n, b.dim())?;
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if i > n {
        return Err(Error::invalid(format!("valuation index {i} exceeds dimension {n}")));
    }
    let va = ValuationVector::polytope(a)?;
    let vb = ValuationVector::polytope(b)?;
    let vi = intersection_valuations(a, b)?;
    let union = PolyconvexSet::new(vec![a.clone(), b.clone()])?;
    let mu_union = if i == n {
        union.volume()?
    } else if i + 1 == n {
        0.5 * union.surface_measure()?
    } else if i == 0 {
        if vi.get(0) > 0.0 {
            1.0
        } else {
            2.0
        }
    } else {
        let pts: Vec<Point> = union.vertices().cloned().collect();
        let hull = ConvexPolytope::from_vertices(&pts)?;
        let uv = union.volume()?;
        if (hull.volume()? - uv).abs() > 1e-9 * uv.max(1.0) {
            return Err(Error::invalid("mu_1 additivity in R^3 needs a convex union"));
        }
        ValuationVector::polytope(&hull)?.get(1)
    };
    Ok((mu_union - va.get(i) - vb.get(i) + vi.get(i)).abs())
}

/// Conditional probability that a random k-flat meeting `l` also meets `k_set`,
/// `mu_{n-k}(K) / mu_{n-k}(L)`, for `K` contained in `L`.
pub fn sylvester_ratio(k_set: &ValuationVector, l: &ValuationVector, k: usize) -> Result<f64> {
    let n = l.dimension;
    geometry::check_dim(n, k_set.dimension)?;
    if k > n {
        return Err(Error::invalid(format!("flat dimension {k} exceeds {n}")));
    }
    let denom = l.mu[n - k];
    if denom <= 0.0 {
        return Err(Error::invalid("sylvester_ratio: zero denominator"));
    }
    let ratio = k_set.mu[n - k] / denom;
    if ratio > 1.0 {
        if ratio - 1.0 < EPS {
            log::warn!("sylvester_ratio: clamping {ratio} to 1");
            return Ok(1.0);
        }
        log::warn!("sylvester_ratio: ratio {ratio} > 1; is K contained in L?");
    }
    Ok(ratio.max(0.0))
}

/// Principal kinematic formula: `sum_i C(n,i)^-1 (omega_i omega_{n-i} / omega_n) mu_i(A) mu_{n-i}(K)`.
pub fn kinematic_measure(a: &ValuationVector, k: &ValuationVector) -> Result<f64> {
    geometry::check_dim(a.dimension, k.dimension)?;
    let n = a.dimension;
    Ok((0..=n)
        .map(|i| kinematic_coefficient(n, i) * a.mu[i] * k.mu[n - i])
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionVariant {
    /// The closed form with `mu_{n-1}(B_d) = n omega_n / d` and `mu_n(B_d) = omega_n`.
    PaperLiteral,
    /// Ball valuations evaluated at radius `d / 2` via [`mu_ball`].
    RadiusCorrected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionInput {
    pub dimension: usize,
    /// `mu_{n-1}` of the obstacle boundary (perimeter or surface area).
    pub boundary_measure: f64,
    /// Needle length: the terminal bisection bracket.
    pub delta: f64,
    /// Diameter of the conditioning ball, `diam(A) + 2 delta`.
    pub d: f64,
    pub variant: PredictionVariant,
}

impl PredictionInput {
    pub fn validate(&self) -> Result<()> {
        if self.dimension < 1 {
            return Err(Error::UnsupportedDimension(self.dimension));
        }
        if !(self.delta > 0.0) {
            return Err(Error::invalid("delta must be positive"));
        }
        if !(self.d >= self.delta) {
            return Err(Error::invalid("bounding diameter must be at least delta"));
        }
        if !(self.boundary_measure > 0.0) {
            return Err(Error::invalid("boundary measure must be positive"));
        }
        Ok(())
    }
}

/// Closed-form probability that a randomly placed needle of length `delta`
/// meeting the conditioning ball also meets the obstacle boundary. Not
/// clamped: large `boundary * delta` can push it above 1.
pub fn predicted_success(p: &PredictionInput) -> Result<f64> {
    p.validate()?;
    let n = p.dimension;
    let w_n = omega(n as i64)?;
    // alpha = omega_{n-1} omega_1 / (n omega_n), the i = n-1 kinematic coefficient.
    let alpha = omega(n as i64 - 1)? * omega(1)? / (n as f64 * w_n);
    let numer = alpha * p.boundary_measure * p.delta;
    Ok(match p.variant {
        PredictionVariant::PaperLiteral => {
            (alpha / w_n) * (p.boundary_measure * p.delta / ((alpha * n as f64 / (2.0 * p.d)) * p.delta + 1.0))
        }
        PredictionVariant::RadiusCorrected => {
            let r = 0.5 * p.d;
            numer / (alpha * mu_ball(n - 1, n, r)? * p.delta + mu_ball(n, n, r)?)
        }
    })
}

/// Crofton normalization in the plane: for lines parametrized by direction
/// `theta in [0, pi)` and signed offset `p`, `perimeter = CROFTON_2D * integral
/// of crossing count dp dtheta`. Calibrated on a disc of radius r: lines
/// meeting it have measure `2 r pi` and cross it twice, so `2 pi r = C * 4 pi r`.
pub const CROFTON_2D: f64 = 0.5;

const LINES_PER_STREAM: usize = 4096;

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Perimeter of a planar polyconvex set from random-line crossing counts.
pub fn crofton_estimate(s: &PolyconvexSet, n_lines: usize, rng_seed: u64) -> Result<f64> {
    Ok(crofton_estimate_with_error(s, n_lines, rng_seed)?.value)
}

pub fn crofton_estimate_with_error(s: &PolyconvexSet, n_lines: usize, rng_seed: u64) -> Result<Estimate> {
    use rand::Rng;
    if s.dim() != 2 {
        return Err(Error::UnsupportedDimension(s.dim()));
    }
    if n_lines == 0 {
        return Err(Error::invalid("n_lines must be >= 1"));
    }
    let ball = s.enclosing_ball();
    let c = ball.center().coords().to_vec();
    let r = ball.radius() * (1.0 + 1e-9) + 1e-12;
    let streams = SeededRng::new(rng_seed);
    let chunks = n_lines.div_ceil(LINES_PER_STREAM);
    let (sum, sum_sq): (u64, u64) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = streams.stream(chunk as u64);
            let count = LINES_PER_STREAM.min(n_lines - chunk * LINES_PER_STREAM);
            let (mut s1, mut s2) = (0u64, 0u64);
            for _ in 0..count {
                let theta = rng.random_range(0.0..std::f64::consts::PI);
                let p = rng.random_range(-r..r);
                let (sin, cos) = theta.sin_cos();
                let origin = [c[0] + p * cos, c[1] + p * sin];
                let crossings = 2 * s.line_intervals(&origin, &[-sin, cos]).len() as u64;
                s1 += crossings;
                s2 += crossings * crossings;
            }
            (s1, s2)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = n_lines as f64;
    let mean = sum as f64 / n;
    let var = if n_lines > 1 {
        (sum_sq as f64 - n * mean * mean) / (n - 1.0)
    } else {
        0.0
    };
    let scale = CROFTON_2D * 2.0 * r * std::f64::consts::PI;
    Ok(Estimate {
        value: scale * mean,
        std_error: scale * (var.max(0.0) / n).sqrt(),
        samples: n_lines,
    })
}
