//! Obstacle-based node generation: rays cast from a registration point inside
//! the obstacle, each bisected down to a free point next to the boundary.
//!
//! A ray fails when its endpoint at distance `l` is still inside the obstacle,
//! since no inside/outside bracket exists along it.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{norm, Point, PolyconvexSet};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq)]
pub enum Registration {
    /// Centroid of the largest-volume part.
    Centroid,
    Explicit(Point),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObprmParams {
    pub num_rays: usize,
    pub ray_length: f64,
    /// Minimum partition size: bisection stops once the bracket is this short.
    pub delta: f64,
    pub max_iterations: u32,
    pub registration: Registration,
}

impl ObprmParams {
    /// Parameters with `max_iterations` set to the bisection bound.
    pub fn new(num_rays: usize, ray_length: f64, delta: f64) -> Result<Self> {
        let p = Self {
            num_rays,
            ray_length,
            delta,
            max_iterations: iteration_bound(ray_length, delta)?,
            registration: Registration::Centroid,
        };
        p.validate()?;
        Ok(p)
    }

    /// Default ray length `diam(A) + 2 delta`, long enough to leave any convex
    /// obstacle from an interior point.
    pub fn auto_length(obstacle: &PolyconvexSet, delta: f64) -> f64 {
        obstacle.diameter() + 2.0 * delta
    }

    pub fn with_registration(mut self, registration: Registration) -> Self {
        self.registration = registration;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_rays == 0 {
            return Err(Error::invalid("num_rays must be >= 1"));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid("delta must be positive"));
        }
        if !(self.ray_length > self.delta) || !self.ray_length.is_finite() {
            return Err(Error::invalid("ray_length must exceed delta"));
        }
        let bound = iteration_bound(self.ray_length, self.delta)?;
        if self.max_iterations < bound {
            return Err(Error::invalid(format!(
                "max_iterations {} below the bisection bound {bound}",
                self.max_iterations
            )));
        }
        Ok(())
    }
}

/// Smallest `k` with `l / 2^k <= delta`, i.e. `ceil(log2(l / delta))`.
pub fn iteration_bound(ray_length: f64, delta: f64) -> Result<u32> {
    if !(delta > 0.0 && ray_length > 0.0) || !ray_length.is_finite() {
        return Err(Error::invalid("ray_length and delta must be positive"));
    }
    let mut k = 0;
    let mut width = ray_length;
    while width > delta {
        width *= 0.5;
        k += 1;
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RayStatus {
    FreeNode {
        point: Point,
        iterations: u32,
        /// Final bracket `[inside, outside]` as distances along the ray.
        bracket: (f64, f64),
        /// Zero-based index of the exit crossing the bracket settled on.
        crossing: usize,
    },
    EndpointInsideObstacle,
    /// The endpoint is free but no exit lies in `(0, l]`: the registration
    /// point sits on the boundary and the ray leaves immediately.
    NoBoundaryCrossing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayOutcome {
    pub direction: Vec<f64>,
    pub status: RayStatus,
}

impl RayOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self.status, RayStatus::FreeNode { .. })
    }

    pub fn node(&self) -> Option<&Point> {
        match &self.status {
            RayStatus::FreeNode { point, .. } => Some(point),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeBatch {
    pub origin: Point,
    pub outcomes: Vec<RayOutcome>,
    pub success_count: usize,
    pub success_rate: f64,
}

impl NodeBatch {
    pub fn nodes(&self) -> impl Iterator<Item = &Point> {
        self.outcomes.iter().filter_map(RayOutcome::node)
    }
}

pub fn registration_point(obstacle: &PolyconvexSet, params: &ObprmParams) -> Result<Point> {
    match &params.registration {
        Registration::Explicit(p) => {
            if !obstacle.contains(p)? {
                return Err(Error::OutsideObstacle);
            }
            Ok(p.clone())
        }
        Registration::Centroid => {
            let mut best: Option<(f64, usize)> = None;
            for (i, part) in obstacle.parts().iter().enumerate() {
                let v = part.volume()?;
                if best.is_none_or(|(bv, _)| v > bv) {
                    best = Some((v, i));
                }
            }
            let (_, i) = best.ok_or_else(|| Error::invalid("obstacle has no parts"))?;
            obstacle.parts()[i].centroid()
        }
    }
}

/// Isotropic unit vector in R^n (normalized Gaussian).
pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    assert!(n >= 1, "direction dimension must be positive");
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&v);
        if len > 1e-150 {
            return v.into_iter().map(|c| c / len).collect();
        }
    }
}

pub fn cast_and_bisect(
    obstacle: &PolyconvexSet,
    origin: &Point,
    dir: &[f64],
    params: &ObprmParams,
) -> Result<RayOutcome> {
    if !obstacle.contains(origin)? {
        return Err(Error::OutsideObstacle);
    }
    let l = params.ray_length;
    let flips = obstacle.ray_boundary_hits(origin, dir, l)?;
    let outcome = |status| RayOutcome {
        direction: dir.to_vec(),
        status,
    };
    if obstacle.contains_coords(origin.along(dir, l).coords()) {
        return Ok(outcome(RayStatus::EndpointInsideObstacle));
    }
    // Exits alternate with entries starting from an inside origin.
    let exits: Vec<f64> = flips.iter().copied().step_by(2).collect();
    if exits.is_empty() {
        return Ok(outcome(RayStatus::NoBoundaryCrossing));
    }

    let (mut lo, mut hi) = (0.0, l);
    let mut width = l;
    let mut iterations = 0;
    while width > params.delta && iterations < params.max_iterations {
        let mid = 0.5 * (lo + hi);
        if obstacle.contains_coords(origin.along(dir, mid).coords()) {
            lo = mid;
        } else {
            hi = mid;
        }
        width *= 0.5;
        iterations += 1;
    }
    let crossing = exits.iter().filter(|&&t| t < hi).count().saturating_sub(1);
    Ok(outcome(RayStatus::FreeNode {
        point: origin.along(dir, hi),
        iterations,
        bracket: (lo, hi),
        crossing,
    }))
}

/// Casts `num_rays` rays from the registration point. Ray `i` draws its
/// direction from stream `i` of `seed`, so the batch does not depend on the
/// number of worker threads.
pub fn generate_nodes(obstacle: &PolyconvexSet, params: &ObprmParams, seed: u64) -> Result<NodeBatch> {
    params.validate()?;
    let origin = registration_point(obstacle, params)?;
    let streams = SeededRng::new(seed);
    let n = obstacle.dim();
    let outcomes = (0..params.num_rays)
        .into_par_iter()
        .map(|i| {
            let dir = sample_direction(&mut streams.stream(i as u64), n);
            cast_and_bisect(obstacle, &origin, &dir, params)
        })
        .collect::<Result<Vec<_>>>()?;
    let success_count = outcomes.iter().filter(|o| o.is_success()).count();
    Ok(NodeBatch {
        origin,
        success_rate: success_count as f64 / params.num_rays as f64,
        success_count,
        outcomes,
    })
}
