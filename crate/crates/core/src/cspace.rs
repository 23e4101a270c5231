//! Translational configuration-space obstacles.
//!
//! The difference body is taken as `O ⊕ A = { o - a : o in O, a in A }`, so a
//! robot whose reference point sits at `q` collides with `O` exactly when `q`
//! lies in `O ⊕ A` for a centrally symmetric robot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, ConvexPolytope, Point, PolyconvexSet};

/// Rigid robot body in workspace coordinates, reference point at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotShape {
    body: ConvexPolytope,
}

impl RobotShape {
    pub fn new(body: ConvexPolytope) -> Result<Self> {
        if !body.contains(&Point::origin(body.dim()))? {
            return Err(Error::invalid(
                "robot body must contain its reference point (the origin)",
            ));
        }
        Ok(Self { body })
    }

    /// Degenerate robot occupying only its reference point.
    pub fn point(dim: usize) -> Self {
        let body = ConvexPolytope::from_parts(dim, Vec::new(), vec![Point::origin(dim)], Vec::new());
        Self { body }
    }

    pub fn body(&self) -> &ConvexPolytope {
        &self.body
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }
}

/// C-obstacle of a convex obstacle: hull of all vertex differences `o - a`.
pub fn minkowski_cobstacle(obstacle: &ConvexPolytope, robot: &RobotShape) -> Result<ConvexPolytope> {
    check_dim(obstacle.dim(), robot.dim())?;
    if robot.body().vertices().len() == 1 && robot.body().vertices()[0] == Point::origin(robot.dim()) {
        return Ok(obstacle.clone());
    }
    let mut diffs = Vec::with_capacity(obstacle.vertices().len() * robot.body().vertices().len());
    for o in obstacle.vertices() {
        for a in robot.body().vertices() {
            let d = o.coords().iter().zip(a.coords()).map(|(x, y)| x - y).collect();
            diffs.push(Point::from_vec(d));
        }
    }
    ConvexPolytope::from_vertices(&diffs)
}

/// Part-by-part C-obstacle of a polyconvex obstacle.
pub fn minkowski_cobstacle_set(obstacle: &PolyconvexSet, robot: &RobotShape) -> Result<PolyconvexSet> {
    let parts = obstacle
        .parts()
        .iter()
        .enumerate()
        .map(|(i, p)| minkowski_cobstacle(p, robot).map_err(|e| e.in_part(i)))
        .collect::<Result<Vec<_>>>()?;
    PolyconvexSet::new(parts)
}

/// Feature counts of a robot/obstacle pair and the configuration-space DOF.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCount {
    pub robot_features: u64,
    pub obstacle_features: u64,
    pub dof: u32,
}

impl FeatureCount {
    pub fn new(robot_features: u64, obstacle_features: u64, dof: u32) -> Result<Self> {
        if robot_features == 0 || obstacle_features == 0 || dof == 0 {
            return Err(Error::invalid("feature counts and dof must be >= 1"));
        }
        Ok(Self {
            robot_features,
            obstacle_features,
            dof,
        })
    }

    /// Number of contact hypersurfaces, `m n`.
    pub fn contact_hypersurface_count(&self) -> u64 {
        self.robot_features.saturating_mul(self.obstacle_features)
    }

    /// Number of `(d-1)`-fold contacts, `m^(d-1)` in the obstacle feature count.
    pub fn fold_contact_count(&self) -> u64 {
        self.obstacle_features.saturating_pow(self.dof - 1)
    }
}

pub fn contact_hypersurface_count(fc: &FeatureCount) -> u64 {
    fc.contact_hypersurface_count()
}
