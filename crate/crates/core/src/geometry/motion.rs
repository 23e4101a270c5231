use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dim, dot, ConvexPolytope, HalfSpace, Point, PolyconvexSet, Segment, EPS};
use crate::error::{Error, Result};

/// Proper rigid motion `x -> R x + t` with `R` orthonormal, `det R = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidMotion {
    rotation: DMatrix<f64>,
    translation: Vec<f64>,
}

impl RigidMotion {
    pub fn new(rotation: DMatrix<f64>, translation: Vec<f64>) -> Result<Self> {
        let n = translation.len();
        if rotation.nrows() != n || rotation.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rotation.nrows(),
            });
        }
        let gram = rotation.transpose() * &rotation;
        let off = (gram - DMatrix::<f64>::identity(n, n)).abs().max();
        if off > EPS {
            return Err(Error::invalid(format!(
                "rotation is not orthonormal (deviation {off:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > EPS {
            return Err(Error::invalid(format!("rotation determinant is {det}, expected +1")));
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rotation: DMatrix::identity(n, n),
            translation: vec![0.0; n],
        }
    }

    /// Planar rotation by `angle` followed by translation.
    pub fn planar(angle: f64, translation: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            rotation: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
            translation: translation.to_vec(),
        }
    }

    /// Haar-random rotation (QR of a Gaussian matrix with sign correction)
    /// plus the given translation.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, translation: Vec<f64>) -> Self {
        let n = translation.len();
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        Self {
            rotation: q,
            translation,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    fn rotate(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.rotation[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn apply_point(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim(), x.dim())?;
        let mut y = self.rotate(x.coords());
        for (yi, ti) in y.iter_mut().zip(&self.translation) {
            *yi += ti;
        }
        Ok(Point::from_vec(y))
    }

    pub fn apply_segment(&self, s: &Segment) -> Result<Segment> {
        Segment::new(self.apply_point(&s.p)?, self.apply_point(&s.q)?)
    }

    /// Image of a polytope; half-spaces map as `n' = R n`, `b' = b + n'.t`.
    pub fn apply_polytope(&self, p: &ConvexPolytope) -> Result<ConvexPolytope> {
        check_dim(self.dim(), p.dim())?;
        let hs = p
            .halfspaces()
            .iter()
            .map(|h| {
                let n = self.rotate(h.normal());
                let off = h.offset() + dot(&n, &self.translation);
                HalfSpace::unit(n, off)
            })
            .collect();
        let verts = p
            .vertices()
            .iter()
            .map(|v| self.apply_point(v))
            .collect::<Result<Vec<_>>>()?;
        let facets = (0..p.halfspaces().len())
            .map(|i| p.facet_vertices(i).to_vec())
            .collect();
        Ok(ConvexPolytope::from_parts(p.dim(), hs, verts, facets))
    }

    pub fn apply_set(&self, s: &PolyconvexSet) -> Result<PolyconvexSet> {
        PolyconvexSet::new(
            s.parts()
                .iter()
                .map(|p| self.apply_polytope(p))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}
