use nalgebra::{DMatrix, DVector};

use super::{check_dim, distance, dot, sub, Ball, Point};
use crate::error::{Error, Result};

struct Sphere {
    center: Vec<f64>,
    radius2: f64,
}

impl Sphere {
    fn covers(&self, p: &[f64]) -> bool {
        let d2: f64 = p.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 <= self.radius2 * (1.0 + 1e-10) + 1e-18
    }
}

/// Smallest sphere through all support points, centered in their affine hull.
fn circumsphere(support: &[Vec<f64>], dim: usize) -> Sphere {
    match support.len() {
        0 => Sphere {
            center: vec![0.0; dim],
            radius2: -1.0,
        },
        1 => Sphere {
            center: support[0].clone(),
            radius2: 0.0,
        },
        k => {
            let p0 = &support[0];
            let v: Vec<Vec<f64>> = support[1..].iter().map(|p| sub(p, p0)).collect();
            let gram = DMatrix::from_fn(k - 1, k - 1, |i, j| dot(&v[i], &v[j]));
            let rhs = DVector::from_fn(k - 1, |i, _| 0.5 * dot(&v[i], &v[i]));
            match gram.lu().solve(&rhs) {
                Some(lambda) if lambda.iter().all(|l| l.is_finite()) => {
                    let mut center = p0.clone();
                    for (l, vi) in lambda.iter().zip(&v) {
                        for (c, x) in center.iter_mut().zip(vi) {
                            *c += l * x;
                        }
                    }
                    let radius2 = support.iter().map(|p| distance(p, &center).powi(2)).fold(0.0, f64::max);
                    Sphere { center, radius2 }
                }
                _ => {
                    // Affinely dependent support: fall back to the farthest pair.
                    let (mut a, mut b, mut best) = (0, 0, -1.0);
                    for i in 0..k {
                        for j in i + 1..k {
                            let d = distance(&support[i], &support[j]);
                            if d > best {
                                (a, b, best) = (i, j, d);
                            }
                        }
                    }
                    let center = support[a].iter().zip(&support[b]).map(|(x, y)| 0.5 * (x + y)).collect();
                    Sphere {
                        center,
                        radius2: 0.25 * best * best,
                    }
                }
            }
        }
    }
}

fn move_to_front(points: &mut [Vec<f64>], end: usize, support: &mut Vec<Vec<f64>>, dim: usize) -> Sphere {
    let mut sphere = circumsphere(support, dim);
    if support.len() == dim + 1 {
        return sphere;
    }
    for i in 0..end {
        if !sphere.covers(&points[i]) {
            support.push(points[i].clone());
            sphere = move_to_front(points, i, support, dim);
            support.pop();
            points[..=i].rotate_right(1);
        }
    }
    sphere
}

/// Minimum enclosing ball of a point set (Welzl, move-to-front variant).
/// Deterministic for a given input order.
pub fn min_enclosing_ball(points: &[Point]) -> Result<Ball> {
    let Some(first) = points.first() else {
        return Err(Error::invalid("enclosing ball of an empty point set"));
    };
    let dim = first.dim();
    for p in points {
        check_dim(dim, p.dim())?;
    }
    let mut pts: Vec<Vec<f64>> = points.iter().map(|p| p.coords().to_vec()).collect();
    let n = pts.len();
    let sphere = move_to_front(&mut pts, n, &mut Vec::new(), dim);
    let radius = sphere.radius2.max(0.0).sqrt();
    Ball::new(Point::from_vec(sphere.center), radius.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_ball_is_circumcircle() {
        let pts: Vec<Point> = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .into_iter()
            .map(Point::from)
            .collect();
        let b = min_enclosing_ball(&pts).unwrap();
        assert!((b.center().coords()[0] - 0.5).abs() < 1e-12);
        assert!((b.center().coords()[1] - 0.5).abs() < 1e-12);
        assert!((b.radius() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn obtuse_triangle_uses_longest_side() {
        let pts: Vec<Point> = [[0.0, 0.0], [4.0, 0.0], [2.0, 0.5]]
            .into_iter()
            .map(Point::from)
            .collect();
        let b = min_enclosing_ball(&pts).unwrap();
        assert!((b.radius() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn covers_random_cloud_3d() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point> = (0..200)
            .map(|_| Point::from_vec((0..3).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let b = min_enclosing_ball(&pts).unwrap();
        for p in &pts {
            assert!(b.center().distance(p) <= b.radius() + 1e-9);
        }
        // Minimality: some point is on the sphere.
        let far = pts.iter().map(|p| b.center().distance(p)).fold(0.0, f64::max);
        assert!((far - b.radius()).abs() < 1e-9);
    }
}
