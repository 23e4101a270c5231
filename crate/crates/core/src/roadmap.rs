//! Probabilistic roadmap over sampled free configurations: k-nearest
//! connection with a straight-line local planner, A* queries.

use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, Point, PolyconvexSet};

/// True iff every point sampled along `a -> b` at spacing at most
/// `resolution` (endpoints included) lies outside `env`.
pub fn local_planner(env: &PolyconvexSet, a: &Point, b: &Point, resolution: f64) -> bool {
    debug_assert!(resolution > 0.0);
    let len = a.distance(b);
    let steps = (len / resolution).ceil().max(1.0) as usize;
    let dir: Vec<f64> = b.coords().iter().zip(a.coords()).map(|(y, x)| y - x).collect();
    (0..=steps).all(|i| {
        let t = i as f64 / steps as f64;
        let x: Vec<f64> = a.coords().iter().zip(&dir).map(|(p, d)| p + t * d).collect();
        !env.contains_coords(&x)
    })
}

#[derive(Clone, Debug)]
pub struct Roadmap {
    nodes: Vec<Point>,
    graph: UnGraph<(), f64>,
    k: usize,
    resolution: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub start: Point,
    pub goal: Point,
}

impl Roadmap {
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Edges `(i, j, length)` with `i < j`, in insertion order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.graph
            .edge_indices()
            .map(|e| {
                let (a, b) = self.graph.edge_endpoints(e).expect("edge exists");
                let (a, b) = (a.index().min(b.index()), a.index().max(b.index()));
                (a, b, self.graph[e])
            })
            .collect()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.graph.neighbors(NodeIndex::new(i)).map(|n| n.index()).collect();
        v.sort_unstable();
        v
    }

    pub fn connected_components(&self) -> usize {
        petgraph::algo::connected_components(&self.graph)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }
}

/// Indices of the `k` points nearest to `x` by (distance, index), skipping `skip`.
fn nearest(points: &[Point], x: &Point, k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(j, p)| (x.distance(p), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Connects each sample to its `k` nearest neighbours (ties by index) when
/// the local planner approves. Samples inside `env` are rejected by index.
pub fn build_roadmap(env: &PolyconvexSet, samples: &[Point], k: usize, resolution: f64) -> Result<Roadmap> {
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::invalid("resolution must be positive"));
    }
    for (index, s) in samples.iter().enumerate() {
        check_dim(env.dim(), s.dim())?;
        if env.contains_coords(s.coords()) {
            return Err(Error::SampleInCollision { index });
        }
    }
    let candidate_edges: Vec<Vec<(usize, f64)>> = samples
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            nearest(samples, p, k, Some(i))
                .into_iter()
                .filter(|&j| local_planner(env, p, &samples[j], resolution))
                .map(|j| (j, p.distance(&samples[j])))
                .collect()
        })
        .collect();
    let mut graph = UnGraph::<(), f64>::with_capacity(samples.len(), samples.len() * k);
    for _ in samples {
        graph.add_node(());
    }
    for (i, list) in candidate_edges.into_iter().enumerate() {
        for (j, w) in list {
            let (a, b) = (NodeIndex::new(i), NodeIndex::new(j));
            if graph.find_edge(a, b).is_none() {
                graph.add_edge(a, b, w);
            }
        }
    }
    Ok(Roadmap {
        nodes: samples.to_vec(),
        graph,
        k,
        resolution,
    })
}

/// Shortest roadmap path from `q.start` to `q.goal`. Start and goal join the
/// `k` nearest milestones reachable by the local planner. `None` when they
/// cannot be connected.
pub fn query(r: &Roadmap, env: &PolyconvexSet, q: &Query, resolution: f64) -> Result<Option<Vec<Point>>> {
    for p in [&q.start, &q.goal] {
        check_dim(env.dim(), p.dim())?;
        if env.contains_coords(p.coords()) {
            return Err(Error::invalid("query point lies inside an obstacle"));
        }
    }
    if q.start == q.goal {
        return Ok(Some(vec![q.start.clone()]));
    }
    if local_planner(env, &q.start, &q.goal, resolution) {
        return Ok(Some(vec![q.start.clone(), q.goal.clone()]));
    }
    let attach = |x: &Point| -> Vec<(usize, f64)> {
        nearest(&r.nodes, x, r.nodes.len(), None)
            .into_iter()
            .filter(|&j| local_planner(env, x, &r.nodes[j], resolution))
            .take(r.k)
            .map(|j| (j, x.distance(&r.nodes[j])))
            .collect()
    };
    let (from, to) = (attach(&q.start), attach(&q.goal));
    if from.is_empty() || to.is_empty() {
        return Ok(None);
    }
    let mut g = r.graph.clone();
    let s = g.add_node(());
    let t = g.add_node(());
    for (j, w) in from {
        g.add_edge(s, NodeIndex::new(j), w);
    }
    for (j, w) in to {
        g.add_edge(NodeIndex::new(j), t, w);
    }
    let point = |n: NodeIndex| -> &Point {
        if n == s {
            &q.start
        } else if n == t {
            &q.goal
        } else {
            &r.nodes[n.index()]
        }
    };
    let found = astar(&g, s, |n| n == t, |e| *e.weight(), |n| point(n).distance(&q.goal));
    Ok(found.map(|(_, path)| path.into_iter().map(|n| point(n).clone()).collect()))
}

pub fn path_length(path: &[Point]) -> f64 {
    path.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolytope;

    fn wall() -> PolyconvexSet {
        PolyconvexSet::single(ConvexPolytope::axis_box(&[-0.1, -10.0], &[0.1, 10.0]).unwrap())
    }

    fn block() -> PolyconvexSet {
        PolyconvexSet::single(ConvexPolytope::axis_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap())
    }

    fn far_away() -> PolyconvexSet {
        PolyconvexSet::single(ConvexPolytope::axis_box(&[100.0, 100.0], &[101.0, 101.0]).unwrap())
    }

    #[test]
    fn planner_clear_and_blocked() {
        let env = block();
        assert!(local_planner(
            &env,
            &Point::from([-3.0, -2.0]),
            &Point::from([-3.0, 2.0]),
            0.01
        ));
        assert!(!local_planner(
            &env,
            &Point::from([-3.0, 0.0]),
            &Point::from([3.0, 0.0]),
            0.01
        ));
    }

    #[test]
    fn planner_grazing_agrees_with_boundary_test() {
        let env = block();
        for y in [1.0, 1.0 + 1e-3, 0.999] {
            let (a, b) = (Point::from([-3.0, y]), Point::from([3.0, y]));
            let seg = crate::geometry::Segment::new(a.clone(), b.clone()).unwrap();
            assert_eq!(
                local_planner(&env, &a, &b, 1e-3),
                !env.segment_intersects_boundary(&seg).unwrap(),
                "y = {y}"
            );
        }
    }

    #[test]
    fn collinear_points_form_path_graph() {
        let pts: Vec<Point> = (0..3).map(|i| Point::from([i as f64, 0.0])).collect();
        let r = build_roadmap(&far_away(), &pts, 1, 0.1).unwrap();
        assert_eq!(r.neighbors(0), vec![1]);
        assert_eq!(r.neighbors(1), vec![0, 2]);
        let r = build_roadmap(&far_away(), &pts, 2, 0.1).unwrap();
        assert_eq!(r.edges().len(), 3);
    }

    #[test]
    fn wall_splits_components() {
        let pts: Vec<Point> = [[-1.0, 0.0], [-1.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
            .into_iter()
            .map(Point::from)
            .collect();
        let r = build_roadmap(&wall(), &pts, 3, 0.01).unwrap();
        assert_eq!(r.connected_components(), 2);
        let q = Query {
            start: Point::from([-2.0, 0.0]),
            goal: Point::from([2.0, 0.0]),
        };
        assert_eq!(query(&r, &wall(), &q, 0.01).unwrap(), None);
    }

    #[test]
    fn rejects_colliding_samples() {
        let pts = vec![Point::from([-1.0, 0.0]), Point::from([0.0, 0.0])];
        assert!(matches!(
            build_roadmap(&wall(), &pts, 1, 0.1),
            Err(Error::SampleInCollision { index: 1 })
        ));
        assert!(build_roadmap(&wall(), &pts[..1], 0, 0.1).is_err());
    }

    #[test]
    fn trivial_queries() {
        let r = build_roadmap(&block(), &[Point::from([5.0, 5.0])], 1, 0.1).unwrap();
        let p = Point::from([3.0, 3.0]);
        let q = Query {
            start: p.clone(),
            goal: p.clone(),
        };
        assert_eq!(query(&r, &block(), &q, 0.1).unwrap(), Some(vec![p.clone()]));
        let q = Query {
            start: p.clone(),
            goal: Point::from([3.0, -3.0]),
        };
        assert_eq!(query(&r, &block(), &q, 0.1).unwrap().unwrap().len(), 2);
        let bad = Query {
            start: Point::origin(2),
            goal: p,
        };
        assert!(query(&r, &block(), &bad, 0.1).is_err());
    }

    #[test]
    fn detour_around_block() {
        let pts: Vec<Point> = [[-2.0, 2.0], [2.0, 2.0], [0.0, 2.5]]
            .into_iter()
            .map(Point::from)
            .collect();
        let env = block();
        let r = build_roadmap(&env, &pts, 2, 0.01).unwrap();
        let q = Query {
            start: Point::from([-3.0, 0.0]),
            goal: Point::from([3.0, 0.0]),
        };
        let path = query(&r, &env, &q, 0.01).unwrap().unwrap();
        assert_eq!(path.first(), Some(&q.start));
        assert_eq!(path.last(), Some(&q.goal));
        assert!(path_length(&path) >= q.start.distance(&q.goal));
        for w in path.windows(2) {
            assert!(local_planner(&env, &w[0], &w[1], 0.01));
        }
    }
}
