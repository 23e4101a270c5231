use obprm::geometry::{ConvexPolytope, Point, PolyconvexSet};
use obprm::obprm::{generate_nodes, ObprmParams};
use obprm::rng::{derive_seed, SeededRng};
use obprm::roadmap::{build_roadmap, query, Query};
use rand::Rng;

const HALF_GAP: f64 = 0.25;
const BUDGET: usize = 200;
const K: usize = 12;
const RESOLUTION: f64 = 0.05;

/// A thick wall across the workspace `[-10, 10]^2` with one corridor at `y = 0`.
fn wall_with_corridor() -> PolyconvexSet {
    PolyconvexSet::new(vec![
        ConvexPolytope::axis_box(&[-2.0, HALF_GAP], &[2.0, 10.0]).unwrap(),
        ConvexPolytope::axis_box(&[-2.0, -10.0], &[2.0, -HALF_GAP]).unwrap(),
    ])
    .unwrap()
}

fn uniform_free(env: &PolyconvexSet, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = SeededRng::new(seed).stream(0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = Point::from([rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)]);
        if !env.contains(&p).unwrap() {
            out.push(p);
        }
    }
    out
}

/// Nodes grown from each wall block, kept if free of the whole environment
/// and inside the workspace.
fn obstacle_nodes(env: &PolyconvexSet, count: usize, seed: u64) -> Vec<Point> {
    let per_part = count / env.parts().len();
    let mut out = Vec::new();
    for (i, part) in env.parts().iter().enumerate() {
        let single = PolyconvexSet::single(part.clone());
        let params = ObprmParams::new(4 * per_part, ObprmParams::auto_length(&single, 0.1), 0.1).unwrap();
        let batch = generate_nodes(&single, &params, derive_seed(seed, i as u64)).unwrap();
        out.extend(
            batch
                .nodes()
                .filter(|p| !env.contains(p).unwrap() && p.coords().iter().all(|c| c.abs() <= 10.0))
                .take(per_part)
                .cloned(),
        );
    }
    out
}

fn connects(env: &PolyconvexSet, samples: &[Point]) -> bool {
    let r = build_roadmap(env, samples, K, RESOLUTION).unwrap();
    let q = Query {
        start: Point::from([-6.0, 5.0]),
        goal: Point::from([6.0, 5.0]),
    };
    query(&r, env, &q, RESOLUTION).unwrap().is_some()
}

#[test]
fn obstacle_nodes_cross_the_corridor_more_often_than_uniform_nodes() {
    let env = wall_with_corridor();
    let (mut mixed_wins, mut uniform_wins) = (0, 0);
    for seed in 0..20 {
        let uniform = uniform_free(&env, BUDGET, derive_seed(seed, 100));
        let mut mixed = uniform_free(&env, BUDGET / 2, derive_seed(seed, 100));
        mixed.extend(obstacle_nodes(&env, BUDGET / 2, seed));
        assert_eq!(mixed.len(), BUDGET);
        mixed_wins += connects(&env, &mixed) as usize;
        uniform_wins += connects(&env, &uniform) as usize;
    }
    eprintln!("connected: mixed {mixed_wins}/20, uniform {uniform_wins}/20");
    assert!(mixed_wins > 10, "mixed sampling connected only {mixed_wins}/20");
    assert!(uniform_wins < 10, "uniform sampling connected {uniform_wins}/20");
    assert!(mixed_wins > uniform_wins);
}
