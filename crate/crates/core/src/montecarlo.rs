//! Empirical success estimates: random needle drops, replicated node
//! generation, and the experiment driver that compares both with the closed
//! form.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::geometry::{norm, segment_point_distance, PolyconvexSet};
use crate::io::{load_shape, round_sig};
use crate::obprm::{generate_nodes, sample_direction, ObprmParams};
use crate::rng::{derive_seed, SeededRng};
use crate::valuations::{omega, predicted_success, Estimate, PredictionInput, PredictionVariant};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub successes: u64,
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TrialStats {
    /// Binomial proportion with a 95% Wilson score interval.
    pub fn wilson(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 || successes > trials {
            return Err(Error::invalid("need 0 <= successes <= trials and trials >= 1"));
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Ok(Self {
            trials,
            successes,
            point_estimate: p,
            ci_low: (center - half).clamp(0.0, p),
            ci_high: (center + half).clamp(p, 1.0),
        })
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn overlaps(&self, other: &TrialStats) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }

    fn rounded(self) -> Self {
        Self {
            point_estimate: round_sig(self.point_estimate),
            ci_low: round_sig(self.ci_low),
            ci_high: round_sig(self.ci_high),
            ..self
        }
    }
}

/// Random placement of a needle of length `delta`, conditioned on meeting
/// the ball `B_d` of diameter `d = diam(A) + 2 delta` about the centre of
/// the obstacle's enclosing ball.
#[derive(Clone, Debug)]
pub struct SegmentDrop<'a> {
    obstacle: &'a PolyconvexSet,
    delta: f64,
    center: Vec<f64>,
    ball_radius: f64,
    proposal_radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DropOutcome {
    pub hit: bool,
    /// Placements drawn until one met `B_d`.
    pub proposals: u64,
}

impl<'a> SegmentDrop<'a> {
    pub fn new(obstacle: &'a PolyconvexSet, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("delta must be positive"));
        }
        let d = obstacle.diameter() + 2.0 * delta;
        Ok(Self {
            obstacle,
            delta,
            center: obstacle.enclosing_ball().center().coords().to_vec(),
            ball_radius: 0.5 * d,
            proposal_radius: 0.5 * d + 0.5 * delta,
        })
    }

    /// Diameter `d` of the conditioning ball.
    pub fn bounding_diameter(&self) -> f64 {
        2.0 * self.ball_radius
    }

    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> DropOutcome {
        let n = self.center.len();
        let mut proposals = 0;
        loop {
            proposals += 1;
            let (p, q) = self.propose(rng, n);
            if segment_point_distance(&p, &q, &self.center) <= self.ball_radius {
                return DropOutcome {
                    hit: self.obstacle.segment_hits_boundary(&p, &q),
                    proposals,
                };
            }
        }
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
        let g = sample_direction(rng, n);
        let u: f64 = rng.random();
        let r = self.proposal_radius * u.powf(1.0 / n as f64);
        let dir = sample_direction(rng, n);
        let h = 0.5 * self.delta;
        let m: Vec<f64> = self.center.iter().zip(&g).map(|(c, gi)| c + r * gi).collect();
        let p = m.iter().zip(&dir).map(|(x, d)| x - h * d).collect();
        let q = m.iter().zip(&dir).map(|(x, d)| x + h * d).collect();
        (p, q)
    }
}

/// One conditioned needle drop: whether it meets the obstacle boundary.
pub fn drop_segment_trial<R: Rng + ?Sized>(obstacle: &PolyconvexSet, delta: f64, rng: &mut R) -> Result<bool> {
    Ok(SegmentDrop::new(obstacle, delta)?.trial(rng).hit)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DropStats {
    pub stats: TrialStats,
    pub proposals: u64,
    pub bounding_diameter: f64,
}

impl DropStats {
    pub fn acceptance_rate(&self) -> f64 {
        self.stats.trials as f64 / self.proposals as f64
    }
}

/// Trial `i` draws from stream `i` of `seed`.
pub fn estimate_hit_probability(obstacle: &PolyconvexSet, delta: f64, trials: u64, seed: u64) -> Result<TrialStats> {
    Ok(estimate_hit_probability_detailed(obstacle, delta, trials, seed)?.stats)
}

pub fn estimate_hit_probability_detailed(
    obstacle: &PolyconvexSet,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<DropStats> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let drop = SegmentDrop::new(obstacle, delta)?;
    let streams = SeededRng::new(seed);
    let (hits, proposals) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let o = drop.trial(&mut streams.stream(i));
            (o.hit as u64, o.proposals)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(DropStats {
        stats: TrialStats::wilson(hits, trials)?,
        proposals,
        bounding_diameter: drop.bounding_diameter(),
    })
}

/// Mean per-ray success rate over `replications` independent batches with a
/// 95% t-interval; a single replication falls back to the Wilson interval.
/// Replication `r` uses seed `derive_seed(seed, r)`.
pub fn replicate_obprm(
    obstacle: &PolyconvexSet,
    params: &ObprmParams,
    replications: usize,
    seed: u64,
) -> Result<TrialStats> {
    if replications == 0 {
        return Err(Error::invalid("replications must be >= 1"));
    }
    let mut successes = 0u64;
    let mut rates = Vec::with_capacity(replications);
    for r in 0..replications {
        let batch = generate_nodes(obstacle, params, derive_seed(seed, r as u64))?;
        successes += batch.success_count as u64;
        rates.push(batch.success_rate);
    }
    let trials = (replications * params.num_rays) as u64;
    if replications < 2 {
        return TrialStats::wilson(successes, trials);
    }
    let k = replications as f64;
    let mean = successes as f64 / trials as f64;
    let var = rates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let t = StudentsT::new(0.0, 1.0, k - 1.0)
        .map_err(|e| Error::invalid(e.to_string()))?
        .inverse_cdf(0.975);
    let half = t * (var / k).sqrt();
    Ok(TrialStats {
        trials,
        successes,
        point_estimate: mean,
        ci_low: (mean - half).clamp(0.0, mean),
        ci_high: (mean + half).clamp(mean, 1.0),
    })
}

/// Motion integral of the number of points where a moving segment of length
/// `len` meets the obstacle boundary: midpoint uniform over a ball that
/// contains every placement able to reach the obstacle, rotations with total
/// mass one. Sample `i` uses stream `i` of `seed`.
pub fn kinematic_integral_estimate(obstacle: &PolyconvexSet, len: f64, samples: u64, seed: u64) -> Result<Estimate> {
    if !(len > 0.0) || samples == 0 {
        return Err(Error::invalid("segment length and sample count must be positive"));
    }
    let n = obstacle.dim();
    let ball = obstacle.enclosing_ball();
    let c = ball.center().coords().to_vec();
    let rho = ball.radius() + 0.5 * len;
    let streams = SeededRng::new(seed);
    let (s1, s2) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i);
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let gn = norm(&g);
            let u: f64 = rng.random();
            let r = rho * u.powf(1.0 / n as f64) / gn;
            let dir = sample_direction(&mut rng, n);
            let p: Vec<f64> = (0..n).map(|j| c[j] + r * g[j] - 0.5 * len * dir[j]).collect();
            let q: Vec<f64> = (0..n).map(|j| p[j] + len * dir[j]).collect();
            let k = obstacle.crossing_count(&p, &q) as u64;
            (k, k * k)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = samples as f64;
    let mean = s1 as f64 / m;
    let var = if samples > 1 {
        (s2 as f64 - m * mean * mean) / (m - 1.0)
    } else {
        0.0
    };
    let vol = omega(n as i64)? * rho.powi(n as i32);
    Ok(Estimate {
        value: vol * mean,
        std_error: vol * (var.max(0.0) / m).sqrt(),
        samples: samples as usize,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RayLength {
    Auto,
    Fixed(f64),
}

impl Serialize for RayLength {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RayLength::Auto => s.serialize_str("auto"),
            RayLength::Fixed(l) => s.serialize_f64(*l),
        }
    }
}

impl<'de> Deserialize<'de> for RayLength {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(l) => Ok(RayLength::Fixed(l)),
            Repr::Word(w) if w == "auto" => Ok(RayLength::Auto),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "ray_length must be a number or \"auto\", got \"{w}\""
            ))),
        }
    }
}

/// Experiment description. Obstacle paths are relative to the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub obstacles: Vec<PathBuf>,
    pub delta: f64,
    pub rays: usize,
    pub ray_length: RayLength,
    pub replications: usize,
    pub drop_trials: u64,
    pub seed: u64,
    #[serde(skip)]
    source: String,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c: Self = serde_json::from_str(text)?;
        c.source = text.trim().to_string();
        c.base_dir = base_dir.to_path_buf();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let wrap = |e: Error| Error::File {
            path: path.display().to_string(),
            source: Box::new(e),
        };
        let text = std::fs::read_to_string(path).map_err(|e| wrap(e.into()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, dir).map_err(wrap)
    }

    pub fn validate(&self) -> Result<()> {
        if self.obstacles.is_empty() {
            return Err(Error::invalid("config lists no obstacles"));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid("delta must be positive"));
        }
        if self.rays == 0 || self.replications == 0 || self.drop_trials == 0 {
            return Err(Error::invalid("rays, replications and drop_trials must be >= 1"));
        }
        if let RayLength::Fixed(l) = self.ray_length {
            if !(l > self.delta) || !l.is_finite() {
                return Err(Error::invalid("ray_length must exceed delta"));
            }
        }
        Ok(())
    }

    pub fn obstacle_path(&self, i: usize) -> PathBuf {
        self.base_dir.join(&self.obstacles[i])
    }

    /// The config text exactly as read.
    pub fn source(&self) -> &str {
        &self.source
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timestamps {
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstacleReport {
    pub index: usize,
    pub name: String,
    pub dimension: usize,
    /// Area in the plane, volume in space.
    pub volume: f64,
    /// Perimeter in the plane, surface area in space.
    pub surface: f64,
    pub diameter: f64,
    pub bounding_diameter: f64,
    pub ray_length: f64,
    pub predicted_paper: f64,
    pub predicted_corrected: f64,
    pub predicted_paper_exceeds_one: bool,
    pub obprm: TrialStats,
    pub obprm_seed: u64,
    pub drop: TrialStats,
    pub drop_seed: u64,
    pub drop_acceptance_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub note: &'static str,
    pub config: Box<RawValue>,
    pub seed: u64,
    pub obstacles: Vec<ObstacleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Timestamps>,
}

pub const REPORT_NOTE: &str = "obprm rates are per-ray success fractions averaged over replications \
(replication r of obstacle i uses derive_seed(obprm_seed, r), ray j stream j); drop rates are \
conditioned needle drops (trial t uses stream t of drop_seed). Compare orderings across obstacles \
rather than absolute values.";

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn run_obstacle(config: &ExperimentConfig, index: usize) -> Result<ObstacleReport> {
    let path = config.obstacle_path(index);
    let set = load_shape(&path)?;
    let n = set.dim();
    let delta = config.delta;
    let diameter = set.diameter();
    let ray_length = match config.ray_length {
        RayLength::Auto => ObprmParams::auto_length(&set, delta),
        RayLength::Fixed(l) => l,
    };
    let surface = set.surface_measure()?;
    let d = diameter + 2.0 * delta;
    let predict = |variant| {
        predicted_success(&PredictionInput {
            dimension: n,
            boundary_measure: surface,
            delta,
            d,
            variant,
        })
    };
    let predicted_paper = predict(PredictionVariant::PaperLiteral)?;
    let predicted_corrected = predict(PredictionVariant::RadiusCorrected)?;

    let base = derive_seed(config.seed, index as u64);
    let obprm_seed = derive_seed(base, 0);
    let drop_seed = derive_seed(base, 1);
    let params = ObprmParams::new(config.rays, ray_length, delta)?;
    let obprm = replicate_obprm(&set, &params, config.replications, obprm_seed)?;
    let drop = estimate_hit_probability_detailed(&set, delta, config.drop_trials, drop_seed)?;

    let name = config.obstacles[index]
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("obstacle_{index}"));
    Ok(ObstacleReport {
        index,
        name,
        dimension: n,
        volume: round_sig(set.volume()?),
        surface: round_sig(surface),
        diameter: round_sig(diameter),
        bounding_diameter: round_sig(d),
        ray_length: round_sig(ray_length),
        predicted_paper: round_sig(predicted_paper),
        predicted_corrected: round_sig(predicted_corrected),
        predicted_paper_exceeds_one: predicted_paper > 1.0,
        obprm: obprm.rounded(),
        obprm_seed,
        drop: drop.stats.rounded(),
        drop_seed,
        drop_acceptance_rate: round_sig(drop.acceptance_rate()),
    })
}

/// Runs every obstacle in config order. Failures carry the obstacle index.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let obstacles = (0..config.obstacles.len())
        .map(|i| {
            run_obstacle(config, i).map_err(|e| Error::Obstacle {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = if config.source.is_empty() {
        serde_json::to_string(config)?
    } else {
        config.source.clone()
    };
    Ok(ExperimentReport {
        note: REPORT_NOTE,
        config: RawValue::from_string(raw)?,
        seed: config.seed,
        obstacles,
        timestamps: None,
    })
}
