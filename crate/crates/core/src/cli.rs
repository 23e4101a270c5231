//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use crate::cspace::{minkowski_cobstacle_set, RobotShape};
use crate::error::{Error, Result};
use crate::geometry::PolyconvexSet;
use crate::io::{fmt_num, load_shape, parse_point, parse_samples_csv, shape_to_json, write_nodes_csv};
use crate::montecarlo::{
    estimate_hit_probability_detailed, run_experiment, ExperimentConfig, ExperimentReport, Timestamps,
};
use crate::obprm::{generate_nodes, ObprmParams, Registration};
use crate::roadmap::{build_roadmap, query, Query};
use crate::valuations::{crofton_estimate_with_error, predicted_success, PredictionInput, PredictionVariant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const SUMMARY_HEADER: &str =
    "name,area,perimeter,diameter,predicted_paper,predicted_corrected,obprm_rate,obprm_ci,drop_rate,drop_ci";

#[derive(Debug, Parser)]
#[command(
    name = "obprm",
    version,
    about = "Obstacle-based PRM sampling and its success-rate analysis"
)]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Paper,
    Corrected,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form success probability.
    Predict {
        #[arg(long)]
        dim: usize,
        /// Boundary measure (perimeter or surface area).
        #[arg(long)]
        boundary: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "bounding-diameter")]
        bounding_diameter: f64,
        #[arg(long, value_enum, default_value = "paper")]
        variant: VariantArg,
    },
    /// Generate nodes near an obstacle surface.
    Obprm {
        #[arg(long)]
        shape: PathBuf,
        #[arg(long, default_value_t = 200)]
        rays: usize,
        #[arg(long)]
        delta: f64,
        /// Ray length, or "auto" for diameter + 2 delta.
        #[arg(long = "ray-length", default_value = "auto")]
        ray_length: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Registration point `x,y[,z]`; defaults to the largest part's centroid.
        #[arg(long, allow_hyphen_values = true)]
        origin: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Estimate the needle-drop hit probability.
    DropSegments {
        #[arg(long)]
        shape: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate a planar perimeter from random lines.
    Crofton {
        #[arg(long)]
        shape: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        lines: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Translational C-obstacle of an obstacle for a convex robot.
    Minkowski {
        #[arg(long)]
        obstacle: PathBuf,
        #[arg(long)]
        robot: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a roadmap from samples and query it.
    Plan {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, allow_hyphen_values = true)]
        goal: String,
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
    },
    /// Run a full experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "out-dir", default_value = ".")]
        out_dir: PathBuf,
        /// Record wall-clock start and end times in the report.
        #[arg(long)]
        timestamps: bool,
    },
}

/// Parsed and range-checked command line.
#[derive(Debug)]
pub struct CliConfig {
    pub threads: Option<usize>,
    pub command: Command,
}

/// A command line that cannot be run as given.
#[derive(Debug)]
pub enum UsageError {
    /// Help or version output; not a failure.
    Info(String),
    Invalid(String),
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UsageError::Info(s) | UsageError::Invalid(s) => f.write_str(s),
        }
    }
}

fn positive(flag: &str, x: f64) -> std::result::Result<(), UsageError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(UsageError::Invalid(format!("--{flag} must be positive, got {x}")))
    }
}

fn at_least_one(flag: &str, x: u64) -> std::result::Result<(), UsageError> {
    if x >= 1 {
        Ok(())
    } else {
        Err(UsageError::Invalid(format!("--{flag} must be at least 1")))
    }
}

fn existing(flag: &str, p: &Path) -> std::result::Result<(), UsageError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(UsageError::Invalid(format!("--{flag}: no such file '{}'", p.display())))
    }
}

fn point_arg(flag: &str, s: &str) -> std::result::Result<(), UsageError> {
    parse_point(s)
        .map(|_| ())
        .map_err(|e| UsageError::Invalid(format!("--{flag}: {e}")))
}

pub fn parse_and_validate<I, T>(argv: I) -> std::result::Result<CliConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind::*;
        match e.kind() {
            DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand if e.exit_code() == 0 => {
                UsageError::Info(e.render().to_string())
            }
            _ => UsageError::Invalid(e.render().to_string()),
        }
    })?;
    if let Some(t) = cli.threads {
        at_least_one("threads", t as u64)?;
    }
    match &cli.command {
        Command::Predict {
            dim,
            boundary,
            delta,
            bounding_diameter,
            ..
        } => {
            at_least_one("dim", *dim as u64)?;
            positive("boundary", *boundary)?;
            positive("delta", *delta)?;
            positive("bounding-diameter", *bounding_diameter)?;
            if bounding_diameter < delta {
                return Err(UsageError::Invalid(
                    "--bounding-diameter must be at least --delta".into(),
                ));
            }
        }
        Command::Obprm {
            shape,
            rays,
            delta,
            ray_length,
            origin,
            ..
        } => {
            existing("shape", shape)?;
            at_least_one("rays", *rays as u64)?;
            positive("delta", *delta)?;
            if ray_length != "auto" {
                let l: f64 = ray_length.parse().map_err(|_| {
                    UsageError::Invalid(format!("--ray-length must be a number or 'auto', got '{ray_length}'"))
                })?;
                positive("ray-length", l)?;
                if l <= *delta {
                    return Err(UsageError::Invalid("--ray-length must exceed --delta".into()));
                }
            }
            if let Some(o) = origin {
                point_arg("origin", o)?;
            }
        }
        Command::DropSegments {
            shape, delta, trials, ..
        } => {
            existing("shape", shape)?;
            positive("delta", *delta)?;
            at_least_one("trials", *trials)?;
        }
        Command::Crofton { shape, lines, .. } => {
            existing("shape", shape)?;
            at_least_one("lines", *lines as u64)?;
        }
        Command::Minkowski { obstacle, robot, .. } => {
            existing("obstacle", obstacle)?;
            existing("robot", robot)?;
        }
        Command::Plan {
            env,
            samples,
            k,
            start,
            goal,
            resolution,
        } => {
            existing("env", env)?;
            existing("samples", samples)?;
            at_least_one("k", *k as u64)?;
            point_arg("start", start)?;
            point_arg("goal", goal)?;
            positive("resolution", *resolution)?;
        }
        Command::Experiment { config, .. } => existing("config", config)?,
    }
    Ok(CliConfig {
        threads: cli.threads,
        command: cli.command,
    })
}

/// 2D drawing: obstacle outlines and node markers, fitted to the canvas.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SvgScene {
    pub width: f64,
    pub height: f64,
    pub outlines: Vec<Vec<[f64; 2]>>,
    pub markers: Vec<[f64; 2]>,
    pub legend: String,
}

impl SvgScene {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            ..Self::default()
        }
    }

    /// One outline per part, vertices in boundary order.
    pub fn add_obstacle(&mut self, set: &PolyconvexSet) -> Result<()> {
        if set.dim() != 2 {
            return Err(Error::UnsupportedDimension(set.dim()));
        }
        for part in set.parts() {
            self.outlines
                .push(part.vertices().iter().map(|v| [v.coords()[0], v.coords()[1]]).collect());
        }
        Ok(())
    }

    fn data_bounds(&self) -> Option<([f64; 2], [f64; 2])> {
        let mut pts = self.outlines.iter().flatten().chain(&self.markers).peekable();
        pts.peek()?;
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in pts {
            for j in 0..2 {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        Some((lo, hi))
    }
}

/// Deterministic SVG text for `scene`; y grows upward in data coordinates.
pub fn render_svg(scene: &SvgScene) -> String {
    let (w, h) = (scene.width, scene.height);
    let margin = 0.05 * w.min(h);
    type Map = Box<dyn Fn(&[f64; 2]) -> (f64, f64)>;
    let map: Map = match scene.data_bounds() {
        Some((lo, hi)) => {
            let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
            let s = (w.min(h) - 2.0 * margin) / span;
            Box::new(move |p| (margin + (p[0] - lo[0]) * s, h - margin - (p[1] - lo[1]) * s))
        }
        None => Box::new(|p| (p[0], p[1])),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    for poly in &scene.outlines {
        let pts: Vec<String> = poly
            .iter()
            .chain(poly.first())
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="#d9d9d9" stroke="black" stroke-width="1"/>"##,
            pts.join(" ")
        );
    }
    for p in &scene.markers {
        let (x, y) = map(p);
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2" fill="red"/>"#);
    }
    if !scene.legend.is_empty() {
        let text = scene
            .legend
            .replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;");
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{text}</text>"#,
            margin,
            0.6 * margin + 6.0
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(scene: &SvgScene, path: &Path) -> Result<()> {
    fs::write(path, render_svg(scene)).map_err(|e| file_error(path, e))
}

fn file_error(path: &Path, e: std::io::Error) -> Error {
    Error::File {
        path: path.display().to_string(),
        source: Box::new(e.into()),
    }
}

/// One summary row per obstacle, header [`SUMMARY_HEADER`].
pub fn summary_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER.split(','))?;
    for o in &report.obstacles {
        let ci = |lo: f64, hi: f64| format!("{};{}", fmt_num(lo), fmt_num(hi));
        w.write_record([
            o.name.clone(),
            fmt_num(o.volume),
            fmt_num(o.surface),
            fmt_num(o.diameter),
            fmt_num(o.predicted_paper),
            fmt_num(o.predicted_corrected),
            fmt_num(o.obprm.point_estimate),
            ci(o.obprm.ci_low, o.obprm.ci_high),
            fmt_num(o.drop.point_estimate),
            ci(o.drop.ci_low, o.drop.ci_high),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.json` and `summary.csv` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| file_error(dir, e))?;
    let json = dir.join("report.json");
    let csv = dir.join("summary.csv");
    fs::write(&json, report.to_json()).map_err(|e| file_error(&json, e))?;
    fs::write(&csv, summary_csv(report)?).map_err(|e| file_error(&csv, e))?;
    Ok((json, csv))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn run_command(cmd: &Command, out: &mut dyn std::io::Write) -> Result<()> {
    match cmd {
        Command::Predict {
            dim,
            boundary,
            delta,
            bounding_diameter,
            variant,
        } => {
            let p = predicted_success(&PredictionInput {
                dimension: *dim,
                boundary_measure: *boundary,
                delta: *delta,
                d: *bounding_diameter,
                variant: match variant {
                    VariantArg::Paper => PredictionVariant::PaperLiteral,
                    VariantArg::Corrected => PredictionVariant::RadiusCorrected,
                },
            })?;
            if p > 1.0 {
                log::warn!("predicted value {p} exceeds 1");
            }
            writeln!(out, "{}", fmt_num(p))?;
        }
        Command::Obprm {
            shape,
            rays,
            delta,
            ray_length,
            seed,
            origin,
            out: csv_path,
            svg,
        } => {
            let set = load_shape(shape)?;
            let l = match ray_length.as_str() {
                "auto" => ObprmParams::auto_length(&set, *delta),
                s => s.parse().map_err(|_| Error::invalid("bad ray length"))?,
            };
            let mut params = ObprmParams::new(*rays, l, *delta)?;
            if let Some(o) = origin {
                params = params.with_registration(Registration::Explicit(parse_point(o)?));
            }
            let batch = generate_nodes(&set, &params, *seed)?;
            match csv_path {
                Some(p) => {
                    let f = fs::File::create(p).map_err(|e| file_error(p, e))?;
                    write_nodes_csv(&batch, set.dim(), std::io::BufWriter::new(f))?;
                    writeln!(
                        out,
                        "success_rate={}, nodes={}, rays={}",
                        fmt_num(batch.success_rate),
                        batch.success_count,
                        rays
                    )?;
                }
                None => write_nodes_csv(&batch, set.dim(), &mut *out)?,
            }
            if let Some(p) = svg {
                let mut scene = SvgScene::new(800.0, 800.0);
                scene.add_obstacle(&set)?;
                scene.markers = batch.nodes().map(|x| [x.coords()[0], x.coords()[1]]).collect();
                scene.legend = format!("{} free nodes from {} rays", batch.success_count, rays);
                write_svg(&scene, p)?;
            }
        }
        Command::DropSegments {
            shape,
            delta,
            trials,
            seed,
        } => {
            let set = load_shape(shape)?;
            let s = estimate_hit_probability_detailed(&set, *delta, *trials, *seed)?;
            writeln!(
                out,
                "rate={}, ci=[{}, {}], trials={}, bounding_diameter={}",
                fmt_num(s.stats.point_estimate),
                fmt_num(s.stats.ci_low),
                fmt_num(s.stats.ci_high),
                trials,
                fmt_num(s.bounding_diameter)
            )?;
        }
        Command::Crofton { shape, lines, seed } => {
            let set = load_shape(shape)?;
            let e = crofton_estimate_with_error(&set, *lines, *seed)?;
            writeln!(
                out,
                "perimeter={}, std_error={}, lines={}",
                fmt_num(e.value),
                fmt_num(e.std_error),
                lines
            )?;
        }
        Command::Minkowski {
            obstacle,
            robot,
            out: path,
        } => {
            let o = load_shape(obstacle)?;
            let r = load_shape(robot)?;
            if r.parts().len() != 1 {
                return Err(Error::invalid("robot shape must have exactly one convex part"));
            }
            let c = minkowski_cobstacle_set(&o, &RobotShape::new(r.parts()[0].clone())?)?;
            let json = shape_to_json(&c);
            match path {
                Some(p) => fs::write(p, &json).map_err(|e| file_error(p, e))?,
                None => out.write_all(json.as_bytes())?,
            }
            writeln!(
                out,
                "volume={}, surface={}",
                fmt_num(c.volume()?),
                fmt_num(c.surface_measure()?)
            )?;
        }
        Command::Plan {
            env,
            samples,
            k,
            start,
            goal,
            resolution,
        } => {
            let set = load_shape(env)?;
            let text = fs::read_to_string(samples).map_err(|e| file_error(samples, e))?;
            let pts = parse_samples_csv(&text)?;
            let r = build_roadmap(&set, &pts, *k, *resolution)?;
            let q = Query {
                start: parse_point(start)?,
                goal: parse_point(goal)?,
            };
            match query(&r, &set, &q, *resolution)? {
                Some(path) => {
                    for p in path {
                        let c: Vec<String> = p.coords().iter().map(|&x| fmt_num(x)).collect();
                        writeln!(out, "{}", c.join(","))?;
                    }
                }
                None => writeln!(out, "NO PATH")?,
            }
        }
        Command::Experiment {
            config,
            out_dir,
            timestamps,
        } => {
            let started = unix_now();
            let cfg = ExperimentConfig::load(config)?;
            let mut report = run_experiment(&cfg)?;
            if *timestamps {
                report.timestamps = Some(Timestamps {
                    started_unix: started,
                    finished_unix: unix_now(),
                });
            }
            let (json, csv) = write_report(&report, out_dir)?;
            writeln!(out, "wrote {} and {}", json.display(), csv.display())?;
        }
    }
    Ok(())
}

/// Runs a validated command, inside a dedicated pool when `threads` is set.
pub fn execute(cfg: &CliConfig, out: &mut (dyn std::io::Write + Send)) -> Result<()> {
    match cfg.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::invalid(e.to_string()))?;
            pool.install(|| run_command(&cfg.command, out))
        }
        None => run_command(&cfg.command, out),
    }
}

/// Full entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_and_validate(argv) {
        Ok(c) => c,
        Err(UsageError::Info(s)) => {
            print!("{s}");
            return EXIT_OK;
        }
        Err(UsageError::Invalid(s)) => {
            eprintln!("{}", s.trim_end());
            return EXIT_USAGE;
        }
    };
    match execute(&cfg, &mut std::io::stdout()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolytope;

    #[test]
    fn predict_flags() {
        let argv = "obprm predict --dim 2 --boundary 4 --delta 0.1 --bounding-diameter 2 --variant paper";
        let c = parse_and_validate(argv.split(' ')).unwrap();
        assert!(matches!(
            c.command,
            Command::Predict {
                variant: VariantArg::Paper,
                ..
            }
        ));
        let mut buf = Vec::new();
        execute(&c, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0.0785564184522\n");
    }

    #[test]
    fn usage_errors_name_the_flag() {
        let e = parse_and_validate("obprm predict --dim 2 --boundary 4 --delta -1 --bounding-diameter 2".split(' '))
            .unwrap_err();
        assert!(e.to_string().contains("--delta"), "{e}");
        let e = parse_and_validate("obprm obprm --delta 1".split(' ')).unwrap_err();
        assert!(e.to_string().contains("--shape"), "{e}");
        assert!(matches!(
            parse_and_validate(["obprm", "nope"]),
            Err(UsageError::Invalid(_))
        ));
        assert!(matches!(
            parse_and_validate(["obprm", "--help"]),
            Err(UsageError::Info(_))
        ));
        let e = parse_and_validate("obprm crofton --shape /does/not/exist.json".split(' ')).unwrap_err();
        assert!(e.to_string().contains("--shape"));
    }

    #[test]
    fn svg_elements() {
        let empty = render_svg(&SvgScene::new(100.0, 100.0));
        assert!(empty.starts_with("<svg") && empty.ends_with("</svg>\n"));
        assert!(!empty.contains("<polyline") && !empty.contains("<circle"));

        let mut scene = SvgScene::new(400.0, 300.0);
        scene
            .add_obstacle(&PolyconvexSet::single(
                ConvexPolytope::axis_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            ))
            .unwrap();
        scene.markers = (0..10).map(|i| [1.0 + 0.1 * i as f64, 0.5]).collect();
        let s = render_svg(&scene);
        assert_eq!(s.matches("<polyline").count(), 1);
        assert_eq!(s.matches("<circle").count(), 10);
        assert_eq!(s, render_svg(&scene));
        for cap in s.split("cx=\"").skip(1) {
            let x: f64 = cap.split('"').next().unwrap().parse().unwrap();
            assert!((0.0..=400.0).contains(&x));
        }
        let cube = PolyconvexSet::single(ConvexPolytope::axis_box(&[0.0; 3], &[1.0; 3]).unwrap());
        assert!(scene.add_obstacle(&cube).is_err());
    }
}
