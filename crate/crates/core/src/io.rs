//! Shape files, sample tables and number formatting.
//!
//! Shape JSON:
//!
//! ```json
//! { "dimension": 2,
//!   "parts": [ { "halfspaces": [ { "normal": [1, 0], "offset": 1 } ] } ] }
//! ```
//!
//! Every number written by this crate is rounded to 12 significant digits
//! and printed in its shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolytope, HalfSpace, Point, PolyconvexSet};
use crate::obprm::{NodeBatch, RayStatus};

/// Largest dimension accepted from shape files.
pub const MAX_SHAPE_DIMENSION: usize = 4;
/// Largest number of half-spaces accepted per part.
pub const MAX_PART_HALFSPACES: usize = 64;

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal that round-trips `round_sig(x)`.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        return "0".to_string();
    }
    format!("{r}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDoc {
    pub dimension: usize,
    pub parts: Vec<PartDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartDoc {
    pub halfspaces: Vec<HalfSpaceDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpaceDoc {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl ShapeDoc {
    pub fn from_set(set: &PolyconvexSet) -> Self {
        Self {
            dimension: set.dim(),
            parts: set.parts().iter().map(PartDoc::from_polytope).collect(),
        }
    }

    /// Validates every part; failures name the part and half-space index.
    pub fn to_set(&self) -> Result<PolyconvexSet> {
        let n = self.dimension;
        if n == 0 || n > MAX_SHAPE_DIMENSION {
            return Err(Error::UnsupportedDimension(n));
        }
        if self.parts.is_empty() {
            return Err(Error::invalid("shape has no parts"));
        }
        let parts = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| p.to_polytope(n).map_err(|e| e.in_part(i)))
            .collect::<Result<Vec<_>>>()?;
        PolyconvexSet::new(parts)
    }
}

impl PartDoc {
    pub fn from_polytope(p: &ConvexPolytope) -> Self {
        Self {
            halfspaces: p
                .halfspaces()
                .iter()
                .map(|h| HalfSpaceDoc {
                    normal: h.normal().iter().map(|&c| round_sig(c)).collect(),
                    offset: round_sig(h.offset()),
                })
                .collect(),
        }
    }

    fn to_polytope(&self, n: usize) -> Result<ConvexPolytope> {
        if self.halfspaces.len() > MAX_PART_HALFSPACES {
            return Err(Error::invalid(format!(
                "{} half-spaces exceed the limit of {MAX_PART_HALFSPACES}",
                self.halfspaces.len()
            )));
        }
        let hs = self
            .halfspaces
            .iter()
            .enumerate()
            .map(|(index, h)| {
                if h.normal.len() != n {
                    return Err(Error::InvalidHalfSpace {
                        index,
                        reason: format!("normal has {} components, expected {n}", h.normal.len()),
                    });
                }
                HalfSpace::new(h.normal.clone(), h.offset).map_err(|e| Error::InvalidHalfSpace {
                    index,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ConvexPolytope::from_halfspaces(n, hs)
    }
}

pub fn parse_shape(text: &str) -> Result<PolyconvexSet> {
    let doc: ShapeDoc = serde_json::from_str(text)?;
    doc.to_set()
}

pub fn load_shape(path: &Path) -> Result<PolyconvexSet> {
    let wrap = |e: Error| Error::File {
        path: path.display().to_string(),
        source: Box::new(e),
    };
    let text = fs::read_to_string(path).map_err(|e| wrap(e.into()))?;
    parse_shape(&text).map_err(wrap)
}

pub fn shape_to_json(set: &PolyconvexSet) -> String {
    let mut s = serde_json::to_string_pretty(&ShapeDoc::from_set(set)).expect("shape serializes");
    s.push('\n');
    s
}

/// Parses `x,y[,z...]`.
pub fn parse_point(text: &str) -> Result<Point> {
    let coords = text
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad coordinate '{}' in point '{text}'", c.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    Point::new(coords)
}

fn status_name(s: &RayStatus) -> &'static str {
    match s {
        RayStatus::FreeNode { .. } => "free",
        RayStatus::EndpointInsideObstacle => "endpoint_inside",
        RayStatus::NoBoundaryCrossing => "no_crossing",
    }
}

/// Columns: `ray_index, dir_0.., status, x_0.., iterations, crossing`.
pub fn write_nodes_csv<W: Write>(batch: &NodeBatch, dim: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["ray_index".to_string()];
    header.extend((0..dim).map(|i| format!("dir_{i}")));
    header.push("status".into());
    header.extend((0..dim).map(|i| format!("x_{i}")));
    header.push("iterations".into());
    header.push("crossing".into());
    w.write_record(&header)?;
    for (i, o) in batch.outcomes.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(o.direction.iter().map(|&c| fmt_num(c)));
        row.push(status_name(&o.status).into());
        match &o.status {
            RayStatus::FreeNode {
                point,
                iterations,
                crossing,
                ..
            } => {
                row.extend(point.coords().iter().map(|&c| fmt_num(c)));
                row.push(iterations.to_string());
                row.push(crossing.to_string());
            }
            _ => row.extend(std::iter::repeat_n(String::new(), dim + 2)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Sample points from either a node table written by [`write_nodes_csv`]
/// (free rows only) or plain coordinate rows with an optional header.
pub fn parse_samples_csv(text: &str) -> Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let Some(first) = records.next().transpose()? else {
        return Ok(Vec::new());
    };
    let is_numeric = |r: &csv::StringRecord| r.iter().all(|f| f.parse::<f64>().is_ok());

    if first.get(0) == Some("ray_index") {
        let status = first
            .iter()
            .position(|f| f == "status")
            .ok_or_else(|| Error::invalid("node table without status column"))?;
        let xs: Vec<usize> = first
            .iter()
            .enumerate()
            .filter(|(_, f)| f.starts_with("x_"))
            .map(|(i, _)| i)
            .collect();
        if xs.is_empty() {
            return Err(Error::invalid("node table without coordinate columns"));
        }
        let mut out = Vec::new();
        for (line, rec) in records.enumerate() {
            let rec = rec?;
            if rec.get(status) != Some("free") {
                continue;
            }
            let coords = xs
                .iter()
                .map(|&i| rec.get(i).and_then(|f| f.parse::<f64>().ok()))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::invalid(format!("row {}: bad node coordinates", line + 2)))?;
            out.push(Point::new(coords)?);
        }
        return Ok(out);
    }

    let mut out = Vec::new();
    let mut push = |rec: &csv::StringRecord, line: usize| -> Result<()> {
        let coords: Vec<f64> = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("row {line}: bad number '{f}'")))
            })
            .collect::<Result<_>>()?;
        if let Some(p) = out.first().map(Point::dim) {
            if p != coords.len() {
                return Err(Error::invalid(format!("row {line}: expected {p} coordinates")));
            }
        }
        out.push(Point::new(coords)?);
        Ok(())
    };
    if is_numeric(&first) {
        push(&first, 1)?;
    }
    for (i, rec) in records.enumerate() {
        push(&rec?, i + 2)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obprm::{generate_nodes, ObprmParams};

    const SQUARE: &str = r#"{"dimension": 2, "parts": [{"halfspaces": [
        {"normal": [1, 0], "offset": 1}, {"normal": [-1, 0], "offset": 0},
        {"normal": [0, 1], "offset": 1}, {"normal": [0, -1], "offset": 0}]}]}"#;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(123_456_789.123_456_78), "123456789.123");
        let x = 0.123456789012345;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), round_sig(x));
    }

    #[test]
    fn shape_round_trip() {
        let set = parse_shape(SQUARE).unwrap();
        assert_eq!(set.volume().unwrap(), 1.0);
        let again = parse_shape(&shape_to_json(&set)).unwrap();
        assert_eq!(again.volume().unwrap(), 1.0);
        assert_eq!(again.parts()[0].halfspaces(), set.parts()[0].halfspaces());
    }

    #[test]
    fn shape_errors_name_index() {
        let redundant = SQUARE.replace(
            r#"{"normal": [0, -1], "offset": 0}"#,
            r#"{"normal": [0, -1], "offset": 0}, {"normal": [1, 1], "offset": 5}"#,
        );
        let e = parse_shape(&redundant).unwrap_err().to_string();
        assert!(e.contains("part 0") && e.contains("half-space 4"), "{e}");
        let bad = SQUARE.replace("[1, 0]", "[1, 0, 0]");
        let e = parse_shape(&bad).unwrap_err().to_string();
        assert!(e.contains("half-space 0"), "{e}");
        let zero = SQUARE.replace("[1, 0]", "[0, 0]");
        assert!(parse_shape(&zero).is_err());
        assert!(parse_shape(r#"{"dimension": 2, "parts": []}"#).is_err());
        assert!(parse_shape(r#"{"dimension": 9, "parts": []}"#).is_err());
        assert!(parse_shape("{").is_err());
        let open = r#"{"dimension": 2, "parts": [{"halfspaces": [{"normal": [1, 0], "offset": 1}]}]}"#;
        assert!(parse_shape(open).is_err());
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("1.5, -2").unwrap().coords(), &[1.5, -2.0]);
        assert!(parse_point("1,x").is_err());
        assert!(parse_point("").is_err());
    }

    #[test]
    fn nodes_csv_round_trip() {
        let set = parse_shape(SQUARE).unwrap();
        let p = ObprmParams::new(20, 3.0, 0.01).unwrap();
        let batch = generate_nodes(&set, &p, 1).unwrap();
        let mut buf = Vec::new();
        write_nodes_csv(&batch, 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("ray_index,dir_0,dir_1,status,x_0,x_1,iterations,crossing\n"));
        let pts = parse_samples_csv(&text).unwrap();
        assert_eq!(pts.len(), 20);
        for (p, q) in pts.iter().zip(batch.nodes()) {
            assert_eq!(p.coords()[0], round_sig(q.coords()[0]));
        }
    }

    #[test]
    fn plain_samples() {
        let pts = parse_samples_csv("x,y\n1,2\n3,4\n").unwrap();
        assert_eq!(pts.len(), 2);
        let pts = parse_samples_csv("# comment\n1,2\n3,4\n").unwrap();
        assert_eq!(pts[1].coords(), &[3.0, 4.0]);
        assert!(parse_samples_csv("1,2\n3\n").is_err());
        assert!(parse_samples_csv("1,2\n3,y\n").is_err());
        assert!(parse_samples_csv("").unwrap().is_empty());
    }
}
