//! File formats: body and point-cloud JSON, G sources, and 17-significant
//! digit JSON and CSV writers.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::error::{FireyError, Result};
use crate::gclass::{GFunction, GTab, Preset};
use crate::geometry_core::body::{support_from_points, AxisymBody, Body, PointCloud, ProfileSupport};
use crate::geometry_core::grid::CircleGrid;

/// Body file: support samples on the uniform grid φ_k = 2πk/N.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BodyFile {
    pub n: usize,
    #[serde(rename = "grid_N")]
    pub grid_n: usize,
    pub h: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointCloudFile {
    pub points: Vec<Vec<f64>>,
}

/// A body read from disk.
#[derive(Clone, Debug)]
pub enum LoadedBody {
    Planar(ProfileSupport),
    Axisym(AxisymBody),
}

impl Body for LoadedBody {
    fn dim(&self) -> usize {
        match self {
            LoadedBody::Planar(_) => 2,
            LoadedBody::Axisym(b) => b.dim(),
        }
    }
    fn profile(&self) -> &ProfileSupport {
        match self {
            LoadedBody::Planar(p) => p,
            LoadedBody::Axisym(b) => b.profile(),
        }
    }
}

impl BodyFile {
    pub fn from_body(body: &dyn Body) -> Self {
        let l = body.profile();
        BodyFile { n: body.dim(), grid_n: l.grid().len(), h: l.values().to_vec() }
    }

    pub fn into_body(self) -> Result<LoadedBody> {
        if self.h.len() != self.grid_n {
            return Err(FireyError::GridMismatch { left: self.h.len(), right: self.grid_n });
        }
        if self.n < 2 {
            return Err(FireyError::InvalidInput(format!("dimension {} must be at least 2", self.n)));
        }
        let prof = ProfileSupport::new(CircleGrid::new(self.grid_n)?, self.h)?;
        if self.n == 2 {
            Ok(LoadedBody::Planar(prof))
        } else {
            Ok(LoadedBody::Axisym(AxisymBody::new(self.n, prof)?))
        }
    }
}

/// Parses a body file, or a planar point cloud whose hull is sampled on
/// `cloud_grid` nodes.
pub fn parse_body(text: &str, cloud_grid: usize) -> Result<LoadedBody> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("points").is_some() {
        let file: PointCloudFile = serde_json::from_value(value)?;
        let pts = file
            .points
            .iter()
            .map(|p| match p.as_slice() {
                [x, y] => Ok([*x, *y]),
                _ => Err(FireyError::InvalidInput(format!(
                    "point cloud entries must be planar, got {} coordinates",
                    p.len()
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let cloud = PointCloud::new(pts)?;
        return Ok(LoadedBody::Planar(support_from_points(&cloud, CircleGrid::new(cloud_grid)?)?));
    }
    let file: BodyFile = serde_json::from_value(value)?;
    file.into_body()
}

pub fn read_body(path: &Path, cloud_grid: usize) -> Result<LoadedBody> {
    parse_body(&std::fs::read_to_string(path)?, cloud_grid)
}

/// A named preset or a tabulated G read from JSON.
#[derive(Clone, Debug)]
pub enum GSource {
    Preset(Preset),
    Table(GTab),
}

impl GSource {
    /// Accepts "power:p", "const:c", "increasing:demo" or a path to a GTab file.
    pub fn parse(spec: &str) -> Result<Self> {
        match Preset::parse(spec) {
            Ok(p) => Ok(GSource::Preset(p)),
            Err(e) => {
                let path = Path::new(spec);
                if path.exists() {
                    let tab: GTab = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                    Ok(GSource::Table(tab))
                } else {
                    Err(e)
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            GSource::Preset(p) => p.name(),
            GSource::Table(t) => format!("table[{}, {}; {} samples]", t.theta(0), t.theta(t.len() - 1), t.len()),
        }
    }

    /// Table on [c1, c2] for presets; tables are re-tagged with n.
    pub fn table(&self, n: usize, c1: f64, c2: f64, samples: usize) -> Result<GTab> {
        match self {
            GSource::Preset(p) => p.tabulate(n, c1, c2, samples),
            GSource::Table(t) => Ok(t.with_dimension(n)),
        }
    }
}

impl GFunction for GSource {
    fn eval(&self, t: f64) -> f64 {
        match self {
            GSource::Preset(p) => p.eval(t),
            GSource::Table(g) => g.eval(t),
        }
    }
    fn deriv(&self, t: f64) -> f64 {
        match self {
            GSource::Preset(p) => p.deriv(t),
            GSource::Table(g) => g.deriv(t),
        }
    }
    fn domain(&self) -> (f64, f64) {
        match self {
            GSource::Preset(p) => p.domain(),
            GSource::Table(g) => g.domain(),
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Compact JSON formatter writing every f64 with 17 significant digits.
struct Fixed17;

impl serde_json::ser::Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        w.write_all(fmt17(value as f64).as_bytes())
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serializer emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// CSV with a header line and 17-digit fields.
pub fn csv_string<R: AsRef<[f64]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.as_ref().iter().map(|&x| fmt17(x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<R: AsRef<[f64]>>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    std::fs::write(path, csv_string(header, rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_file_round_trip_is_exact() {
        let g = CircleGrid::new(256).unwrap();
        let e = ProfileSupport::ellipse(g, 1.3, 0.7, 0.2, [0.1, -0.05]).unwrap();
        let text = to_json_string(&BodyFile::from_body(&e)).unwrap();
        let back = parse_body(&text, 256).unwrap();
        assert_eq!(back.dim(), 2);
        assert_eq!(back.profile().values(), e.values());
    }

    #[test]
    fn axisym_body_file_loads_as_body_of_revolution() {
        let g = CircleGrid::new(256).unwrap();
        let b = AxisymBody::ball(g, 3, 1.0, 0.0).unwrap();
        let text = to_json_string(&BodyFile::from_body(&b)).unwrap();
        assert!(matches!(parse_body(&text, 256).unwrap(), LoadedBody::Axisym(_)));
    }

    #[test]
    fn point_cloud_gives_hull_support() {
        let text = r#"{"points": [[1,0],[0,1],[-1,0],[0,-1],[0.1,0.1]]}"#;
        let b = parse_body(text, 256).unwrap();
        let v = b.profile().values();
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[32] - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let text = r#"{"n": 2, "grid_N": 256, "h": [1.0, 1.0]}"#;
        assert!(matches!(parse_body(text, 256), Err(FireyError::GridMismatch { .. })));
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        let s = to_json_string(&vec![1.0 / 3.0, f64::NAN]).unwrap();
        assert_eq!(s, "[3.3333333333333331e-1,null]\n");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], Some(1.0 / 3.0));
    }

    #[test]
    fn csv_has_header_and_fixed_columns() {
        let s = csv_string(&["a", "b"], [[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(s.lines().count(), 3);
        assert!(s.starts_with("a,b\n1.0000000000000000e0,2.0000000000000000e0\n"));
    }

    #[test]
    fn g_source_accepts_presets_and_tables() {
        assert!(matches!(GSource::parse("power:-3").unwrap(), GSource::Preset(Preset::Power(p)) if p == -3.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        let tab = Preset::Power(2.0).tabulate(2, 0.5, 2.0, 64).unwrap();
        write_json(&path, &tab).unwrap();
        let src = GSource::parse(path.to_str().unwrap()).unwrap();
        assert!((src.eval(1.5) - 2.25).abs() < 1e-6);
        assert!(GSource::parse("nonsense").is_err());
    }
}
