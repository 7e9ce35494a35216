//! Output directory bookkeeping: artifacts, checksums and the run manifest.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use firey_core::io::{csv_string, to_json_string};
use firey_core::FireyError;

use crate::args::{Command, Common, Format};

pub const MANIFEST: &str = "manifest.json";
pub const ERROR_FILE: &str = "error.json";

/// A failure with a stable kind tag and optional structured details.
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub details: Option<Value>,
    pub usage: bool,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { kind: "usage".into(), message: message.into(), details: None, usage: true }
    }

    pub fn verification(message: impl Into<String>, details: Value) -> Self {
        Failure { kind: "verification_failed".into(), message: message.into(), details: Some(details), usage: false }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "kind": self.kind, "message": self.message });
        if let Some(d) = &self.details {
            v["details"] = d.clone();
        }
        v
    }
}

impl From<FireyError> for Failure {
    fn from(e: FireyError) -> Self {
        let details = match &e {
            FireyError::NonConvex { nodes, worst, tol } => Some(json!({ "nodes": nodes, "worst": worst, "tol": tol })),
            FireyError::OriginNotInterior { node, value } => Some(json!({ "node": node, "value": value })),
            FireyError::GridMismatch { left, right } | FireyError::DimensionMismatch { left, right } => {
                Some(json!({ "left": left, "right": right }))
            }
            FireyError::AxisSymmetry { node, deviation } => Some(json!({ "node": node, "deviation": deviation })),
            FireyError::DomainViolation { values, lo, hi } => Some(json!({ "values": values, "lo": lo, "hi": hi })),
            FireyError::NonConvergence { what, trace, .. } => Some(json!({ "stage": what, "trace": trace })),
            FireyError::TangentMismatch { point, gap } => Some(json!({ "point": point, "gap": gap })),
            FireyError::BoundaryNotFound { point, body, offset } => {
                Some(json!({ "point": point, "body": body, "offset": offset }))
            }
            _ => None,
        };
        Failure { kind: e.kind().into(), message: e.to_string(), details, usage: false }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        FireyError::from(e).into()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct FileRecord {
    path: String,
    sha256: String,
    bytes: usize,
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Collects the artifacts of one run and writes them beside its manifest.
pub struct Run {
    out: PathBuf,
    format: Format,
    inputs: Vec<FileRecord>,
    outputs: BTreeMap<String, FileRecord>,
    tolerances: BTreeMap<String, f64>,
}

impl Run {
    pub fn new(common: &Common) -> CmdResult<Self> {
        std::fs::create_dir_all(&common.out)?;
        Ok(Run {
            out: common.out.clone(),
            format: common.format,
            inputs: Vec::new(),
            outputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    /// Reads an input file and records its checksum.
    pub fn read_input(&mut self, path: &Path) -> CmdResult<String> {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::from(FireyError::InvalidInput(format!("cannot read {}: {e}", path.display()))))?;
        self.inputs.push(FileRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
        });
        String::from_utf8(bytes)
            .map_err(|_| FireyError::InvalidInput(format!("{} is not UTF-8", path.display())).into())
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.into(), value);
    }

    pub fn write(&mut self, name: &str, text: &str) -> CmdResult<()> {
        std::fs::write(self.out.join(name), text)?;
        self.outputs.insert(
            name.into(),
            FileRecord { path: name.into(), sha256: sha256_hex(text.as_bytes()), bytes: text.len() },
        );
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CmdResult<()> {
        let text = to_json_string(value)?;
        self.write(name, &text)
    }

    pub fn csv<R: AsRef<[f64]>>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = R>,
    ) -> CmdResult<()> {
        self.write(name, &csv_string(header, rows))
    }

    /// Writes `stem.json` or `stem.csv` according to --format.
    pub fn table<T: Serialize + ?Sized, R: AsRef<[f64]>>(
        &mut self,
        stem: &str,
        value: &T,
        header: &[&str],
        rows: impl IntoIterator<Item = R>,
    ) -> CmdResult<()> {
        match self.format {
            Format::Json => self.json(&format!("{stem}.json"), value),
            Format::Csv => self.csv(&format!("{stem}.csv"), header, rows),
        }
    }

    /// Writes the manifest (and error.json on failure). Contains no clock
    /// or host data so identical configurations give identical bytes.
    pub fn finish(
        mut self,
        common: &Common,
        command: &Command,
        summary: &Value,
        failure: Option<&Failure>,
    ) -> CmdResult<()> {
        if let Some(f) = failure {
            self.json(ERROR_FILE, &f.to_json())?;
        }
        let manifest = json!({
            "tool": "firey-lab",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "core_version": firey_core::VERSION,
            "command": command,
            "config": common,
            "tolerances": self.tolerances,
            "inputs": self.inputs,
            "outputs": self.outputs.values().collect::<Vec<_>>(),
            "status": if failure.is_some() { "failed" } else { "ok" },
            "summary": summary,
        });
        std::fs::write(self.out.join(MANIFEST), to_json_string(&manifest)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{BodyArgs, Shape};

    fn common(out: &Path) -> Common {
        Common { grid_n: None, tol: None, out: out.to_path_buf(), seed: 0, format: Format::Json }
    }

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn firey_errors_keep_kind_and_details() {
        let f = Failure::from(FireyError::NonConvex { nodes: vec![3, 4], worst: -0.5, tol: 1e-9 });
        let v = f.to_json();
        assert_eq!(v["kind"], "non_convex");
        assert_eq!(v["details"]["nodes"], json!([3, 4]));
        assert!(!f.usage);
        let v = Failure::from(FireyError::Precondition("x".into())).to_json();
        assert!(v.get("details").is_none());
        assert!(Failure::usage("bad").usage);
    }

    #[test]
    fn manifest_records_outputs_with_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let c = common(dir.path());
        let mut run = Run::new(&c).unwrap();
        run.write("a.txt", "hello").unwrap();
        run.tolerance("residual", 1e-6);
        let cmd = Command::Body(BodyArgs { shape: Shape::Ball, n: 2, r: 1.0, a: 2.0, b: 1.0, shift: 0.0 });
        run.finish(&c, &cmd, &json!({ "ok": true }), None).unwrap();
        let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m["status"], "ok");
        assert_eq!(m["command"]["subcommand"], "body");
        assert!(m["config"].get("out").is_none());
        assert_eq!(m["outputs"][0]["sha256"], sha256_hex(b"hello"));
        assert_eq!(m["tolerances"]["residual"], 1e-6);
    }

    #[test]
    fn failure_writes_error_file() {
        let dir = tempfile::tempdir().unwrap();
        let c = common(dir.path());
        let run = Run::new(&c).unwrap();
        let cmd = Command::Body(BodyArgs { shape: Shape::Ball, n: 2, r: 1.0, a: 2.0, b: 1.0, shift: 0.0 });
        let f = Failure::verification("too big", json!({ "max_abs": 1.0 }));
        run.finish(&c, &cmd, &Value::Null, Some(&f)).unwrap();
        let e: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(ERROR_FILE)).unwrap()).unwrap();
        assert_eq!(e["kind"], "verification_failed");
        let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m["status"], "failed");
    }
}
