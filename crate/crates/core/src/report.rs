//! JSON reports and atomic output files.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

/// A report: the command that produced it, its resolved parameters, and the
/// result object with its own fields flattened in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    #[serde(flatten)]
    pub body: Map<String, Value>,
}

impl Report {
    /// Wraps `result`; entries of `params` are merged into its `params` object.
    pub fn new(command: Vec<String>, result: impl Serialize, params: Map<String, Value>) -> Self {
        let mut body = match serde_json::to_value(result).expect("serializable result") {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        let merged = match body.remove("params") {
            Some(Value::Object(mut p)) => {
                p.extend(params);
                p
            }
            _ => params,
        };
        body.insert("params".into(), Value::Object(merged));
        Report { command, body }
    }

    pub fn status(&self) -> Option<&str> {
        self.body.get("status").and_then(Value::as_str)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name =
        path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
