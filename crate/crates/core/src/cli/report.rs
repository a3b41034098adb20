use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checks::{CheckTable, Residual};
use crate::{Error, Result};

pub const SCHEMA: &str = "kz-braid-lab/1";

/// Effective configuration, defaults applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub algebra: String,
    pub level: u32,
    pub strands: usize,
    pub word: String,
    pub tol: f64,
    pub grid: usize,
    pub seed: u64,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub passed: bool,
    pub tables: Vec<CheckTable>,
    /// Matrices as nested `[re, im]` arrays, eigenvalue lists and scalars.
    pub data: BTreeMap<String, serde_json::Value>,
    /// Wall-clock milliseconds; the only nondeterministic field.
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            passed: true,
            tables: Vec::new(),
            data: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn push_table(&mut self, table: CheckTable) {
        self.passed &= table.passed();
        self.tables.push(table);
    }

    pub fn insert(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report data serializes");
        self.data.insert(key.to_string(), v);
    }

    pub fn failures(&self) -> Vec<(&str, &Residual)> {
        self.tables
            .iter()
            .flat_map(|t| t.failures().map(move |r| (t.title.as_str(), r)))
            .collect()
    }

    /// Copy with timings cleared, for determinism comparisons.
    pub fn without_timings(&self) -> Report {
        Report { timings_ms: BTreeMap::new(), ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::Io(format!("invalid report: {e}")))
    }
}

/// Writes `contents` to a temporary sibling of `path` and renames it into
/// place, so readers never observe a partial report.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let config = ConfigEcho {
            algebra: "su2".into(),
            level: 2,
            strands: 2,
            word: "s1".into(),
            tol: 1e-10,
            grid: 256,
            seed: 0,
            out: None,
        };
        let mut r = Report::new("rmatrix", config);
        let mut t = CheckTable::new("t");
        t.bounded("zero", 0.0, 1e-12);
        t.bounded("tiny", 0.1 + 0.2 - 0.3, 1e-12);
        t.info("third", 1.0 / 3.0);
        r.push_table(t);
        r.insert("c", [0.1f64.sin(), -1e-300]);
        r.timings_ms.insert("total".into(), 1.5);
        r
    }

    #[test]
    fn round_trip_is_exact() {
        let r = sample();
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn zero_residuals_are_kept() {
        let json: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(json["schema"], SCHEMA);
        assert_eq!(json["tables"][0]["rows"][0]["name"], "zero");
        assert_eq!(json["tables"][0]["rows"][0]["value"], 0.0);
    }

    #[test]
    fn failing_row_clears_passed() {
        let mut r = sample();
        assert!(r.passed);
        let mut t = CheckTable::new("bad");
        t.bounded("big", 1.0, 1e-3);
        r.push_table(t);
        assert!(!r.passed);
        assert_eq!(r.failures().len(), 1);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/r.json"), b"x").is_err());
    }
}
