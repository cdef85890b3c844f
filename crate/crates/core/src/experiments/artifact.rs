//! Self-describing CSV artifacts and the manifest-driven verifier.
//!
//! Every artifact starts with one comment line
//! `# boundq artifact=<name> schema=<version> config=<hash>` followed by a CSV header and rows.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Version of every CSV schema emitted by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Hex prefix of the SHA-256 of a JSON-serializable configuration.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

/// Fixed-precision float rendering (6 decimals, `-0` folded to `0`).
pub fn fnum(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x.abs() < 5e-7 {
        "0.000000".into()
    } else {
        format!("{x:.6}")
    }
}

/// An in-memory table with its provenance header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Artifact name; the file is `<name>.csv`.
    pub name: String,
    /// Configuration hash written in the header.
    pub config_hash: String,
    /// Column names.
    pub columns: Vec<String>,
    /// Rows, one string per column.
    pub rows: Vec<Vec<String>>,
}

impl Artifact {
    /// Empty artifact with the given columns.
    pub fn new(name: &str, config_hash: String, columns: &[&str]) -> Self {
        Self { name: name.into(), config_hash, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Append a row; its width must match the header.
    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Artifact(format!("{}: row has {} fields, header has {}", self.name, row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Value of `column` in row `row`.
    pub fn get(&self, row: usize, column: &str) -> Option<&str> {
        self.column(column).and_then(|c| self.rows.get(row).map(|r| r[c].as_str()))
    }

    /// Rows whose `key` columns equal the given values.
    pub fn find(&self, key: &BTreeMap<String, String>) -> Result<Vec<usize>> {
        let mut cols = Vec::with_capacity(key.len());
        for (k, v) in key {
            let c = self.column(k).ok_or_else(|| Error::Artifact(format!("{}: schema drift, key column `{k}` missing", self.name)))?;
            cols.push((c, v));
        }
        Ok((0..self.rows.len()).filter(|&r| cols.iter().all(|(c, v)| self.rows[r][*c] == **v)).collect())
    }

    /// Serialize to CSV text.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = format!("# boundq artifact={} schema={SCHEMA_VERSION} config={}\n", self.name, self.config_hash);
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        let body = writer.into_inner().map_err(|e| Error::Artifact(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Error::Artifact(e.to_string()))?);
        Ok(out)
    }

    /// Write `<dir>/<name>.csv`, creating `dir` if needed.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.name));
        fs::write(&path, self.to_csv_string()?)?;
        Ok(path)
    }

    /// Parse CSV text produced by [`Artifact::to_csv_string`].
    pub fn parse(text: &str) -> Result<Self> {
        let first = text.lines().next().ok_or_else(|| Error::Artifact("empty artifact".into()))?;
        let fields: BTreeMap<&str, &str> = first
            .strip_prefix("# boundq ")
            .ok_or_else(|| Error::Artifact("missing `# boundq` header line".into()))?
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let name = fields.get("artifact").ok_or_else(|| Error::Artifact("header lacks artifact name".into()))?.to_string();
        let schema: u32 = fields.get("schema").and_then(|s| s.parse().ok()).ok_or_else(|| Error::Artifact("header lacks schema".into()))?;
        if schema != SCHEMA_VERSION {
            return Err(Error::Artifact(format!("{name}: schema {schema}, expected {SCHEMA_VERSION}")));
        }
        let config_hash = fields.get("config").unwrap_or(&"").to_string();
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let columns = reader.headers()?.iter().map(str::to_string).collect();
        let rows = reader.records().map(|r| r.map(|rec| rec.iter().map(str::to_string).collect())).collect::<std::result::Result<_, _>>()?;
        Ok(Self { name, config_hash, columns, rows })
    }

    /// Read `<path>`.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// One expected value in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCheck {
    /// Artifact file name, e.g. `probe_family_comparison.csv`.
    pub file: String,
    /// Key columns selecting exactly one row.
    pub key: BTreeMap<String, String>,
    /// Checked column.
    pub column: String,
    /// Expected value: numeric values are compared with `tol`, others exactly.
    pub expected: String,
    /// Absolute tolerance for numeric values.
    #[serde(default)]
    pub tol: f64,
}

/// Expected artifact rows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    /// Manifest format version.
    pub version: u32,
    /// Checks in order.
    pub checks: Vec<ManifestCheck>,
}

impl Manifest {
    /// Parse JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Manifest pinning `columns` of every row of `artifacts`, keyed by `keys`.
    pub fn from_artifacts(artifacts: &[(&Artifact, &[&str], &[&str], f64)]) -> Result<Self> {
        let mut checks = Vec::new();
        for (art, keys, columns, tol) in artifacts {
            for r in 0..art.rows.len() {
                let key: BTreeMap<String, String> =
                    keys.iter().map(|k| Ok((k.to_string(), art.get(r, k).ok_or_else(|| Error::Artifact(format!("no column `{k}`")))?.to_string()))).collect::<Result<_>>()?;
                for c in columns.iter() {
                    let expected = art.get(r, c).ok_or_else(|| Error::Artifact(format!("no column `{c}`")))?.to_string();
                    checks.push(ManifestCheck { file: format!("{}.csv", art.name), key: key.clone(), column: c.to_string(), expected, tol: *tol });
                }
            }
        }
        Ok(Self { version: 1, checks })
    }
}

/// Outcome of one manifest check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    /// The check.
    pub check: ManifestCheck,
    /// Observed value, if the row was found.
    pub actual: Option<String>,
    /// Passed.
    pub pass: bool,
    /// Failure reason or row citation.
    pub message: String,
}

/// Verifier report.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Per-check outcomes.
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    /// Every check passed.
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    /// Failed checks.
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.pass)
    }
}

fn values_match(expected: &str, actual: &str, tol: f64) -> bool {
    match (expected.parse::<f64>(), actual.parse::<f64>()) {
        (Ok(e), Ok(a)) => (e - a).abs() <= tol || (e.is_nan() && a.is_nan()),
        _ => expected == actual,
    }
}

/// Compare artifacts under `dir` against `manifest`. Missing files and schema drift are
/// reported as failed checks rather than errors.
pub fn verify_artifacts(dir: &Path, manifest: &Manifest) -> VerifyReport {
    let mut loaded: BTreeMap<String, std::result::Result<Artifact, String>> = BTreeMap::new();
    let mut outcomes = Vec::with_capacity(manifest.checks.len());
    for check in &manifest.checks {
        let art = loaded.entry(check.file.clone()).or_insert_with(|| Artifact::read(&dir.join(&check.file)).map_err(|e| e.to_string()));
        let fail = |message: String| CheckOutcome { check: check.clone(), actual: None, pass: false, message };
        let art = match art {
            Ok(a) => a,
            Err(e) => {
                outcomes.push(fail(format!("missing or unreadable file: {e}")));
                continue;
            }
        };
        let rows = match art.find(&check.key) {
            Ok(r) => r,
            Err(e) => {
                outcomes.push(fail(e.to_string()));
                continue;
            }
        };
        let Some(col) = art.column(&check.column) else {
            outcomes.push(fail(format!("{}: schema drift, column `{}` missing", check.file, check.column)));
            continue;
        };
        match rows.as_slice() {
            [r] => {
                let actual = art.rows[*r][col].clone();
                let pass = values_match(&check.expected, &actual, check.tol);
                let message = format!("{} row {} ({:?}) {}: expected {} ± {}, got {}", check.file, r + 1, check.key, check.column, check.expected, check.tol, actual);
                outcomes.push(CheckOutcome { check: check.clone(), actual: Some(actual), pass, message });
            }
            [] => outcomes.push(fail(format!("{}: no row with key {:?}", check.file, check.key))),
            many => outcomes.push(fail(format!("{}: key {:?} matches {} rows", check.file, check.key, many.len()))),
        }
    }
    VerifyReport { outcomes }
}
