//! CSV and NDJSON writers stamped with the run provenance.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

/// Version tag written into every output.
pub const VERSION_TAG: &str = concat!("supwave ", env!("CARGO_PKG_VERSION"));

/// Identity of a run: equal provenance implies byte-identical diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: &'static str,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Self {
        Self { config_hash: config.hash(), seed: config.seed, version: VERSION_TAG }
    }

    pub fn line(&self) -> String {
        format!("config_hash={} seed={} version={}", self.config_hash, self.seed, self.version)
    }
}

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV with a `# provenance` comment line and a fixed header.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, provenance: &Provenance, header: &[&str]) -> io::Result<Self> {
        writeln!(out, "# {}", provenance.line())?;
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out, columns: header.len() })
    }

    /// Writes one row of preformatted cells.
    pub fn row(&mut self, cells: &[String]) -> io::Result<()> {
        if cells.len() != self.columns {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "CSV row width differs from header"));
        }
        writeln!(self.out, "{}", cells.join(","))
    }

    pub fn numbers(&mut self, values: &[f64]) -> io::Result<()> {
        let cells: Vec<String> = values.iter().map(|&v| fmt17(v)).collect();
        self.row(&cells)
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Newline-delimited JSON; the first record carries the provenance.
pub struct NdjsonWriter<W: Write> {
    out: W,
}

impl<W: Write> NdjsonWriter<W> {
    pub fn new(mut out: W, provenance: &Provenance, kind: &str) -> io::Result<Self> {
        let head = serde_json::json!({
            "record": "provenance",
            "experiment": kind,
            "config_hash": provenance.config_hash,
            "seed": provenance.seed,
            "version": provenance.version,
        });
        writeln!(out, "{head}")?;
        Ok(Self { out })
    }

    pub fn record(&mut self, value: &Value) -> io::Result<()> {
        writeln!(self.out, "{value}")
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// JSON number for `x`, with non-finite values as `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Output directory, created on first use.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn create(&self, name: &str) -> io::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}
