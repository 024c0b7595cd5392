//! The persisted results table.
//!
//! ```text
//! # tool_version: binrec 0.1.0
//! # config_hash: 3f2a…
//! # base_seed: 42
//! # config: {"mode":"eta_delta",…}
//! distribution,formulation,n,m,k,delta,rho,eta,trials,successes,rate,error
//! D1,l1box,50,…
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a table is
//! byte-identical whenever its cells are. `rate` is empty and `error` set
//! when a cell failed.

use std::path::Path;

use crate::config::{canonical_json, config_hash};
use crate::error::{Error, Result};
use crate::experiment::{CellResult, SweepConfig};
use crate::randgen::DistributionSpec;
use crate::recovery::Formulation;

pub const TOOL_VERSION: &str = concat!("binrec ", env!("CARGO_PKG_VERSION"));

pub const COLUMNS: [&str; 12] =
    ["distribution", "formulation", "n", "m", "k", "delta", "rho", "eta", "trials", "successes", "rate", "error"];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultsTable {
    pub tool_version: String,
    pub config_hash: String,
    pub config: SweepConfig,
    pub rows: Vec<CellResult>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(format!("results table: {}", msg.into()))
}

impl ResultsTable {
    pub fn new(config: SweepConfig, rows: Vec<CellResult>) -> Self {
        Self { tool_version: TOOL_VERSION.to_string(), config_hash: config_hash(&config), config, rows }
    }

    pub fn base_seed(&self) -> u64 {
        self.config.base_seed
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# tool_version: {}\n", self.tool_version));
        out.push_str(&format!("# config_hash: {}\n", self.config_hash));
        out.push_str(&format!("# base_seed: {}\n", self.config.base_seed));
        out.push_str(&format!("# config: {}\n", canonical_json(&self.config)));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory write");
        for r in &self.rows {
            let rate = r.rate().map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                r.distribution.to_string(),
                r.formulation.to_string(),
                r.n.to_string(),
                r.m.to_string(),
                r.k.to_string(),
                r.delta().to_string(),
                r.rho().to_string(),
                r.eta().to_string(),
                r.trials.to_string(),
                r.successes.to_string(),
                rate,
                r.error.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
        out
    }

    /// Parses a rendered table and checks that the embedded config still
    /// hashes to the recorded value.
    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let (key, value) =
                rest.trim_end_matches('\n').split_once(": ").ok_or_else(|| bad("malformed header line"))?;
            meta.push((key.to_string(), value.to_string()));
            body_start += line.len();
        }
        let get = |key: &str| {
            meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone()).ok_or_else(|| bad(format!("missing `{key}`")))
        };
        let tool_version = get("tool_version")?;
        let recorded_hash = get("config_hash")?;
        let config: SweepConfig =
            serde_json::from_str(&get("config")?).map_err(|e| bad(format!("embedded config: {e}")))?;
        if config_hash(&config) != recorded_hash {
            return Err(bad("config hash does not match the embedded config"));
        }
        let seed: u64 = get("base_seed")?.parse().map_err(|_| bad("base_seed is not an integer"))?;
        if seed != config.base_seed {
            return Err(bad("base_seed disagrees with the embedded config"));
        }

        let mut reader = csv::ReaderBuilder::new().from_reader(&text.as_bytes()[body_start..]);
        let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().ne(COLUMNS) {
            return Err(bad(format!("unexpected columns {:?}", header.iter().collect::<Vec<_>>())));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            rows.push(parse_row(&rec).map_err(|e| bad(format!("row {}: {e}", i + 1)))?);
        }
        Ok(Self { tool_version, config_hash: recorded_hash, config, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The `(formulation, distribution)` pairs present, in table order.
    pub fn slices(&self) -> Vec<(Formulation, DistributionSpec)> {
        let mut out: Vec<(Formulation, DistributionSpec)> = Vec::new();
        for r in &self.rows {
            if !out.contains(&(r.formulation, r.distribution)) {
                out.push((r.formulation, r.distribution));
            }
        }
        out
    }

    pub fn slice(&self, formulation: Formulation, distribution: DistributionSpec) -> Vec<CellResult> {
        self.rows.iter().filter(|r| r.formulation == formulation && r.distribution == distribution).cloned().collect()
    }
}

fn parse_row(rec: &csv::StringRecord) -> std::result::Result<CellResult, String> {
    let field = |i: usize| rec.get(i).ok_or_else(|| format!("missing `{}`", COLUMNS[i]));
    let int = |i: usize| -> std::result::Result<usize, String> {
        field(i)?.parse().map_err(|_| format!("`{}` is not an integer", COLUMNS[i]))
    };
    let distribution: DistributionSpec = field(0)?.parse().map_err(|e: Error| e.to_string())?;
    let formulation: Formulation = field(1)?.parse().map_err(|e: Error| e.to_string())?;
    let (n, m, k, trials, successes) = (int(2)?, int(3)?, int(4)?, int(8)?, int(9)?);
    if n == 0 || m == 0 || trials == 0 || successes > trials {
        return Err("inconsistent counts".into());
    }
    let error = Some(field(11)?.to_string()).filter(|e| !e.is_empty());
    let cell = CellResult { distribution, formulation, n, m, k, trials, successes, error };
    let expect = [
        (5, cell.delta().to_string()),
        (6, cell.rho().to_string()),
        (7, cell.eta().to_string()),
        (10, cell.rate().map(|r| r.to_string()).unwrap_or_default()),
    ];
    for (i, want) in expect {
        if field(i)? != want {
            return Err(format!("`{}` = {} disagrees with the counts", COLUMNS[i], field(i)?));
        }
    }
    Ok(cell)
}
