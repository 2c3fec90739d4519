//! Output routing, CSV formatting and the run manifest.

use std::cell::RefCell;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{hex, Config};
use crate::failure::{CliResult, Failure};

pub const MANIFEST_KEY: &str = "manifest";

/// Where results go. `--out` naming a file (it has an extension) receives
/// the primary output and further outputs become siblings `<stem>.<name>`;
/// otherwise `--out` is a directory. Without `--out` the single output goes
/// to stdout and no manifest is written.
#[derive(Debug, Clone)]
enum Target {
    Stdout,
    File(PathBuf),
    Dir(PathBuf),
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config_hash: String,
    pub config: Config,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub exit_code: u8,
    pub outputs: Vec<OutputRecord>,
}

pub struct Ctx {
    pub config: Config,
    pub config_hash: String,
    pub seed: u64,
    argv: Vec<String>,
    target: Target,
    started: f64,
    outputs: RefCell<Vec<OutputRecord>>,
    seeds: RefCell<Vec<u64>>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl Ctx {
    pub fn new(config: Config, seed: u64, out: Option<PathBuf>, argv: Vec<String>) -> Self {
        let target = match out {
            None => Target::Stdout,
            Some(p) if p.extension().is_some() && !p.is_dir() => Target::File(p),
            Some(p) => Target::Dir(p),
        };
        Self {
            config_hash: config.hash(),
            config,
            seed,
            argv,
            target,
            started: now(),
            outputs: RefCell::new(Vec::new()),
            seeds: RefCell::new(vec![seed]),
        }
    }

    /// Commands writing several files need a directory or file target.
    pub fn require_files(&self, what: &str) -> CliResult<()> {
        match self.target {
            Target::Stdout => Err(Failure::config(format!("{what} writes several files; pass --out DIR"))),
            _ => Ok(()),
        }
    }

    pub fn note_seed(&self, seed: u64) {
        let mut s = self.seeds.borrow_mut();
        if !s.contains(&seed) {
            s.push(seed);
        }
    }

    fn manifest_path(&self) -> Option<PathBuf> {
        match &self.target {
            Target::Stdout => None,
            Target::File(p) => {
                let stem = p.file_stem().map_or("out".into(), |s| s.to_string_lossy().into_owned());
                Some(p.with_file_name(format!("{stem}.manifest.json")))
            }
            Target::Dir(d) => Some(d.join("manifest.json")),
        }
    }

    fn manifest_name(&self) -> Option<String> {
        self.manifest_path()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
    }

    fn path_for(&self, name: &str) -> Option<PathBuf> {
        match &self.target {
            Target::Stdout => None,
            Target::Dir(d) => Some(d.join(name)),
            Target::File(p) => {
                if self.outputs.borrow().is_empty() {
                    Some(p.clone())
                } else {
                    let stem = p.file_stem().map_or("out".into(), |s| s.to_string_lossy().into_owned());
                    Some(p.with_file_name(format!("{stem}.{name}")))
                }
            }
        }
    }

    pub fn emit(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        match self.path_for(name) {
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
            }
            Some(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(&path, bytes)?;
                self.outputs.borrow_mut().push(OutputRecord {
                    path: path.to_string_lossy().into_owned(),
                    sha256: hex(&Sha256::digest(bytes)),
                });
            }
        }
        Ok(())
    }

    pub fn emit_csv(&self, name: &str, table: &Table) -> CliResult<()> {
        self.emit(name, &table.to_bytes()?)
    }

    /// JSON object output; gains a `manifest` key naming its manifest.
    pub fn emit_json<S: Serialize>(&self, name: &str, value: &S) -> CliResult<()> {
        let mut v = serde_json::to_value(value)?;
        if let (Value::Object(map), Some(m)) = (&mut v, self.manifest_name()) {
            map.insert(MANIFEST_KEY.into(), Value::String(m));
        }
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        self.emit(name, text.as_bytes())
    }

    /// Writes the manifest if anything went to files.
    pub fn finish(&self, exit_code: u8) -> CliResult<()> {
        let Some(path) = self.manifest_path() else { return Ok(()) };
        if self.outputs.borrow().is_empty() {
            return Ok(());
        }
        let manifest = RunManifest {
            command_line: self.argv.clone(),
            config_hash: self.config_hash.clone(),
            config: self.config.clone(),
            seeds: self.seeds.borrow().clone(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started_unix: self.started,
            finished_unix: now(),
            exit_code,
            outputs: self.outputs.borrow().clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Plain decimal for ordinary magnitudes, exponent form otherwise; always
/// '.' as the decimal separator.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| num(*v)).collect());
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Failure::config(e.to_string()))
    }
}

/// Reads named numeric columns from a headed CSV file.
pub fn read_columns(path: &Path, names: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| Failure::config(format!("{}: missing column '{n}'", path.display())))
        })
        .collect::<CliResult<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (c, &i) in idx.iter().enumerate() {
            let field = rec.get(i).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| {
                Failure::config(format!("{}: row {}: '{field}' is not a number", path.display(), line + 2))
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

/// Inserts extra keys into a serialized object.
pub fn with_fields<S: Serialize>(value: &S, extra: Vec<(&str, Value)>) -> CliResult<Value> {
    let mut v = serde_json::to_value(value)?;
    match &mut v {
        Value::Object(map) => {
            for (k, x) in extra {
                map.insert(k.into(), x);
            }
        }
        other => {
            let mut map = Map::new();
            map.insert("value".into(), other.take());
            for (k, x) in extra {
                map.insert(k.into(), x);
            }
            v = Value::Object(map);
        }
    }
    Ok(v)
}
