use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Scenario settings: flags first, then the command's section of the config
/// file, then its top level. Every resolved value is recorded for hashing.
pub struct Ctx {
    file: toml::Table,
    section: String,
    resolved: BTreeMap<String, Value>,
}

impl Ctx {
    pub fn new(config: Option<&Path>, section: &str) -> Result<Self> {
        let file = match config {
            None => toml::Table::new(),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
                text.parse::<toml::Table>().map_err(|e| Error::arg("config", e.to_string().replace('\n', " ")))?
            }
        };
        Ok(Ctx { file, section: section.to_string(), resolved: BTreeMap::new() })
    }

    fn lookup(&self, key: &str) -> Option<toml::Value> {
        let kebab = key.replace('_', "-");
        let find = |t: &toml::Table| t.get(key).or_else(|| t.get(&kebab)).cloned();
        if let Some(toml::Value::Table(sec)) = self.file.get(&self.section) {
            if let Some(v) = find(sec) {
                return Some(v);
            }
        }
        find(&self.file).filter(|v| !v.is_table() || key == "sigma")
    }

    pub fn raw(&self, key: &str) -> Option<toml::Value> {
        self.lookup(key)
    }

    pub fn record(&mut self, key: &str, v: impl Serialize) {
        self.resolved.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn opt<T: DeserializeOwned + Serialize>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.lookup(key) {
                Some(tv) => Some(tv.try_into().map_err(|e: toml::de::Error| {
                    Error::arg(key, format!("malformed config value: {}", e.message()))
                })?),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.record(key, v);
        }
        Ok(v)
    }

    pub fn get<T: DeserializeOwned + Serialize>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        match self.opt(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, &default);
                Ok(default)
            }
        }
    }

    pub fn req<T: DeserializeOwned + Serialize>(&mut self, key: &str, flag: Option<T>) -> Result<T> {
        self.opt(key, flag)?.ok_or_else(|| {
            Error::arg(key, format!("`{key}` is required (flag --{} or config key `{key}`)", key.replace('_', "-")))
        })
    }

    pub fn config_hash(&self, command: &str) -> String {
        let canon = json!({ "command": command, "config": self.resolved });
        let digest = Sha256::digest(canon.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolved(&self) -> &BTreeMap<String, Value> {
        &self.resolved
    }
}

/// Result of one command: the JSON payload and named CSV tables.
pub struct Outcome {
    pub result: Value,
    pub tables: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn new(result: impl Serialize) -> Result<Self> {
        Ok(Outcome { result: serde_json::to_value(result).map_err(|e| Error::Internal(e.to_string()))?, tables: Vec::new() })
    }

    pub fn table(mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Self> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.tables.push((name.to_string(), buf));
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

fn created_unix() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        })
}

/// Writes the report to `out` (or stdout) in the requested format.
pub fn finish(command: &str, ctx: &Ctx, format: Format, out: Option<&PathBuf>, outcome: Outcome) -> Result<()> {
    let hash = ctx.config_hash(command);
    let report = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": hash,
        "config": ctx.resolved(),
        "result": outcome.result,
    });
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            write_atomic(&dir.join("report.json"), text.as_bytes())?;
            for (name, bytes) in &outcome.tables {
                write_atomic(&dir.join(name), bytes)?;
            }
            let prov = json!({
                "command": command,
                "version": env!("CARGO_PKG_VERSION"),
                "config_hash": hash,
                "created_unix": created_unix(),
                "files": std::iter::once("report.json".to_string())
                    .chain(outcome.tables.iter().map(|t| t.0.clone()))
                    .collect::<Vec<_>>(),
            });
            let mut p = serde_json::to_string_pretty(&prov).map_err(|e| Error::Internal(e.to_string()))?;
            p.push('\n');
            write_atomic(&dir.join("provenance.json"), p.as_bytes())?;
            eprintln!("wrote {}", dir.join("report.json").display());
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let bytes: &[u8] = match format {
                Format::Json => text.as_bytes(),
                Format::Csv => match outcome.tables.first() {
                    Some((_, b)) => b,
                    None => return Err(Error::arg("format", format!("command `{command}` has no tabular output"))),
                },
            };
            lock.write_all(bytes).map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}
