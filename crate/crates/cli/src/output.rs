//! Output envelopes: CSV with a `#` metadata block, or one JSON document.
//! Everything but the timestamp is a pure function of the merged config.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

/// Bumped whenever a column or field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "GAPLAB_OUT_DIR";

pub struct Meta {
    pub command: &'static str,
    pub config: Value,
}

fn generator() -> String {
    format!("gaplab {}", env!("CARGO_PKG_VERSION"))
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn csv<R: Serialize>(meta: &Meta, rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "# generator: {}", generator()).map_err(CliError::io)?;
    writeln!(buf, "# schema_version: {SCHEMA_VERSION}").map_err(CliError::io)?;
    writeln!(buf, "# command: {}", meta.command).map_err(CliError::io)?;
    writeln!(buf, "# config: {}", meta.config).map_err(CliError::io)?;
    writeln!(buf, "# timestamp_unix: {}", timestamp()).map_err(CliError::io)?;
    let mut w = ::csv::Writer::from_writer(buf);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

pub fn json<D: Serialize>(meta: &Meta, data: &D) -> Result<Vec<u8>, CliError> {
    let doc = json!({
        "generator": generator(),
        "schema_version": SCHEMA_VERSION,
        "command": meta.command,
        "config": meta.config,
        "timestamp_unix": timestamp(),
        "data": data,
    });
    let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Relative paths land in `$GAPLAB_OUT_DIR` when it is set.
pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes the finished document in one go.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let path = resolve(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(CliError::io)?;
            }
            std::fs::write(&path, bytes).map_err(CliError::io)
        }
        None => std::io::stdout().write_all(bytes).map_err(CliError::io),
    }
}
