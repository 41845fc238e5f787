//! Input resolution, manifests and atomic file output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::counts::{builtin_dataset, parse_counts, DatasetMeta, TrsCounts};
use crate::error::{Error, Result};

/// A built-in name or a path to a counts file.
pub fn load_data(spec: &str) -> Result<(TrsCounts, DatasetMeta)> {
    match builtin_dataset(spec) {
        Ok(found) => Ok(found),
        Err(Error::UnknownDataset(_)) if Path::new(spec).exists() => {
            let text = fs::read_to_string(spec)?;
            let counts = parse_counts(&text)?;
            let stem = Path::new(spec)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            Ok((counts, DatasetMeta::new(stem, "file", None)?))
        }
        Err(e) => Err(e),
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a sibling temporary file and renames into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Everything needed to re-run a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, replayable verbatim.
    pub args: Vec<String>,
    pub input_digest: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub version: String,
    pub started_unix: u64,
    pub elapsed_ms: u128,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], input_digest: String, seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            args: args.to_vec(),
            input_digest,
            seed,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            elapsed_ms: 0,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
