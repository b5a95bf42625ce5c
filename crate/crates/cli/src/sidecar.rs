//! Run-metadata sidecars. Contents depend only on the command line and the
//! bytes of inputs and outputs, never on the clock or the host.

use std::fs;
use std::path::{Path, PathBuf};

use cardioflux::io::{sha256_file, sha256_hex, write_string};
use cardioflux::Result;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunMetadata<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub options: T,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

fn files_under(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let rd = fs::read_dir(dir).map_err(|e| cardioflux::Error::io(dir, e))?;
    for entry in rd {
        let p = entry.map_err(|e| cardioflux::Error::io(dir, e))?.path();
        if p.is_dir() {
            files_under(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Digest of a file, or of a directory as the hash of its sorted
/// `relative-path sha256` lines.
pub fn digest(path: &Path) -> Result<FileDigest> {
    let sha256 = if path.is_dir() {
        let mut files = Vec::new();
        files_under(path, &mut files)?;
        let mut lines: Vec<String> = files
            .iter()
            .filter(|f| f.file_name().is_some_and(|n| n != "run.json"))
            .map(|f| {
                let rel = f.strip_prefix(path).unwrap_or(f).to_string_lossy().replace('\\', "/");
                Ok(format!("{rel} {}\n", sha256_file(f)?))
            })
            .collect::<Result<_>>()?;
        lines.sort();
        sha256_hex(lines.concat().as_bytes())
    } else {
        sha256_file(path)?
    };
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256,
    })
}

pub fn write<T: Serialize>(path: &Path, meta: &RunMetadata<T>) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes") + "\n";
    write_string(path, &text)
}
