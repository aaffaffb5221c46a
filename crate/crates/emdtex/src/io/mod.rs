//! On-disk interchange: directory bundles with digest-checked binary
//! planes, PNG images, CSV signals, and loss-evaluation manifests.
//!
//! Every write here is atomic: content goes to a sibling temp file or
//! temp directory first and is renamed into place, so a crash or error
//! mid-write never leaves a partial artifact at the target path.

pub mod bundle;
pub mod loss_manifest;
pub mod png;
pub mod signal_csv;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Parent directory to stage temp files in; same filesystem as `path`
/// so the final rename cannot cross devices.
pub(crate) fn staging_parent(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes `bytes` to `path` via a temp file and atomic rename.
pub(crate) fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(staging_parent(path))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
