//! Audit headers stamped onto every emitted file: tool version, master
//! seed, and a digest of the run configuration. Readers in this crate skip
//! `#` lines.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactMeta {
    pub seed: u64,
    pub config_digest: String,
}

impl ArtifactMeta {
    pub fn new(seed: u64, config_digest: impl Into<String>) -> Self {
        ArtifactMeta { seed, config_digest: config_digest.into() }
    }

    pub fn header(&self) -> String {
        format!(
            "# floodsignal {}\n# seed: {}\n# config: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.seed,
            self.config_digest
        )
    }

    pub fn write_header<W: Write>(&self, mut writer: W) -> Result<()> {
        writer
            .write_all(self.header().as_bytes())
            .map_err(|e| Error::io("<artifact header>", e))
    }
}

/// Digest of arbitrary configuration bytes, hex-encoded sha256.
pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Create an output file with the audit header already written.
pub fn create_with_header(path: &Path, meta: &ArtifactMeta) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    meta.write_header(&mut writer)?;
    Ok(writer)
}
