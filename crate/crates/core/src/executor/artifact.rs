use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const HASH_PREFIX: &str = "sha256:";

/// `sha256:<64 hex digits>` of `bytes`.
pub fn content_id(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut id = String::with_capacity(HASH_PREFIX.len() + 64);
    id.push_str(HASH_PREFIX);
    for b in digest {
        id.push_str(&format!("{b:02x}"));
    }
    id
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Producer {
    pub run_id: String,
    pub node: String,
    pub port: String,
}

/// Content-addressed output of one out-port.
///
/// `bytes` are not part of the serialized form; they live in the run
/// directory at `<node>/<port>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub id: String,
    pub kind: String,
    pub size: u64,
    pub producer: Producer,
    #[serde(skip)]
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(kind: impl Into<String>, bytes: Vec<u8>, producer: Producer) -> Self {
        Self {
            id: content_id(&bytes),
            kind: kind.into(),
            size: bytes.len() as u64,
            producer,
            bytes,
        }
    }

    /// Recomputes the hash and compares it with `id`.
    pub fn verify(&self) -> bool {
        self.size == self.bytes.len() as u64 && content_id(&self.bytes) == self.id
    }

    pub fn relative_path(&self) -> PathBuf {
        Path::new(&self.producer.node).join(&self.producer.port)
    }

    pub fn text(&self) -> Option<&str> {
        std::str::from_utf8(&self.bytes).ok()
    }
}

pub(crate) fn write_bytes(run_dir: &Path, artifact: &Artifact) -> io::Result<()> {
    let path = run_dir.join(artifact.relative_path());
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, &artifact.bytes)
}

pub(crate) fn read_bytes(run_dir: &Path, artifact: &mut Artifact) -> io::Result<()> {
    artifact.bytes = fs::read(run_dir.join(artifact.relative_path()))?;
    if !artifact.verify() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!(
                "{} does not match its content id {}",
                artifact.relative_path().display(),
                artifact.id
            ),
        ));
    }
    Ok(())
}
