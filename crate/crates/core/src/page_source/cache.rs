use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{PageError, SourcePage};

/// Lowercase with whitespace runs collapsed; the cache key.
pub fn normalize_title(title: &str) -> String {
    title.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// One JSON file per normalized title. Writes go to a temp file in the same
/// directory and are renamed into place, so readers never see partial files.
/// Nothing is evicted.
#[derive(Debug, Clone)]
pub struct PageCache {
    dir: PathBuf,
}

impl PageCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self, PageError> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { dir: dir.as_ref().to_path_buf() })
    }

    fn path_for(&self, title: &str) -> PathBuf {
        let digest = hex::encode(Sha256::digest(normalize_title(title).as_bytes()));
        self.dir.join(format!("{digest}.json"))
    }

    pub fn get(&self, title: &str) -> Result<Option<SourcePage>, PageError> {
        match fs::read(self.path_for(title)) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| PageError::Cache(std::io::Error::new(ErrorKind::InvalidData, e))),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn put(&self, title: &str, page: &SourcePage) -> Result<(), PageError> {
        let bytes = serde_json::to_vec(page)
            .map_err(|e| PageError::Cache(std::io::Error::new(ErrorKind::InvalidData, e)))?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&bytes)?;
        tmp.persist(self.path_for(title)).map_err(|e| e.error)?;
        Ok(())
    }
}
