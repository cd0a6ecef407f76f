use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CorpusError;

/// Environment variable holding the author-hash salt. The salt is never
/// written to any file.
pub const SALT_ENV: &str = "TOPICORPUS_SALT";

/// Author placeholder used by the dumps for removed accounts.
pub const DELETED_AUTHOR: &str = "[deleted]";

/// Lowercase hex SHA-256 digest, always 64 characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthorHash(String);

impl AuthorHash {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl std::fmt::Display for AuthorHash {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone)]
pub struct AuthorHasher {
    salted: Sha256,
}

impl std::fmt::Debug for AuthorHasher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AuthorHasher { .. }")
    }
}

impl AuthorHasher {
    pub fn new(salt: &str) -> Result<Self, CorpusError> {
        if salt.is_empty() {
            return Err(CorpusError::MissingSalt);
        }
        let mut salted = Sha256::new();
        salted.update(salt.as_bytes());
        Ok(Self { salted })
    }

    pub fn from_env() -> Result<Self, CorpusError> {
        match std::env::var(SALT_ENV) {
            Ok(salt) => Self::new(&salt),
            Err(_) => Err(CorpusError::MissingSalt),
        }
    }

    /// SHA-256 of salt‖author.
    pub fn hash(&self, author: &str) -> AuthorHash {
        let mut h = self.salted.clone();
        h.update(author.as_bytes());
        AuthorHash(hex::encode(h.finalize()))
    }
}

pub fn anonymize(author: &str, salt: &str) -> Result<AuthorHash, CorpusError> {
    Ok(AuthorHasher::new(salt)?.hash(author))
}
