//! Question-salted argon2id hashing of answers.

use std::fmt;
use std::str::FromStr;

use argon2::{Algorithm, Argon2, Params, Version};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;

use crate::canon::{canonicalize, CanonVersion};
use crate::{Error, Result};

pub const SALT_DOMAIN: &str = "hashmark/v1/salt\n";
pub const HASH_LEN: usize = 32;
pub const ARGON2_VERSION: u32 = 19;

/// argon2id cost configuration. Serialized verbatim into every document and
/// submission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdfParams {
    pub algorithm: KdfAlgorithm,
    pub algorithm_version: u32,
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
    pub output_len: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KdfAlgorithm {
    #[serde(rename = "argon2id")]
    Argon2id,
}

impl KdfParams {
    pub fn argon2id(memory_kib: u32, iterations: u32, parallelism: u32) -> Self {
        KdfParams {
            algorithm: KdfAlgorithm::Argon2id,
            algorithm_version: ARGON2_VERSION,
            memory_kib,
            iterations,
            parallelism,
            output_len: HASH_LEN as u32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithm_version != ARGON2_VERSION {
            return Err(Error::InvalidParams(format!(
                "algorithm_version must be {ARGON2_VERSION}, got {}",
                self.algorithm_version
            )));
        }
        if self.parallelism < 1 {
            return Err(Error::InvalidParams("parallelism must be at least 1".into()));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidParams("iterations must be at least 1".into()));
        }
        if u64::from(self.memory_kib) < 8 * u64::from(self.parallelism) {
            return Err(Error::InvalidParams(format!(
                "memory_kib ({}) must be at least 8 x parallelism ({})",
                self.memory_kib, self.parallelism
            )));
        }
        if self.output_len as usize != HASH_LEN {
            return Err(Error::InvalidParams(format!("output_len must be {HASH_LEN}")));
        }
        Ok(())
    }

    fn argon2(&self) -> Result<Argon2<'static>> {
        self.validate()?;
        let params = Params::new(
            self.memory_kib,
            self.iterations,
            self.parallelism,
            Some(HASH_LEN),
        )
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
        Ok(Argon2::new(Algorithm::Argon2id, Version::V0x13, params))
    }
}

/// Named parameter sets. Documents carry their own params, so profiles are
/// conventions for producing them rather than anything a verifier trusts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// 100 MiB, 128 passes, one lane: about one hash per minute per core.
    Secure,
    /// Desk-scale testing only.
    Test,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Secure => "secure",
            Profile::Test => "test",
        }
    }

    pub fn params(self) -> KdfParams {
        match self {
            Profile::Secure => KdfParams::argon2id(102_400, 128, 1),
            Profile::Test => KdfParams::argon2id(64, 1, 1),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "secure" => Ok(Profile::Secure),
            "test" => Ok(Profile::Test),
            other => Err(Error::InvalidParams(format!("unknown profile `{other}`"))),
        }
    }
}

/// 32-byte argon2id output, lowercase hex on the wire.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnswerHash([u8; HASH_LEN]);

impl AnswerHash {
    pub fn from_bytes(bytes: [u8; HASH_LEN]) -> Self {
        AnswerHash(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; HASH_LEN] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Constant-time comparison.
    pub fn ct_eq(&self, other: &AnswerHash) -> bool {
        self.0.ct_eq(&other.0).into()
    }
}

impl FromStr for AnswerHash {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let well_formed = s.len() == 2 * HASH_LEN
            && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if !well_formed {
            return Err(Error::MalformedHash(s.to_owned()));
        }
        let mut out = [0u8; HASH_LEN];
        hex::decode_to_slice(s, &mut out).map_err(|_| Error::MalformedHash(s.to_owned()))?;
        Ok(AnswerHash(out))
    }
}

impl fmt::Display for AnswerHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for AnswerHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnswerHash({})", self.to_hex())
    }
}

impl Serialize for AnswerHash {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for AnswerHash {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn sha256_domain(domain: &str, text: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(domain.as_bytes());
    h.update(text.as_bytes());
    h.finalize().into()
}

/// Salt for an already-canonical question.
pub fn derive_salt(question_canonical: &str) -> Result<[u8; 32]> {
    if question_canonical.is_empty() {
        return Err(Error::EmptyQuestion);
    }
    Ok(sha256_domain(SALT_DOMAIN, question_canonical))
}

/// Raw argon2id over arbitrary password bytes and a 32-byte salt.
pub fn kdf(password: &[u8], salt: &[u8; 32], params: &KdfParams) -> Result<[u8; HASH_LEN]> {
    let mut out = [0u8; HASH_LEN];
    params
        .argon2()?
        .hash_password_into(password, salt, &mut out)
        .map_err(|e| Error::Kdf(e.to_string()))?;
    Ok(out)
}

pub fn hash_answer(
    question: &str,
    answer: &str,
    params: &KdfParams,
    canon: CanonVersion,
) -> Result<AnswerHash> {
    QuestionHasher::new(question, params, canon)?.hash(answer)
}

/// False for abstentions without running the KDF.
pub fn verify_answer(
    question: &str,
    candidate: &str,
    expected: &AnswerHash,
    params: &KdfParams,
    canon: CanonVersion,
) -> Result<bool> {
    QuestionHasher::new(question, params, canon)?.verify(candidate, expected)
}

/// Hashes many candidate answers for one question, computing the salt and
/// argon2 context once. This is the inner loop of grading and attacks.
#[derive(Clone)]
pub struct QuestionHasher {
    salt: [u8; 32],
    argon2: Argon2<'static>,
    canon: CanonVersion,
}

impl QuestionHasher {
    pub fn new(question: &str, params: &KdfParams, canon: CanonVersion) -> Result<Self> {
        let salt = derive_salt(&canonicalize(question, canon))?;
        Self::with_salt(salt, params, canon)
    }

    pub fn with_salt(salt: [u8; 32], params: &KdfParams, canon: CanonVersion) -> Result<Self> {
        Ok(QuestionHasher { salt, argon2: params.argon2()?, canon })
    }

    pub fn salt(&self) -> &[u8; 32] {
        &self.salt
    }

    pub fn hash(&self, answer: &str) -> Result<AnswerHash> {
        let canonical = canonicalize(answer, self.canon);
        if canonical.is_empty() {
            return Err(Error::EmptyAnswer);
        }
        self.hash_canonical(&canonical)
    }

    fn hash_canonical(&self, canonical: &str) -> Result<AnswerHash> {
        let mut out = [0u8; HASH_LEN];
        self.argon2
            .hash_password_into(canonical.as_bytes(), &self.salt, &mut out)
            .map_err(|e| Error::Kdf(e.to_string()))?;
        Ok(AnswerHash(out))
    }

    /// `None` when the candidate is an abstention (no KDF call was made).
    pub fn try_hash(&self, candidate: &str) -> Result<Option<AnswerHash>> {
        let canonical = canonicalize(candidate, self.canon);
        if canonical.is_empty() {
            return Ok(None);
        }
        self.hash_canonical(&canonical).map(Some)
    }

    pub fn verify(&self, candidate: &str, expected: &AnswerHash) -> Result<bool> {
        Ok(match self.try_hash(candidate)? {
            Some(h) => h.ct_eq(expected),
            None => false,
        })
    }
}
