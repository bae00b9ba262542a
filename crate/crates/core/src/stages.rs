//! Staged hashmarks: later stages are sealed with a key derived from correct
//! answers to an earlier stage.

use std::collections::HashMap;
use std::fmt;

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{XChaCha20Poly1305, XNonce};
use rand::rngs::OsRng;
use rand::RngCore;
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::canon::{canonicalize, CanonVersion};
use crate::hashcore::{kdf, sha256_domain, KdfParams};
use crate::model::{Entry, EntryId, UnlockMode, UnlockRule, NONCE_LEN};
use crate::{Error, Result};

pub const STAGE_DOMAIN: &str = "hashmark/v1/stage\n";

/// Symmetric key for one sealed stage. Zeroed on drop; never serialized.
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct StageKey([u8; 32]);

impl StageKey {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for StageKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("StageKey(..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedPayload {
    pub ciphertext: Vec<u8>,
    pub nonce: [u8; NONCE_LEN],
}

fn stage_label(index: u32) -> String {
    format!("{STAGE_DOMAIN}{index}")
}

/// Derives the key for stage `target_index`.
///
/// `source_ids` lists the entries of the rule's source stage; it is only
/// consulted in concat mode, where every one of them needs an answer.
pub fn derive_stage_key(
    rule: &UnlockRule,
    source_ids: &[EntryId],
    answers: &HashMap<EntryId, String>,
    target_index: u32,
    params: &KdfParams,
    canon: CanonVersion,
) -> Result<StageKey> {
    let canonical_answer = |id: &EntryId| -> Result<String> {
        let raw = answers.get(id).ok_or_else(|| Error::MissingUnlockAnswer(id.to_hex()))?;
        let c = canonicalize(raw, canon);
        if c.is_empty() {
            return Err(Error::EmptyAnswer);
        }
        Ok(c)
    };
    let mut password = match rule.mode {
        UnlockMode::Single(id) => canonical_answer(&id)?,
        UnlockMode::Concat => {
            if source_ids.is_empty() {
                return Err(Error::InvalidPlan("concat unlock over an empty stage".into()));
            }
            let mut ids = source_ids.to_vec();
            ids.sort();
            ids.dedup();
            ids.iter().map(canonical_answer).collect::<Result<Vec<_>>>()?.join("\n")
        }
    };
    let salt = sha256_domain(STAGE_DOMAIN, &target_index.to_string());
    let key = kdf(password.as_bytes(), &salt, params);
    password.zeroize();
    Ok(StageKey(key?))
}

pub fn seal_stage(entries: &[Entry], key: &StageKey, stage_index: u32) -> Result<SealedPayload> {
    if entries.is_empty() {
        return Err(Error::InvalidPlan("cannot seal an empty stage".into()));
    }
    let plaintext = crate::model::to_compact_json(entries)?;
    let mut nonce = [0u8; NONCE_LEN];
    OsRng.fill_bytes(&mut nonce);
    let cipher = XChaCha20Poly1305::new(key.as_bytes().into());
    let aad = stage_label(stage_index);
    let ciphertext = cipher
        .encrypt(XNonce::from_slice(&nonce), Payload { msg: &plaintext, aad: aad.as_bytes() })
        .map_err(|_| Error::Kdf("encryption failed".into()))?;
    Ok(SealedPayload { ciphertext, nonce })
}

/// Fails with [`Error::Authentication`] for a wrong key or a corrupted
/// payload; the two cases are indistinguishable.
pub fn unseal_stage(
    payload: &SealedPayload,
    key: &StageKey,
    stage_index: u32,
    canon: CanonVersion,
) -> Result<Vec<Entry>> {
    let cipher = XChaCha20Poly1305::new(key.as_bytes().into());
    let aad = stage_label(stage_index);
    let plaintext = cipher
        .decrypt(XNonce::from_slice(&payload.nonce), Payload { msg: &payload.ciphertext, aad: aad.as_bytes() })
        .map_err(|_| Error::Authentication(stage_index))?;
    let entries: Vec<Entry> = serde_json::from_slice(&plaintext)
        .map_err(|e| Error::InvalidDocument(format!("stage {stage_index} plaintext: {e}")))?;
    if entries.is_empty() {
        return Err(Error::InvalidDocument(format!("stage {stage_index} is empty")));
    }
    for e in &entries {
        e.validate(canon)?;
    }
    Ok(entries)
}
