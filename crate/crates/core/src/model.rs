//! Published documents, expert submissions, answer sheets and the auditor's
//! private ledger, with their JSON encoding.
//!
//! Every value is encoded as UTF-8 JSON with lexicographically sorted keys,
//! pretty-printed and newline-terminated, so identical values always encode
//! to identical bytes.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canon::{canonicalize, CanonVersion};
use crate::hashcore::{sha256_domain, AnswerHash, KdfParams};
use crate::{Error, Result};

pub const FORMAT_VERSION: &str = "1.0";
pub const ID_DOMAIN: &str = "hashmark/v1/id\n";
pub const NONCE_LEN: usize = 24;

pub const DOCUMENT_SUFFIX: &str = ".hashmark.json";
pub const SUBMISSION_SUFFIX: &str = ".submission.json";
pub const SHEET_SUFFIX: &str = ".sheet.json";
pub const REPORT_SUFFIX: &str = ".report.json";
pub const LEDGER_FILE: &str = "ledger.json";

/// 128-bit entry identifier derived from the canonical question.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryId([u8; 16]);

impl EntryId {
    pub fn for_question(question: &str, canon: CanonVersion) -> Result<Self> {
        let canonical = canonicalize(question, canon);
        if canonical.is_empty() {
            return Err(Error::EmptyQuestion);
        }
        let digest = sha256_domain(ID_DOMAIN, &canonical);
        let mut id = [0u8; 16];
        id.copy_from_slice(&digest[..16]);
        Ok(EntryId(id))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl FromStr for EntryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ok = s.len() == 32 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if !ok {
            return Err(Error::MalformedId(s.to_owned()));
        }
        let mut id = [0u8; 16];
        hex::decode_to_slice(s, &mut id).map_err(|_| Error::MalformedId(s.to_owned()))?;
        Ok(EntryId(id))
    }
}

impl fmt::Display for EntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for EntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntryId({})", self.to_hex())
    }
}

impl Serialize for EntryId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for EntryId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A cleartext question with its hashed reference answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub id: EntryId,
    pub question: String,
    pub answer_hash: AnswerHash,
}

impl Entry {
    pub fn new(question: impl Into<String>, answer_hash: AnswerHash, canon: CanonVersion) -> Result<Self> {
        let question = question.into();
        let id = EntryId::for_question(&question, canon)?;
        Ok(Entry { id, question, answer_hash })
    }

    pub fn validate(&self, canon: CanonVersion) -> Result<()> {
        let expected = EntryId::for_question(&self.question, canon)?;
        if expected != self.id {
            return Err(Error::IdMismatch { expected: expected.to_hex(), found: self.id.to_hex() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensitivity {
    High,
    Decoy,
}

/// Ledger row. Never part of a published document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivateEntry {
    pub entry: Entry,
    pub sensitivity: Sensitivity,
    pub contributor: String,
}

/// The auditor's private record of where each published entry came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ledger {
    pub entries: Vec<PrivateEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmissionItem {
    pub question: String,
    /// `None` is an explicit abstention.
    pub answer_hash: Option<AnswerHash>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpertSubmission {
    pub expert_id: String,
    pub canon: CanonVersion,
    pub params: KdfParams,
    pub items: Vec<SubmissionItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HashmarkDocument {
    pub format_version: String,
    pub canon: CanonVersion,
    pub kdf: KdfParams,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StageWire", into = "StageWire")]
pub struct Stage {
    pub index: u32,
    pub body: StageBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageBody {
    Clear(Vec<Entry>),
    Sealed(SealedStage),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageWire {
    index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sealed: Option<SealedStage>,
}

impl TryFrom<StageWire> for Stage {
    type Error = String;

    fn try_from(w: StageWire) -> std::result::Result<Self, String> {
        let body = match (w.entries, w.sealed) {
            (Some(entries), None) => StageBody::Clear(entries),
            (None, Some(sealed)) => StageBody::Sealed(sealed),
            _ => return Err(format!("stage {} must have exactly one of `entries` or `sealed`", w.index)),
        };
        Ok(Stage { index: w.index, body })
    }
}

impl From<Stage> for StageWire {
    fn from(s: Stage) -> Self {
        match s.body {
            StageBody::Clear(entries) => StageWire { index: s.index, entries: Some(entries), sealed: None },
            StageBody::Sealed(sealed) => StageWire { index: s.index, entries: None, sealed: Some(sealed) },
        }
    }
}

impl Stage {
    pub fn entries(&self) -> Option<&[Entry]> {
        match &self.body {
            StageBody::Clear(e) => Some(e),
            StageBody::Sealed(_) => None,
        }
    }

    pub fn sealed(&self) -> Option<&SealedStage> {
        match &self.body {
            StageBody::Sealed(s) => Some(s),
            StageBody::Clear(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SealedStage {
    #[serde(with = "b64")]
    pub ciphertext: Vec<u8>,
    #[serde(with = "b64_nonce")]
    pub nonce: [u8; NONCE_LEN],
    pub unlock: UnlockRule,
}

impl fmt::Debug for SealedStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SealedStage")
            .field("ciphertext_len", &self.ciphertext.len())
            .field("unlock", &self.unlock)
            .finish()
    }
}

mod b64 {
    use super::*;

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&BASE64.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        BASE64
            .decode(s.as_bytes())
            .map_err(|_| serde::de::Error::custom(Error::MalformedBase64 { field: "ciphertext" }))
    }
}

mod b64_nonce {
    use super::*;

    pub fn serialize<S: Serializer>(bytes: &[u8; NONCE_LEN], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&BASE64.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<[u8; NONCE_LEN], D::Error> {
        let s = String::deserialize(d)?;
        let raw = BASE64
            .decode(s.as_bytes())
            .map_err(|_| serde::de::Error::custom(Error::MalformedBase64 { field: "nonce" }))?;
        raw.try_into()
            .map_err(|_| serde::de::Error::custom(format!("nonce must be {NONCE_LEN} bytes")))
    }
}

/// How the key of a sealed stage is derived from earlier answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "UnlockWire", into = "UnlockWire")]
pub struct UnlockRule {
    pub source_stage: u32,
    pub mode: UnlockMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnlockMode {
    /// Key from the answer to one entry of the source stage.
    Single(EntryId),
    /// Key from all answers of the source stage, id-sorted and newline-joined.
    Concat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnlockWire {
    mode: String,
    source_stage: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_entry: Option<EntryId>,
}

impl TryFrom<UnlockWire> for UnlockRule {
    type Error = String;

    fn try_from(w: UnlockWire) -> std::result::Result<Self, String> {
        let mode = match (w.mode.as_str(), w.source_entry) {
            ("single", Some(id)) => UnlockMode::Single(id),
            ("single", None) => return Err("unlock mode `single` requires `source_entry`".into()),
            ("concat", None) => UnlockMode::Concat,
            ("concat", Some(_)) => return Err("unlock mode `concat` takes no `source_entry`".into()),
            (other, _) => return Err(format!("unknown unlock mode `{other}`")),
        };
        Ok(UnlockRule { source_stage: w.source_stage, mode })
    }
}

impl From<UnlockRule> for UnlockWire {
    fn from(r: UnlockRule) -> Self {
        match r.mode {
            UnlockMode::Single(id) => UnlockWire { mode: "single".into(), source_stage: r.source_stage, source_entry: Some(id) },
            UnlockMode::Concat => UnlockWire { mode: "concat".into(), source_stage: r.source_stage, source_entry: None },
        }
    }
}

impl UnlockRule {
    pub fn single(source_stage: u32, source_entry: EntryId) -> Self {
        UnlockRule { source_stage, mode: UnlockMode::Single(source_entry) }
    }

    pub fn concat(source_stage: u32) -> Self {
        UnlockRule { source_stage, mode: UnlockMode::Concat }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheetItem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_id: Option<EntryId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    /// `None` is an abstention.
    pub candidate: Option<String>,
}

impl SheetItem {
    pub fn by_id(id: EntryId, candidate: Option<String>) -> Self {
        SheetItem { entry_id: Some(id), question: None, candidate }
    }

    pub fn by_question(question: impl Into<String>, candidate: Option<String>) -> Self {
        SheetItem { entry_id: None, question: Some(question.into()), candidate }
    }

    pub fn resolve(&self, canon: CanonVersion) -> Result<EntryId> {
        match (&self.entry_id, &self.question) {
            (Some(id), None) => Ok(*id),
            (None, Some(q)) => EntryId::for_question(q, canon),
            _ => Err(Error::InvalidSheet("each item needs exactly one of `entry_id` or `question`".into())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerSheet {
    pub items: Vec<SheetItem>,
}

/// Values with a validated, deterministic JSON encoding.
pub trait Wire: Serialize + DeserializeOwned {
    fn validate(&self) -> Result<()>;

    fn encode(&self) -> Result<Vec<u8>> {
        self.validate()?;
        to_canonical_json(self)
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let value: Self = serde_json::from_slice(bytes)?;
        value.validate()?;
        Ok(value)
    }
}

/// Sorted-key, pretty-printed, newline-terminated JSON.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    // serde_json::Map is a BTreeMap (no preserve_order), which sorts keys.
    let tree = serde_json::to_value(value)?;
    let mut out = serde_json::to_vec_pretty(&tree)?;
    out.push(b'\n');
    Ok(out)
}

/// Compact sorted-key JSON, used for sealed plaintexts.
pub(crate) fn to_compact_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(&serde_json::to_value(value)?)?)
}

impl Wire for HashmarkDocument {
    fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::UnknownFormatVersion(self.format_version.clone()));
        }
        self.kdf.validate()?;
        if self.stages.is_empty() {
            return Err(Error::InvalidDocument("document has no stages".into()));
        }
        let mut seen = HashSet::new();
        for (pos, stage) in self.stages.iter().enumerate() {
            if stage.index as usize != pos {
                return Err(Error::InvalidDocument(format!(
                    "stage indices must be contiguous from 0; position {pos} has index {}",
                    stage.index
                )));
            }
            match &stage.body {
                StageBody::Clear(entries) => {
                    if entries.is_empty() {
                        return Err(Error::InvalidDocument(format!("stage {pos} has no entries")));
                    }
                    for e in entries {
                        e.validate(self.canon)?;
                        if !seen.insert(e.id) {
                            return Err(Error::DuplicateId(e.id.to_hex()));
                        }
                    }
                }
                StageBody::Sealed(sealed) => {
                    if pos == 0 {
                        return Err(Error::InvalidDocument("stage 0 must be cleartext".into()));
                    }
                    let rule = &sealed.unlock;
                    if rule.source_stage >= stage.index {
                        return Err(Error::InvalidDocument(format!(
                            "stage {pos} unlocks from stage {}, which is not earlier",
                            rule.source_stage
                        )));
                    }
                    if let (UnlockMode::Single(id), Some(src)) =
                        (rule.mode, self.stages[rule.source_stage as usize].entries())
                    {
                        if !src.iter().any(|e| e.id == id) {
                            return Err(Error::InvalidDocument(format!(
                                "stage {pos} unlock cites entry {id} absent from stage {}",
                                rule.source_stage
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl HashmarkDocument {
    /// Entries of all cleartext stages, in stage order.
    pub fn clear_entries(&self) -> impl Iterator<Item = &Entry> {
        self.stages.iter().filter_map(Stage::entries).flatten()
    }
}

impl Wire for ExpertSubmission {
    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.expert_id.trim().is_empty() {
            return Err(Error::InvalidSubmission("expert_id is empty".into()));
        }
        for item in &self.items {
            if canonicalize(&item.question, self.canon).is_empty() {
                return Err(Error::InvalidSubmission("item with an empty question".into()));
            }
        }
        Ok(())
    }
}

impl Wire for AnswerSheet {
    fn validate(&self) -> Result<()> {
        for item in &self.items {
            if item.entry_id.is_some() == item.question.is_some() {
                return Err(Error::InvalidSheet(
                    "each item needs exactly one of `entry_id` or `question`".into(),
                ));
            }
        }
        Ok(())
    }
}

impl Wire for Ledger {
    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for row in &self.entries {
            if !seen.insert(row.entry.id) {
                return Err(Error::DuplicateId(row.entry.id.to_hex()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LintWarning {
    ClosedSet(String),
    TooShort(usize),
    SmallInteger(i64),
}

impl fmt::Display for LintWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LintWarning::ClosedSet(a) => write!(f, "answer `{a}` comes from a tiny closed set and is trivially guessable"),
            LintWarning::TooShort(n) => write!(f, "answer is only {n} character(s) long"),
            LintWarning::SmallInteger(v) => write!(f, "answer is the small integer {v}; enumerating all of them is cheap"),
        }
    }
}

const CLOSED_SET: &[&str] = &["yes", "no", "true", "false"];

/// Heuristics flagging answers cheap enough to brute-force. Advisory only.
pub fn lint_entry(_question: &str, answer: &str, canon: CanonVersion) -> Vec<LintWarning> {
    let a = canonicalize(answer, canon);
    if a.is_empty() {
        return Vec::new();
    }
    let mut warnings = Vec::new();
    let single_digit = a.len() == 1 && a.as_bytes()[0].is_ascii_digit();
    if CLOSED_SET.contains(&a.as_str()) || single_digit {
        warnings.push(LintWarning::ClosedSet(a.clone()));
    }
    let chars = a.chars().count();
    if chars < 3 {
        warnings.push(LintWarning::TooShort(chars));
    }
    if let Ok(v) = a.parse::<i64>() {
        if v < 10_000 {
            warnings.push(LintWarning::SmallInteger(v));
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashcore::Profile;

    fn h(n: u8) -> AnswerHash {
        AnswerHash::from_bytes([n; 32])
    }

    fn minimal_doc() -> HashmarkDocument {
        HashmarkDocument {
            format_version: FORMAT_VERSION.into(),
            canon: CanonVersion::C1,
            kdf: Profile::Test.params(),
            stages: vec![Stage {
                index: 0,
                body: StageBody::Clear(vec![Entry::new("q1", h(1), CanonVersion::C1).unwrap()]),
            }],
        }
    }

    #[test]
    fn id_vector() {
        // SHA-256("hashmark/v1/id\nq1")[..16], computed with Python hashlib
        let id = EntryId::for_question("Q1 ", CanonVersion::C1).unwrap();
        assert_eq!(id.to_hex(), "73dc5fe8b685c39a4c3624514c698d74");
    }

    #[test]
    fn minimal_document_round_trips() {
        let doc = minimal_doc();
        let bytes = doc.encode().unwrap();
        let back = HashmarkDocument::decode(&bytes).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.encode().unwrap(), bytes);
        assert!(bytes.ends_with(b"\n"));
    }

    #[test]
    fn keys_are_sorted() {
        let text = String::from_utf8(minimal_doc().encode().unwrap()).unwrap();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("canon") < pos("format_version"));
        assert!(pos("format_version") < pos("kdf"));
        assert!(pos("algorithm") < pos("iterations"));
        assert!(pos("answer_hash") < pos("id"));
        assert!(pos("id") < pos("question"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut doc = minimal_doc();
        let dup = Entry::new("  Q1", h(2), CanonVersion::C1).unwrap();
        if let StageBody::Clear(es) = &mut doc.stages[0].body {
            es.push(dup);
        }
        assert!(matches!(doc.encode(), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn id_mismatch_rejected() {
        let text = String::from_utf8(minimal_doc().encode().unwrap()).unwrap();
        let tampered = text.replace("\"question\": \"q1\"", "\"question\": \"q2\"");
        assert_ne!(text, tampered);
        assert!(matches!(HashmarkDocument::decode(tampered.as_bytes()), Err(Error::IdMismatch { .. })));
    }

    #[test]
    fn truncated_json_rejected() {
        let bytes = minimal_doc().encode().unwrap();
        assert!(matches!(HashmarkDocument::decode(&bytes[..bytes.len() / 2]), Err(Error::Json(_))));
    }

    #[test]
    fn unknown_format_version_rejected() {
        let mut doc = minimal_doc();
        doc.format_version = "2.0".into();
        let bytes = to_canonical_json(&doc).unwrap();
        assert!(matches!(HashmarkDocument::decode(&bytes), Err(Error::UnknownFormatVersion(_))));
    }

    #[test]
    fn unknown_canon_rejected() {
        let text = String::from_utf8(minimal_doc().encode().unwrap()).unwrap();
        let bad = text.replace("\"canon\": \"c1\"", "\"canon\": \"c9\"");
        assert!(HashmarkDocument::decode(bad.as_bytes()).is_err());
    }

    fn sealed(source_stage: u32, mode: UnlockMode) -> SealedStage {
        SealedStage { ciphertext: vec![1, 2, 3], nonce: [7; NONCE_LEN], unlock: UnlockRule { source_stage, mode } }
    }

    #[test]
    fn sealed_stage_zero_rejected() {
        let mut doc = minimal_doc();
        doc.stages[0].body = StageBody::Sealed(sealed(0, UnlockMode::Concat));
        let bytes = to_canonical_json(&doc).unwrap();
        assert!(matches!(HashmarkDocument::decode(&bytes), Err(Error::InvalidDocument(_))));
    }

    #[test]
    fn stage_validation() {
        let q1 = EntryId::for_question("q1", CanonVersion::C1).unwrap();
        let other = EntryId::for_question("zz", CanonVersion::C1).unwrap();
        let mut doc = minimal_doc();
        doc.stages.push(Stage { index: 1, body: StageBody::Sealed(sealed(0, UnlockMode::Single(q1))) });
        let bytes = doc.encode().unwrap();
        assert_eq!(HashmarkDocument::decode(&bytes).unwrap(), doc);

        let mut bad = doc.clone();
        bad.stages[1].body = StageBody::Sealed(sealed(0, UnlockMode::Single(other)));
        assert!(bad.validate().is_err());

        let mut bad = doc.clone();
        bad.stages[1].body = StageBody::Sealed(sealed(1, UnlockMode::Concat));
        assert!(bad.validate().is_err());

        let mut bad = doc.clone();
        bad.stages[1].index = 2;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn malformed_fields_rejected() {
        let q1 = EntryId::for_question("q1", CanonVersion::C1).unwrap();
        let mut doc = minimal_doc();
        doc.stages.push(Stage { index: 1, body: StageBody::Sealed(sealed(0, UnlockMode::Single(q1))) });
        let text = String::from_utf8(doc.encode().unwrap()).unwrap();
        let nonce = BASE64.encode([7u8; NONCE_LEN]);
        assert!(HashmarkDocument::decode(text.replace(&nonce, "!!!").as_bytes()).is_err());
        assert!(HashmarkDocument::decode(text.replace(&nonce, &BASE64.encode([7u8; 12])).as_bytes()).is_err());
        let hash = h(1).to_hex();
        assert!(HashmarkDocument::decode(text.replace(&hash, &hash[..60]).as_bytes()).is_err());
        assert!(HashmarkDocument::decode(text.replace("\"single\"", "\"double\"").as_bytes()).is_err());
    }

    #[test]
    fn ledger_fields_rejected_in_documents() {
        let text = String::from_utf8(minimal_doc().encode().unwrap()).unwrap();
        let bad = text.replace("\"question\": \"q1\"", "\"question\": \"q1\", \"sensitivity\": \"high\"");
        assert!(HashmarkDocument::decode(bad.as_bytes()).is_err());
    }

    #[test]
    fn submission_abstention_is_null() {
        let sub = ExpertSubmission {
            expert_id: "alice".into(),
            canon: CanonVersion::C1,
            params: Profile::Test.params(),
            items: vec![
                SubmissionItem { question: "q".into(), answer_hash: None },
                SubmissionItem { question: "r".into(), answer_hash: Some(h(3)) },
            ],
        };
        let bytes = sub.encode().unwrap();
        let text = std::str::from_utf8(&bytes).unwrap();
        assert!(text.contains("\"answer_hash\": null"));
        assert_eq!(ExpertSubmission::decode(&bytes).unwrap(), sub);
        assert!(ExpertSubmission::decode(text.replace("null", "\"\"").as_bytes()).is_err());
    }

    #[test]
    fn sheet_items_need_exactly_one_key() {
        let id = EntryId::for_question("q", CanonVersion::C1).unwrap();
        let ok = AnswerSheet { items: vec![SheetItem::by_id(id, Some("x".into())), SheetItem::by_question("r", None)] };
        assert_eq!(AnswerSheet::decode(&ok.encode().unwrap()).unwrap(), ok);
        let both = AnswerSheet { items: vec![SheetItem { entry_id: Some(id), question: Some("q".into()), candidate: None }] };
        assert!(both.encode().is_err());
        let neither = AnswerSheet { items: vec![SheetItem { entry_id: None, question: None, candidate: None }] };
        assert!(neither.encode().is_err());
    }

    #[test]
    fn lint_rules() {
        let c = CanonVersion::C1;
        assert!(lint_entry("q", "Yes", c).iter().any(|w| matches!(w, LintWarning::ClosedSet(_))));
        let four = lint_entry("q", "4", c);
        assert!(four.iter().any(|w| matches!(w, LintWarning::ClosedSet(_))));
        assert!(four.iter().any(|w| matches!(w, LintWarning::TooShort(1))));
        assert!(four.iter().any(|w| matches!(w, LintWarning::SmallInteger(4))));
        assert_eq!(lint_entry("q", "9999", c), vec![LintWarning::SmallInteger(9999)]);
        assert!(lint_entry("q", "10000", c).is_empty());
        assert_eq!(lint_entry("q", "xy", c), vec![LintWarning::TooShort(2)]);
        assert!(lint_entry("q", "dimethylcadmium", c).is_empty());
        assert!(lint_entry("q", "  ", c).is_empty());
    }
}
