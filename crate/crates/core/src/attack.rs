//! Red-team harness: dictionary, likelihood-ordered, brute-force and
//! rainbow-table attacks against a published document, plus cost projection.
//!
//! The primary cost metric is `evaluations`, the number of KDF invocations.
//! With one worker the scan is strictly sequential and the counts are
//! canonical. With more workers candidates are hashed in parallel chunks, so
//! the cracked set and recovered answers are identical but a crack may be
//! charged for the rest of its chunk.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::canon::CanonVersion;
use crate::hashcore::{AnswerHash, KdfParams, QuestionHasher};
use crate::model::{EntryId, HashmarkDocument, Wire};
use crate::par::{bounded_workers, Pool};
use crate::{Error, Result};

/// Candidates handed to each worker per parallel round.
const CHUNK_PER_WORKER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictItem {
    pub text: String,
    pub score: Option<f64>,
}

/// Ordered candidate answers, optionally scored by an external likelihood
/// model. Either every item is scored or none is.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    items: Vec<DictItem>,
}

impl Dictionary {
    pub fn new(items: Vec<DictItem>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidDictionary("dictionary is empty".into()));
        }
        let scored = items.iter().filter(|i| i.score.is_some()).count();
        if scored != 0 && scored != items.len() {
            return Err(Error::InvalidDictionary("either every candidate has a score or none does".into()));
        }
        for item in &items {
            if item.text.trim().is_empty() {
                return Err(Error::InvalidDictionary("blank candidate".into()));
            }
            if item.score.is_some_and(|s| !s.is_finite()) {
                return Err(Error::InvalidDictionary(format!("non-finite score for {:?}", item.text)));
            }
        }
        Ok(Dictionary { items })
    }

    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(words.into_iter().map(|w| DictItem { text: w.into(), score: None }).collect())
    }

    /// One candidate per line, optionally followed by a tab and a score.
    /// Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let item = match line.rsplit_once('\t') {
                Some((word, score)) => {
                    let score: f64 = score.trim().parse().map_err(|_| {
                        Error::InvalidDictionary(format!("line {}: bad score {score:?}", n + 1))
                    })?;
                    DictItem { text: word.to_owned(), score: Some(score) }
                }
                None => DictItem { text: line.to_owned(), score: None },
            };
            items.push(item);
        }
        Self::new(items)
    }

    pub fn items(&self) -> &[DictItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_scored(&self) -> bool {
        self.items.iter().all(|i| i.score.is_some())
    }

    /// Candidates by descending score, ties broken by the candidate text.
    pub fn likelihood_order(&self) -> Result<Vec<&str>> {
        if !self.is_scored() {
            return Err(Error::InvalidDictionary("likelihood ordering needs a scored dictionary".into()));
        }
        let mut order: Vec<&DictItem> = self.items.iter().collect();
        order.sort_by(|a, b| {
            let (sa, sb) = (a.score.unwrap_or_default(), b.score.unwrap_or_default());
            sb.total_cmp(&sa).then_with(|| a.text.cmp(&b.text))
        });
        Ok(order.into_iter().map(|i| i.text.as_str()).collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AttackOptions {
    /// Hash under these params instead of the document's own.
    pub params_override: Option<KdfParams>,
    /// Maximum KDF evaluations per entry.
    pub budget: u64,
    pub workers: usize,
    /// Caps `workers x memory_kib`.
    pub memory_budget_kib: Option<u64>,
}

impl AttackOptions {
    pub fn sequential(budget: u64) -> Self {
        AttackOptions { params_override: None, budget, workers: 1, memory_budget_kib: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackMode {
    Dictionary,
    Likelihood,
    BruteForce,
    Rainbow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryOutcome {
    pub cracked: bool,
    pub recovered: Option<String>,
    pub evaluations: u64,
    /// 1-based position of the recovered candidate in scan order.
    pub rank: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub mode: AttackMode,
    pub per_entry: BTreeMap<EntryId, EntryOutcome>,
    pub total_entries: usize,
    pub cracked_count: usize,
    pub total_evaluations: u64,
    pub wall_time: f64,
    pub params_used: KdfParams,
    pub workers: usize,
}

impl AttackReport {
    fn assemble(
        mode: AttackMode,
        per_entry: BTreeMap<EntryId, EntryOutcome>,
        started: Instant,
        params_used: KdfParams,
        workers: usize,
    ) -> Self {
        AttackReport {
            mode,
            total_entries: per_entry.len(),
            cracked_count: per_entry.values().filter(|o| o.cracked).count(),
            total_evaluations: per_entry.values().map(|o| o.evaluations).sum(),
            per_entry,
            wall_time: started.elapsed().as_secs_f64(),
            params_used,
            workers,
        }
    }

    pub fn cracked_ids(&self) -> Vec<EntryId> {
        self.per_entry.iter().filter(|(_, o)| o.cracked).map(|(id, _)| *id).collect()
    }
}

struct Scan {
    found: Option<(u64, String)>,
    evaluations: u64,
}

/// Scans candidates in order until one verifies or the budget runs out.
fn scan<I>(hasher: &QuestionHasher, target: &AnswerHash, candidates: I, budget: u64, pool: &Pool) -> Result<Scan>
where
    I: Iterator<Item = String>,
{
    let mut evaluations = 0u64;
    let mut position = 0u64;
    let mut candidates = candidates.peekable();
    let chunk_size = if pool.workers() > 1 { pool.workers() * CHUNK_PER_WORKER } else { 1 };
    while evaluations < budget && candidates.peek().is_some() {
        let room = usize::try_from(budget - evaluations).unwrap_or(usize::MAX).min(chunk_size);
        let chunk: Vec<String> = candidates.by_ref().take(room).collect();
        let verdicts = pool.map(&chunk, |c| hasher.try_hash(c).map(|h| h.map(|h| h.ct_eq(target))));
        let base = position;
        position += chunk.len() as u64;
        let mut hit = None;
        for (offset, verdict) in verdicts.into_iter().enumerate() {
            // blank candidates hash to nothing and cost nothing
            if let Some(matched) = verdict? {
                evaluations += 1;
                if matched && hit.is_none() {
                    hit = Some(offset);
                    if chunk_size == 1 {
                        break;
                    }
                }
            }
        }
        if let Some(offset) = hit {
            let mut chunk = chunk;
            return Ok(Scan { found: Some((base + offset as u64 + 1, chunk.swap_remove(offset))), evaluations });
        }
    }
    Ok(Scan { found: None, evaluations })
}

fn run_scans<F, I>(document: &HashmarkDocument, opts: &AttackOptions, mode: AttackMode, candidates: F) -> Result<AttackReport>
where
    F: Fn() -> I,
    I: Iterator<Item = String>,
{
    document.validate()?;
    if opts.budget < 1 {
        return Err(Error::InvalidAttack("budget must be at least 1".into()));
    }
    let params = opts.params_override.unwrap_or(document.kdf);
    params.validate()?;
    let workers = bounded_workers(opts.workers, params.memory_kib, opts.memory_budget_kib);
    let pool = Pool::new(workers);
    let started = Instant::now();
    let mut per_entry = BTreeMap::new();
    for entry in document.clear_entries() {
        let hasher = QuestionHasher::new(&entry.question, &params, document.canon)?;
        let scan = scan(&hasher, &entry.answer_hash, candidates(), opts.budget, &pool)?;
        let (rank, recovered) = match scan.found {
            Some((rank, text)) => (Some(rank), Some(text)),
            None => (None, None),
        };
        per_entry.insert(
            entry.id,
            EntryOutcome { cracked: recovered.is_some(), recovered, evaluations: scan.evaluations, rank },
        );
    }
    Ok(AttackReport::assemble(mode, per_entry, started, params, pool.workers()))
}

pub fn dictionary_attack(document: &HashmarkDocument, dictionary: &Dictionary, opts: &AttackOptions) -> Result<AttackReport> {
    run_scans(document, opts, AttackMode::Dictionary, || dictionary.items.iter().map(|i| i.text.clone()))
}

/// Dictionary attack in descending-score order.
pub fn likelihood_attack(document: &HashmarkDocument, dictionary: &Dictionary, opts: &AttackOptions) -> Result<AttackReport> {
    let order = dictionary.likelihood_order()?;
    run_scans(document, opts, AttackMode::Likelihood, || order.iter().map(|s| s.to_string()))
}

/// Every string over an alphabet up to a maximum length, shortest first and
/// lexicographic (in alphabet order) within a length.
#[derive(Debug, Clone)]
pub struct Keyspace {
    alphabet: Vec<char>,
    max_len: usize,
}

impl Keyspace {
    pub fn new(alphabet: &str, max_len: usize) -> Result<Self> {
        let mut chars: Vec<char> = Vec::new();
        for c in alphabet.chars() {
            if !chars.contains(&c) {
                chars.push(c);
            }
        }
        if chars.is_empty() {
            return Err(Error::InvalidAttack("alphabet is empty".into()));
        }
        if max_len < 1 {
            return Err(Error::InvalidAttack("max_len must be at least 1".into()));
        }
        Ok(Keyspace { alphabet: chars, max_len })
    }

    /// Number of strings, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        let base = self.alphabet.len() as u128;
        let mut total = 0u128;
        let mut power = 1u128;
        for _ in 0..self.max_len {
            power = power.saturating_mul(base);
            total = total.saturating_add(power);
        }
        total
    }

    pub fn iter(&self) -> KeyspaceIter<'_> {
        KeyspaceIter { space: self, digits: vec![0], done: false }
    }
}

pub struct KeyspaceIter<'a> {
    space: &'a Keyspace,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for KeyspaceIter<'_> {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        if self.done {
            return None;
        }
        let current = self.digits.iter().map(|&d| self.space.alphabet[d]).collect();
        let base = self.space.alphabet.len();
        let mut pos = self.digits.len();
        loop {
            if pos == 0 {
                if self.digits.len() == self.space.max_len {
                    self.done = true;
                } else {
                    self.digits = vec![0; self.digits.len() + 1];
                }
                break;
            }
            pos -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < base {
                break;
            }
            self.digits[pos] = 0;
        }
        Some(current)
    }
}

pub fn brute_force_attack(document: &HashmarkDocument, keyspace: &Keyspace, opts: &AttackOptions) -> Result<AttackReport> {
    run_scans(document, opts, AttackMode::BruteForce, || keyspace.iter())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaltContext {
    /// A salt-ignorant attacker: fixed all-zero salt.
    Unsalted,
    /// Salted exactly as the given question would be.
    Question(String),
}

impl SaltContext {
    fn hasher(&self, params: &KdfParams, canon: CanonVersion) -> Result<QuestionHasher> {
        match self {
            SaltContext::Unsalted => QuestionHasher::with_salt([0u8; 32], params, canon),
            SaltContext::Question(q) => QuestionHasher::new(q, params, canon),
        }
    }
}

/// Precomputed hash to cleartext map for one salt context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RainbowTable {
    pub salt_context: SaltContext,
    pub canon: CanonVersion,
    pub params: KdfParams,
    pub rows: BTreeMap<AnswerHash, String>,
}

impl RainbowTable {
    pub fn lookup(&self, hash: &AnswerHash) -> Option<&str> {
        self.rows.get(hash).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Recomputes every row from its cleartext.
    pub fn verify_rows(&self) -> Result<bool> {
        let hasher = self.salt_context.hasher(&self.params, self.canon)?;
        for (hash, text) in &self.rows {
            if hasher.hash(text)? != *hash {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Hashes every candidate under `salt_context`. Candidates that canonicalize
/// identically share one row, keeping the first.
pub fn build_rainbow_table(
    dictionary: &Dictionary,
    salt_context: SaltContext,
    params: &KdfParams,
    canon: CanonVersion,
    workers: usize,
) -> Result<RainbowTable> {
    let hasher = salt_context.hasher(params, canon)?;
    let texts: Vec<&str> = dictionary.items.iter().map(|i| i.text.as_str()).collect();
    let hashes = Pool::new(workers).map(&texts, |t| hasher.hash(t));
    let mut rows = BTreeMap::new();
    for (text, hash) in texts.iter().zip(hashes) {
        rows.entry(hash?).or_insert_with(|| (*text).to_owned());
    }
    Ok(RainbowTable { salt_context, canon, params: *params, rows })
}

/// Table lookups only; costs zero KDF evaluations.
pub fn rainbow_lookup(document: &HashmarkDocument, table: &RainbowTable) -> Result<AttackReport> {
    document.validate()?;
    let started = Instant::now();
    let per_entry = document
        .clear_entries()
        .map(|e| {
            let recovered = table.lookup(&e.answer_hash).map(str::to_owned);
            (e.id, EntryOutcome { cracked: recovered.is_some(), recovered, evaluations: 0, rank: None })
        })
        .collect();
    Ok(AttackReport::assemble(AttackMode::Rainbow, per_entry, started, table.params, 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub params: KdfParams,
    pub keyspace_size: f64,
    pub rate_per_minute: f64,
    pub worst_case_minutes: f64,
    pub expected_minutes: f64,
    pub assumption: String,
}

impl CostEstimate {
    pub fn worst_case_days(&self) -> f64 {
        self.worst_case_minutes / (60.0 * 24.0)
    }
}

pub fn estimate_attack_cost(params: &KdfParams, keyspace_size: f64, rate_per_minute: f64) -> Result<CostEstimate> {
    if !(keyspace_size > 0.0 && keyspace_size.is_finite()) {
        return Err(Error::InvalidAttack(format!("keyspace size must be positive, got {keyspace_size}")));
    }
    if !(rate_per_minute > 0.0 && rate_per_minute.is_finite()) {
        return Err(Error::InvalidAttack(format!("hash rate must be positive, got {rate_per_minute}")));
    }
    let worst = keyspace_size / rate_per_minute;
    Ok(CostEstimate {
        params: *params,
        keyspace_size,
        rate_per_minute,
        worst_case_minutes: worst,
        expected_minutes: worst / 2.0,
        assumption: "expected cost assumes the answer sits uniformly at random in the keyspace".into(),
    })
}
