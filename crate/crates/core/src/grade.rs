//! Grading answer sheets against a published document, unlocking sealed
//! stages as their source answers are verified.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::canon::is_empty_answer;
use crate::hashcore::QuestionHasher;
use crate::model::{AnswerSheet, Entry, EntryId, HashmarkDocument, SealedStage, UnlockMode, Wire};
use crate::par::{bounded_workers, Pool};
use crate::stages::{derive_stage_key, unseal_stage, SealedPayload};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryResult {
    pub matched: bool,
    pub abstained: bool,
    pub stage: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSummary {
    pub index: u32,
    pub unlocked: bool,
    pub entries: usize,
    pub matched: usize,
    pub abstained: usize,
}

/// Binary per-entry outcome of grading one sheet. Entries of stages that
/// stayed locked appear nowhere, neither in the numerator nor the
/// denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreReport {
    pub per_entry: BTreeMap<EntryId, EntryResult>,
    pub total_entries: usize,
    pub matched_count: usize,
    pub abstained_count: usize,
    pub score: f64,
    pub stages_unlocked: usize,
    pub stages: Vec<StageSummary>,
    /// Sheet items that matched no entry of an unlocked stage.
    pub unresolved_items: usize,
    /// Summed wall time spent inside the KDF.
    pub kdf_seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GradeOptions {
    pub workers: usize,
    pub memory_budget_kib: Option<u64>,
}

impl Default for GradeOptions {
    fn default() -> Self {
        GradeOptions { workers: 1, memory_budget_kib: None }
    }
}

pub fn grade(document: &HashmarkDocument, sheet: &AnswerSheet) -> Result<ScoreReport> {
    grade_with(document, sheet, &GradeOptions::default())
}

pub fn grade_with(document: &HashmarkDocument, sheet: &AnswerSheet, opts: &GradeOptions) -> Result<ScoreReport> {
    document.validate()?;
    sheet.validate()?;
    let canon = document.canon;
    let params = document.kdf;

    let mut candidates: HashMap<EntryId, Option<String>> = HashMap::new();
    for item in &sheet.items {
        let id = item.resolve(canon)?;
        if candidates.insert(id, item.candidate.clone()).is_some() {
            return Err(Error::InvalidSheet(format!("entry {id} is answered more than once")));
        }
    }

    let pool = Pool::new(bounded_workers(opts.workers, params.memory_kib, opts.memory_budget_kib));
    let mut opened: Vec<Option<Vec<Entry>>> =
        document.stages.iter().map(|s| s.entries().map(<[Entry]>::to_vec)).collect();
    let mut graded = vec![false; opened.len()];
    let mut known: HashSet<EntryId> = document.clear_entries().map(|e| e.id).collect();
    let mut per_entry = BTreeMap::new();
    let mut kdf_seconds = 0.0;

    loop {
        for (index, entries) in opened.iter().enumerate() {
            let Some(entries) = entries else { continue };
            if graded[index] {
                continue;
            }
            graded[index] = true;
            let outcomes = pool.map(entries, |e| -> Result<(bool, bool, f64)> {
                let candidate = candidates.get(&e.id).and_then(|c| c.as_deref()).unwrap_or("");
                if is_empty_answer(candidate, canon) {
                    return Ok((false, true, 0.0));
                }
                let start = Instant::now();
                let matched = QuestionHasher::new(&e.question, &params, canon)?.verify(candidate, &e.answer_hash)?;
                Ok((matched, false, start.elapsed().as_secs_f64()))
            });
            for (e, outcome) in entries.iter().zip(outcomes) {
                let (matched, abstained, secs) = outcome?;
                kdf_seconds += secs;
                per_entry.insert(e.id, EntryResult { matched, abstained, stage: index as u32 });
            }
        }

        let mut progressed = false;
        for (index, stage) in document.stages.iter().enumerate() {
            let Some(sealed) = stage.sealed() else { continue };
            if opened[index].is_some() {
                continue;
            }
            let Some(source) = &opened[sealed.unlock.source_stage as usize] else { continue };
            let needed: Vec<EntryId> = match sealed.unlock.mode {
                UnlockMode::Single(id) => vec![id],
                UnlockMode::Concat => source.iter().map(|e| e.id).collect(),
            };
            if !needed.iter().all(|id| per_entry.get(id).is_some_and(|r: &EntryResult| r.matched)) {
                continue;
            }
            let start = Instant::now();
            let entries = open_stage(document, sealed, index as u32, source, &candidates)?;
            kdf_seconds += start.elapsed().as_secs_f64();
            for e in &entries {
                if !known.insert(e.id) {
                    return Err(Error::DuplicateId(e.id.to_hex()));
                }
            }
            opened[index] = Some(entries);
            progressed = true;
        }
        if !progressed {
            break;
        }
    }

    // With a stage still locked, unresolved items may belong to it.
    let mut unresolved: Vec<&EntryId> = candidates.keys().filter(|id| !known.contains(id)).collect();
    unresolved.sort();
    if let Some(unknown) = unresolved.first() {
        if opened.iter().all(Option::is_some) {
            return Err(Error::UnknownEntry(unknown.to_hex()));
        }
    }
    let unresolved_items = unresolved.len();

    let stages: Vec<StageSummary> = opened
        .iter()
        .enumerate()
        .map(|(index, entries)| {
            let results: Vec<&EntryResult> = entries
                .iter()
                .flatten()
                .map(|e| &per_entry[&e.id])
                .collect();
            StageSummary {
                index: index as u32,
                unlocked: entries.is_some(),
                entries: results.len(),
                matched: results.iter().filter(|r| r.matched).count(),
                abstained: results.iter().filter(|r| r.abstained).count(),
            }
        })
        .collect();
    let total_entries = per_entry.len();
    let matched_count = per_entry.values().filter(|r| r.matched).count();
    let abstained_count = per_entry.values().filter(|r| r.abstained).count();
    Ok(ScoreReport {
        score: matched_count as f64 / total_entries as f64,
        per_entry,
        total_entries,
        matched_count,
        abstained_count,
        stages_unlocked: stages.iter().filter(|s| s.unlocked).count(),
        stages,
        unresolved_items,
        kdf_seconds,
    })
}

fn open_stage(
    document: &HashmarkDocument,
    sealed: &SealedStage,
    index: u32,
    source: &[Entry],
    candidates: &HashMap<EntryId, Option<String>>,
) -> Result<Vec<Entry>> {
    let answers: HashMap<EntryId, String> = candidates
        .iter()
        .filter_map(|(id, c)| c.as_ref().map(|c| (*id, c.clone())))
        .collect();
    let source_ids: Vec<EntryId> = source.iter().map(|e| e.id).collect();
    let key = derive_stage_key(&sealed.unlock, &source_ids, &answers, index, &document.kdf, document.canon)?;
    let payload = SealedPayload { ciphertext: sealed.ciphertext.clone(), nonce: sealed.nonce };
    unseal_stage(&payload, &key, index, document.canon).map_err(|e| match e {
        // verified answers produce the right key, so this is a broken document
        Error::Authentication(i) => {
            Error::InvalidDocument(format!("stage {i} does not open with answers that match their hashes"))
        }
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::UnknownFormat(other.to_owned())),
        }
    }
}

pub fn render_report(report: &ScoreReport, format: ReportFormat) -> Result<Vec<u8>> {
    if report.total_entries == 0 {
        return Err(Error::EmptyReport);
    }
    match format {
        ReportFormat::Json => crate::model::to_canonical_json(report),
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "score: {:.3} ({}/{})", report.score, report.matched_count, report.total_entries);
            let _ = writeln!(out, "abstained: {}", report.abstained_count);
            let _ = writeln!(out, "stages unlocked: {}/{}", report.stages_unlocked, report.stages.len());
            for s in &report.stages {
                if s.unlocked {
                    let _ = writeln!(
                        out,
                        "  stage {}: {}/{} matched, {} abstained",
                        s.index, s.matched, s.entries, s.abstained
                    );
                } else {
                    let _ = writeln!(out, "  stage {}: locked", s.index);
                }
            }
            let _ = writeln!(out, "kdf time: {:.3} s", report.kdf_seconds);
            Ok(out.into_bytes())
        }
    }
}
