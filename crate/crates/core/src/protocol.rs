//! The auditor-mediated workflow: round-1 collection, round-2 cross
//! answering, threshold and consensus filtering, and publication.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::canon::CanonVersion;
use crate::hashcore::{verify_answer, AnswerHash, KdfParams};
use crate::model::{
    Entry, EntryId, ExpertSubmission, HashmarkDocument, Ledger, PrivateEntry, Sensitivity, Stage, StageBody,
    UnlockMode, UnlockRule, Wire, FORMAT_VERSION,
};
use crate::stages::{derive_stage_key, seal_stage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterPolicy {
    /// Minimum number of non-abstaining responses (threshold T).
    pub min_nonempty: usize,
    /// Required share of the modal hash among non-abstaining responses.
    pub quorum: f64,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy { min_nonempty: 2, quorum: 1.0 }
    }
}

impl FilterPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.min_nonempty < 1 {
            return Err(Error::InvalidPolicy("min_nonempty must be at least 1".into()));
        }
        if !(self.quorum > 0.0 && self.quorum <= 1.0) {
            return Err(Error::InvalidPolicy(format!("quorum must lie in (0, 1], got {}", self.quorum)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Round1,
    Round2,
    Filtered,
    Published,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionRecord {
    pub id: EntryId,
    pub question: String,
    pub origin: String,
    /// Expert id to response; `None` is an abstention. The originator's
    /// round-1 hash counts as one response.
    pub responses: BTreeMap<String, Option<AnswerHash>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuplicateReport {
    pub id: EntryId,
    pub question: String,
    pub rejected_from: String,
    pub kept_from: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundState {
    pub phase: Phase,
    pub canon: CanonVersion,
    pub params: KdfParams,
    /// In round-1 submission order.
    pub experts: Vec<String>,
    pub questions: Vec<QuestionRecord>,
    pub duplicates: Vec<DuplicateReport>,
}

impl RoundState {
    pub fn origin(&self, id: &EntryId) -> Option<&str> {
        self.questions.iter().find(|q| q.id == *id).map(|q| q.origin.as_str())
    }

    /// Ledger rows for filtered entries, attributed to their originators.
    pub fn private_entries(&self, entries: &[Entry]) -> Result<Vec<PrivateEntry>> {
        entries
            .iter()
            .map(|e| {
                let contributor = self.origin(&e.id).ok_or_else(|| Error::UnknownEntry(e.id.to_hex()))?;
                Ok(PrivateEntry { entry: e.clone(), sensitivity: Sensitivity::High, contributor: contributor.to_owned() })
            })
            .collect()
    }

    fn require(&self, allowed: &[Phase], step: &str) -> Result<()> {
        if allowed.contains(&self.phase) {
            Ok(())
        } else {
            Err(Error::OutOfOrder(format!("{step} is not allowed in phase {:?}", self.phase)))
        }
    }
}

fn check_uniform(submissions: &[ExpertSubmission], canon: CanonVersion, params: &KdfParams) -> Result<()> {
    for s in submissions {
        s.validate()?;
        if s.canon != canon || s.params != *params {
            return Err(Error::Protocol(format!(
                "submission from `{}` uses different KDF params or canonicalization",
                s.expert_id
            )));
        }
    }
    Ok(())
}

pub fn collect_round1(submissions: &[ExpertSubmission]) -> Result<RoundState> {
    let first = submissions.first().ok_or_else(|| Error::Protocol("no submissions".into()))?;
    let (canon, params) = (first.canon, first.params);
    check_uniform(submissions, canon, &params)?;

    let mut experts = Vec::new();
    let mut questions: Vec<QuestionRecord> = Vec::new();
    let mut index: HashMap<EntryId, usize> = HashMap::new();
    let mut duplicates = Vec::new();
    for sub in submissions {
        if experts.contains(&sub.expert_id) {
            return Err(Error::Protocol(format!("expert `{}` submitted twice", sub.expert_id)));
        }
        if sub.items.is_empty() {
            return Err(Error::Protocol(format!("submission from `{}` has no items", sub.expert_id)));
        }
        experts.push(sub.expert_id.clone());
        for item in &sub.items {
            let id = EntryId::for_question(&item.question, canon)?;
            if let Some(&pos) = index.get(&id) {
                duplicates.push(DuplicateReport {
                    id,
                    question: item.question.clone(),
                    rejected_from: sub.expert_id.clone(),
                    kept_from: questions[pos].origin.clone(),
                });
                continue;
            }
            index.insert(id, questions.len());
            questions.push(QuestionRecord {
                id,
                question: item.question.clone(),
                origin: sub.expert_id.clone(),
                responses: BTreeMap::from([(sub.expert_id.clone(), item.answer_hash)]),
            });
        }
    }
    Ok(RoundState { phase: Phase::Round1, canon, params, experts, questions, duplicates })
}

/// Per expert, the cleartext questions contributed by everyone else.
pub fn make_round2_packets(state: &RoundState) -> Result<BTreeMap<String, Vec<String>>> {
    state.require(&[Phase::Round1], "building round-2 packets")?;
    Ok(state
        .experts
        .iter()
        .map(|expert| {
            let packet = state
                .questions
                .iter()
                .filter(|q| &q.origin != expert)
                .map(|q| q.question.clone())
                .collect();
            (expert.clone(), packet)
        })
        .collect())
}

pub fn collect_round2(state: &RoundState, submissions: &[ExpertSubmission]) -> Result<RoundState> {
    state.require(&[Phase::Round1], "collecting round 2")?;
    check_uniform(submissions, state.canon, &state.params)?;
    let index: HashMap<EntryId, usize> = state.questions.iter().enumerate().map(|(i, q)| (q.id, i)).collect();
    let mut next = state.clone();
    let mut seen_experts = HashSet::new();
    for sub in submissions {
        if !state.experts.contains(&sub.expert_id) {
            return Err(Error::Protocol(format!("`{}` did not take part in round 1", sub.expert_id)));
        }
        if !seen_experts.insert(sub.expert_id.as_str()) {
            return Err(Error::Protocol(format!("expert `{}` submitted twice", sub.expert_id)));
        }
        let mut answered = HashSet::new();
        for item in &sub.items {
            let id = EntryId::for_question(&item.question, state.canon)?;
            let pos = match index.get(&id) {
                Some(&pos) if state.questions[pos].origin != sub.expert_id => pos,
                _ => {
                    return Err(Error::Protocol(format!(
                        "`{}` answered a question outside their round-2 packet: {:?}",
                        sub.expert_id, item.question
                    )))
                }
            };
            if !answered.insert(id) {
                return Err(Error::Protocol(format!("`{}` answered {:?} twice", sub.expert_id, item.question)));
            }
            next.questions[pos].responses.insert(sub.expert_id.clone(), item.answer_hash);
        }
    }
    for q in &mut next.questions {
        for expert in &state.experts {
            q.responses.entry(expert.clone()).or_insert(None);
        }
    }
    next.phase = Phase::Round2;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Keep,
    Threshold,
    NoConsensus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionVerdict {
    pub id: EntryId,
    pub question: String,
    pub verdict: Verdict,
    pub responses: usize,
    pub nonempty: usize,
    pub modal_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub policy: FilterPolicy,
    pub kept: usize,
    pub dropped_threshold: usize,
    pub dropped_no_consensus: usize,
    pub verdicts: Vec<QuestionVerdict>,
}

/// Verdict for one question's responses, and the modal hash when kept.
pub fn judge(responses: &[Option<AnswerHash>], policy: &FilterPolicy) -> (Verdict, Option<AnswerHash>, usize) {
    let mut counts: BTreeMap<AnswerHash, usize> = BTreeMap::new();
    for h in responses.iter().flatten() {
        *counts.entry(*h).or_default() += 1;
    }
    let nonempty: usize = counts.values().sum();
    let modal_count = counts.values().copied().max().unwrap_or(0);
    if nonempty < policy.min_nonempty {
        return (Verdict::Threshold, None, modal_count);
    }
    let mut modal = counts.iter().filter(|(_, &c)| c == modal_count).map(|(h, _)| *h);
    let winner = modal.next();
    if modal.next().is_some() {
        return (Verdict::NoConsensus, None, modal_count);
    }
    if (modal_count as f64) / (nonempty as f64) >= policy.quorum {
        (Verdict::Keep, winner, modal_count)
    } else {
        (Verdict::NoConsensus, None, modal_count)
    }
}

pub fn consensus_filter(state: &RoundState, policy: &FilterPolicy) -> Result<(Vec<Entry>, FilterReport)> {
    state.require(&[Phase::Round2, Phase::Filtered], "filtering")?;
    policy.validate()?;
    let mut kept = Vec::new();
    let mut verdicts = Vec::with_capacity(state.questions.len());
    for q in &state.questions {
        let responses: Vec<Option<AnswerHash>> = q.responses.values().copied().collect();
        let (verdict, hash, modal_count) = judge(&responses, policy);
        if let Some(h) = hash {
            kept.push(Entry { id: q.id, question: q.question.clone(), answer_hash: h });
        }
        verdicts.push(QuestionVerdict {
            id: q.id,
            question: q.question.clone(),
            verdict,
            responses: responses.len(),
            nonempty: responses.iter().flatten().count(),
            modal_count,
        });
    }
    let count = |v: Verdict| verdicts.iter().filter(|q| q.verdict == v).count();
    let report = FilterReport {
        policy: *policy,
        kept: count(Verdict::Keep),
        dropped_threshold: count(Verdict::Threshold),
        dropped_no_consensus: count(Verdict::NoConsensus),
        verdicts,
    };
    Ok((kept, report))
}

/// Assignment of entries to stages, with the cleartext answers needed to
/// derive keys for sealed stages. Auditor-side input; never published.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagePlan {
    pub stages: Vec<PlannedStage>,
    #[serde(default)]
    pub answers: BTreeMap<EntryId, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannedStage {
    pub entries: Vec<EntryId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unlock: Option<UnlockRule>,
}

impl StagePlan {
    pub fn single_stage(ids: impl IntoIterator<Item = EntryId>) -> Self {
        StagePlan { stages: vec![PlannedStage { entries: ids.into_iter().collect(), unlock: None }], answers: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewReport {
    pub total_entries: usize,
    pub high_stakes: usize,
    pub decoys: usize,
    pub high_stakes_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct Composition {
    pub document: HashmarkDocument,
    pub ledger: Ledger,
    pub skew: SkewReport,
}

/// Assembles the published document. Decoys are mixed in and every stage is
/// shuffled with `rng`; sensitivity and contributors only reach the ledger.
pub fn compose_published<R: Rng + ?Sized>(
    high: Vec<PrivateEntry>,
    decoys: Vec<PrivateEntry>,
    ledger: Ledger,
    plan: Option<&StagePlan>,
    kdf: KdfParams,
    canon: CanonVersion,
    rng: &mut R,
) -> Result<Composition> {
    let labelled = high
        .into_iter()
        .map(|r| (r, Sensitivity::High))
        .chain(decoys.into_iter().map(|r| (r, Sensitivity::Decoy)));
    let mut rows: BTreeMap<EntryId, PrivateEntry> = BTreeMap::new();
    for (mut row, label) in labelled {
        row.entry.validate(canon)?;
        row.sensitivity = label;
        let id = row.entry.id;
        if rows.insert(id, row).is_some() {
            return Err(Error::DuplicateId(id.to_hex()));
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidPlan("nothing to publish".into()));
    }

    let default_plan;
    let plan = match plan {
        Some(p) => p,
        None => {
            default_plan = StagePlan::single_stage(rows.keys().copied());
            &default_plan
        }
    };
    validate_plan(plan, &rows)?;

    let answers: HashMap<EntryId, String> = plan.answers.iter().map(|(k, v)| (*k, v.clone())).collect();
    for (id, answer) in &answers {
        let row = rows.get(id).ok_or_else(|| Error::InvalidPlan(format!("answer given for unknown entry {id}")))?;
        if !verify_answer(&row.entry.question, answer, &row.entry.answer_hash, &kdf, canon)? {
            return Err(Error::InvalidPlan(format!("unlock answer for entry {id} does not match its hash")));
        }
    }

    let mut stages = Vec::with_capacity(plan.stages.len());
    for (index, planned) in plan.stages.iter().enumerate() {
        let index = index as u32;
        let mut entries: Vec<Entry> = planned.entries.iter().map(|id| rows[id].entry.clone()).collect();
        entries.shuffle(rng);
        let body = match &planned.unlock {
            None => StageBody::Clear(entries),
            Some(rule) => {
                let source_ids = &plan.stages[rule.source_stage as usize].entries;
                let key = derive_stage_key(rule, source_ids, &answers, index, &kdf, canon)?;
                let sealed = seal_stage(&entries, &key, index)?;
                StageBody::Sealed(crate::model::SealedStage {
                    ciphertext: sealed.ciphertext,
                    nonce: sealed.nonce,
                    unlock: rule.clone(),
                })
            }
        };
        stages.push(Stage { index, body });
    }
    let document = HashmarkDocument { format_version: FORMAT_VERSION.into(), canon, kdf, stages };
    document.validate()?;

    let high_stakes = rows.values().filter(|r| r.sensitivity == Sensitivity::High).count();
    let skew = SkewReport {
        total_entries: rows.len(),
        high_stakes,
        decoys: rows.len() - high_stakes,
        high_stakes_fraction: high_stakes as f64 / rows.len() as f64,
    };
    let mut ledger = ledger;
    ledger.entries.extend(rows.into_values());
    ledger.validate()?;
    Ok(Composition { document, ledger, skew })
}

fn validate_plan(plan: &StagePlan, rows: &BTreeMap<EntryId, PrivateEntry>) -> Result<()> {
    if plan.stages.is_empty() {
        return Err(Error::InvalidPlan("plan has no stages".into()));
    }
    let mut stage_of: HashMap<EntryId, usize> = HashMap::new();
    for (index, stage) in plan.stages.iter().enumerate() {
        if stage.entries.is_empty() {
            return Err(Error::InvalidPlan(format!("stage {index} has no entries")));
        }
        for id in &stage.entries {
            if !rows.contains_key(id) {
                return Err(Error::InvalidPlan(format!("stage {index} lists unknown entry {id}")));
            }
            if stage_of.insert(*id, index).is_some() {
                return Err(Error::InvalidPlan(format!("entry {id} is assigned to more than one stage")));
            }
        }
    }
    if let Some(missing) = rows.keys().find(|id| !stage_of.contains_key(id)) {
        return Err(Error::InvalidPlan(format!("entry {missing} is not assigned to any stage")));
    }
    for (index, stage) in plan.stages.iter().enumerate() {
        let Some(rule) = &stage.unlock else { continue };
        if index == 0 {
            return Err(Error::InvalidPlan("stage 0 is always cleartext".into()));
        }
        if rule.source_stage as usize >= index {
            return Err(Error::InvalidPlan(format!(
                "stage {index} unlocks from stage {}, which is not earlier",
                rule.source_stage
            )));
        }
        if let UnlockMode::Single(src) = rule.mode {
            match stage_of.get(&src) {
                Some(&s) if s == rule.source_stage as usize => {}
                Some(&s) => {
                    return Err(Error::InvalidPlan(format!(
                        "stage {index} unlock cites entry {src}, which sits in stage {s}, not {}",
                        rule.source_stage
                    )))
                }
                None => return Err(Error::InvalidPlan(format!("stage {index} unlock cites unknown entry {src}"))),
            }
        }
    }
    Ok(())
}
