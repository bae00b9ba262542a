#![allow(dead_code)]

use hashmark::canon::CanonVersion;
use hashmark::hashcore::{hash_answer, KdfParams, Profile, QuestionHasher};
use hashmark::model::{Entry, ExpertSubmission, HashmarkDocument, Stage, StageBody, SubmissionItem, FORMAT_VERSION};

pub const C: CanonVersion = CanonVersion::C1;

pub fn test_params() -> KdfParams {
    Profile::Test.params()
}

/// One expert's hashed submission; `None` answers abstain.
pub fn submission(expert: &str, pairs: &[(String, Option<String>)]) -> ExpertSubmission {
    let p = test_params();
    ExpertSubmission {
        expert_id: expert.to_owned(),
        canon: C,
        params: p,
        items: pairs
            .iter()
            .map(|(q, a)| SubmissionItem {
                question: q.clone(),
                answer_hash: a.as_ref().and_then(|a| QuestionHasher::new(q, &p, C).unwrap().try_hash(a).unwrap()),
            })
            .collect(),
    }
}

pub fn single_stage_doc(qa: &[(String, String)]) -> HashmarkDocument {
    let p = test_params();
    let entries = qa
        .iter()
        .map(|(q, a)| Entry::new(q.clone(), hash_answer(q, a, &p, C).unwrap(), C).unwrap())
        .collect();
    HashmarkDocument {
        format_version: FORMAT_VERSION.into(),
        canon: C,
        kdf: p,
        stages: vec![Stage { index: 0, body: StageBody::Clear(entries) }],
    }
}

pub fn report_line(n: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {n} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
