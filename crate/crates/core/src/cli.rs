//! The `hashmark` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 I/O error,
//! 3 protocol step invoked out of order.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::OsRng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::attack::{
    brute_force_attack, build_rainbow_table, dictionary_attack, estimate_attack_cost, likelihood_attack,
    rainbow_lookup, AttackOptions, AttackReport, Dictionary, Keyspace, SaltContext,
};
use crate::calibrate::{self, DEFAULT_TARGET_RATE, MIN_DURATION};
use crate::canon::{is_empty_answer, CanonVersion};
use crate::config::{self, Config, ConfigFile, Overrides};
use crate::grade::{grade_with, render_report, GradeOptions, ReportFormat};
use crate::hashcore::{KdfParams, Profile, QuestionHasher};
use crate::model::{
    lint_entry, to_canonical_json, AnswerSheet, EntryId, ExpertSubmission, HashmarkDocument, Ledger,
    PrivateEntry, Sensitivity, SubmissionItem, Wire, LEDGER_FILE, SHEET_SUFFIX,
    SUBMISSION_SUFFIX,
};
use crate::protocol::{
    collect_round1, collect_round2, compose_published, consensus_filter, make_round2_packets, FilterPolicy,
    RoundState, StagePlan,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_ORDER: i32 = 3;

const ROUND1_STATE: &str = "round1.state.json";
const ROUND2_STATE: &str = "round2.state.json";
const FILTERED: &str = "filtered.json";
const FILTER_REPORT: &str = "filter.report.json";
const SKEW_REPORT: &str = "skew.json";

#[derive(Debug, Parser)]
#[command(name = "hashmark", version, about = "Build, grade and attack hashmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Config file (default: ./hashmark.toml when present)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// KDF profile: secure | test
    #[arg(long, global = true)]
    pub profile: Option<String>,
    #[arg(long, global = true)]
    pub memory_kib: Option<u32>,
    #[arg(long, global = true)]
    pub iterations: Option<u32>,
    #[arg(long, global = true)]
    pub parallelism: Option<u32>,
    /// Canonicalization version
    #[arg(long, global = true)]
    pub canon: Option<String>,
    /// Worker threads for grading and attacks
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Memory cap across concurrent KDF evaluations, in KiB
    #[arg(long, global = true)]
    pub memory_budget_kib: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hash an expert's question/answer pairs into a submission file
    Contribute {
        /// JSON array of {"question": ..., "answer": ...}; blank or null answers abstain
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        expert: String,
        /// Round-2 packet this file answers; unanswered packet questions become abstentions
        #[arg(long)]
        packet: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Auditor workflow over a run directory
    Auditor {
        #[command(subcommand)]
        step: AuditorStep,
    },
    /// Grade an answer sheet against a published document
    Grade {
        #[arg(long)]
        doc: PathBuf,
        #[arg(long)]
        sheet: PathBuf,
        /// Report file (JSON)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Format printed to stdout
        #[arg(long, default_value = "text")]
        format: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Attack a published document
    Attack {
        mode: AttackModeArg,
        #[arg(long)]
        doc: PathBuf,
        /// Candidate file: one per line, optional tab-separated score
        #[arg(long)]
        dict: Option<PathBuf>,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long)]
        max_len: Option<usize>,
        /// Rainbow mode: build the table for this question (default: unsalted)
        #[arg(long)]
        context_question: Option<String>,
        /// Maximum KDF evaluations per entry
        #[arg(long, default_value_t = u64::MAX)]
        budget: u64,
        /// Hash with the configured profile instead of the document's params
        #[arg(long)]
        override_params: bool,
        /// Hash rate (per minute) used to project the cost of the secure profile
        #[arg(long, default_value_t = DEFAULT_TARGET_RATE)]
        rate: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Measure KDF throughput on this machine
    Calibrate {
        /// Seconds to measure for (at least 5)
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        /// Target hashes per minute for the iteration suggestion
        #[arg(long, default_value_t = DEFAULT_TARGET_RATE)]
        target_rate: f64,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Decode and validate a document, submission, sheet or ledger
    Validate {
        file: PathBuf,
        #[arg(long)]
        kind: Option<FileKind>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AttackModeArg {
    Dict,
    Likelihood,
    Brute,
    Rainbow,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FileKind {
    Document,
    Submission,
    Sheet,
    Ledger,
}

#[derive(Debug, Subcommand)]
pub enum AuditorStep {
    /// Collect round-1 or round-2 submissions
    Collect {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        round: u8,
        #[arg(required = true)]
        submissions: Vec<PathBuf>,
    },
    /// Write round-2 packets (round2.<expert>.json)
    Packets {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply threshold and consensus filtering
    Filter {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_nonempty: usize,
        #[arg(long, default_value_t = 1.0)]
        quorum: f64,
    },
    /// Compose and write the published document and private ledger
    Publish {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Auditor-authored decoy submissions
        #[arg(long)]
        decoys: Vec<PathBuf>,
        /// Ledger path (default: <run>/ledger.json)
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Seed for the entry shuffle (tests only; seal nonces are always random)
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Order(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Order(_) => EXIT_ORDER,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Order(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfOrder(_) => Failure::Order(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CmdResult<T = ()> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Contribute { input, expert, packet, out, cfg } => contribute(&input, &expert, packet.as_deref(), out, &cfg),
        Command::Auditor { step } => auditor(step),
        Command::Grade { doc, sheet, out, format, cfg } => grade_cmd(&doc, &sheet, out.as_deref(), &format, &cfg),
        Command::Attack { mode, doc, dict, alphabet, max_len, context_question, budget, override_params, rate, out, cfg } => {
            attack_cmd(AttackArgs { mode, doc, dict, alphabet, max_len, context_question, budget, override_params, rate, out }, &cfg)
        }
        Command::Calibrate { duration, target_rate, cfg } => calibrate_cmd(duration, target_rate, &cfg),
        Command::Validate { file, kind } => validate_cmd(&file, kind),
    }
}

fn resolve_config(args: &ConfigArgs) -> CmdResult<Config> {
    let file = match &args.config {
        Some(path) => Some(
            ConfigFile::load(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?
                .ok_or_else(|| Failure::Io(format!("{}: not found", path.display())))?,
        ),
        None => ConfigFile::load(Path::new(config::DEFAULT_CONFIG_FILE))
            .map_err(|e| Failure::Io(format!("{}: {e}", config::DEFAULT_CONFIG_FILE)))?,
    };
    let env = std::env::var(config::PROFILE_ENV).ok();
    let flags = Overrides {
        profile: args.profile.clone(),
        memory_kib: args.memory_kib,
        iterations: args.iterations,
        parallelism: args.parallelism,
        canon: args.canon.clone(),
        workers: args.workers,
        memory_budget_kib: args.memory_budget_kib,
    };
    Ok(config::resolve(&flags, env.as_deref(), file.as_ref())?)
}

fn read(path: &Path) -> CmdResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> CmdResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_private(path: &Path, bytes: &[u8]) -> CmdResult {
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut f = opts.open(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

fn decode<T: Wire>(path: &Path) -> CmdResult<T> {
    T::decode(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CmdResult<T> {
    serde_json::from_slice(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn json_bytes<T: Serialize>(value: &T) -> CmdResult<Vec<u8>> {
    Ok(to_canonical_json(value)?)
}

fn note_output(kind: &str) {
    eprintln!("[output: {kind}]");
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Pair {
    question: String,
    #[serde(default)]
    answer: Option<String>,
}

fn contribute(input: &Path, expert: &str, packet: Option<&Path>, out: Option<PathBuf>, cfg: &ConfigArgs) -> CmdResult {
    let config = resolve_config(cfg)?;
    let pairs: Vec<Pair> = read_json(input)?;
    let canon = config.canon;

    let mut pairs = pairs;
    if let Some(packet) = packet {
        let questions: Vec<String> = read_json(packet)?;
        let allowed: BTreeMap<EntryId, &String> = questions
            .iter()
            .map(|q| EntryId::for_question(q, canon).map(|id| (id, q)))
            .collect::<Result<_, _>>()?;
        let mut answered = Vec::new();
        for p in &pairs {
            let id = EntryId::for_question(&p.question, canon)?;
            if !allowed.contains_key(&id) {
                return Err(Failure::Usage(format!("question not in packet: {:?}", p.question)));
            }
            answered.push(id);
        }
        for (id, q) in &allowed {
            if !answered.contains(id) {
                pairs.push(Pair { question: (*q).clone(), answer: None });
            }
        }
    } else if pairs.iter().all(|p| is_empty_answer(p.answer.as_deref().unwrap_or(""), canon)) {
        return Err(Failure::Usage("every answer is blank; nothing to contribute".into()));
    }

    let mut items = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let answer = p.answer.as_deref().unwrap_or("");
        for w in lint_entry(&p.question, answer, canon) {
            eprintln!("warning: {:?}: {w}", p.question);
        }
        let hasher = QuestionHasher::new(&p.question, &config.params, canon)?;
        items.push(SubmissionItem { question: p.question.clone(), answer_hash: hasher.try_hash(answer)? });
    }
    let submission = ExpertSubmission { expert_id: expert.to_owned(), canon, params: config.params, items };
    let out = out.unwrap_or_else(|| PathBuf::from(format!("{expert}{SUBMISSION_SUFFIX}")));
    write(&out, &submission.encode()?)?;
    eprintln!("wrote {} ({} items)", out.display(), submission.items.len());
    note_output("deterministic");
    Ok(())
}

/// Published entries that survived filtering, with their originators.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilteredSet {
    canon: CanonVersion,
    kdf: KdfParams,
    entries: Vec<PrivateEntry>,
}

fn load_state(run: &Path, file: &str, step: &str) -> CmdResult<RoundState> {
    let path = run.join(file);
    if !path.exists() {
        return Err(Failure::Order(format!("{step} needs {} (run the earlier auditor step first)", path.display())));
    }
    read_json(&path)
}

fn safe_expert_id(id: &str) -> bool {
    !id.is_empty() && !id.starts_with('.') && id.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
}

fn auditor(step: AuditorStep) -> CmdResult {
    match step {
        AuditorStep::Collect { run, round, submissions } => {
            let subs = submissions.iter().map(|p| decode::<ExpertSubmission>(p)).collect::<CmdResult<Vec<_>>>()?;
            let state = if round == 1 {
                let state = collect_round1(&subs)?;
                for d in &state.duplicates {
                    eprintln!("duplicate question from `{}` (kept `{}`'s): {:?}", d.rejected_from, d.kept_from, d.question);
                }
                write(&run.join(ROUND1_STATE), &json_bytes(&state)?)?;
                state
            } else {
                let round1 = load_state(&run, ROUND1_STATE, "collecting round 2")?;
                let state = collect_round2(&round1, &subs)?;
                write(&run.join(ROUND2_STATE), &json_bytes(&state)?)?;
                state
            };
            eprintln!("round {round}: {} experts, {} questions", state.experts.len(), state.questions.len());
            note_output("deterministic");
        }
        AuditorStep::Packets { run, out } => {
            let state = load_state(&run, ROUND1_STATE, "building packets")?;
            let out = out.unwrap_or_else(|| run.clone());
            for (expert, questions) in make_round2_packets(&state)? {
                if !safe_expert_id(&expert) {
                    return Err(Failure::Usage(format!("expert id {expert:?} cannot be used in a file name")));
                }
                write(&out.join(format!("round2.{expert}.json")), &json_bytes(&questions)?)?;
            }
            note_output("deterministic");
        }
        AuditorStep::Filter { run, min_nonempty, quorum } => {
            let state = load_state(&run, ROUND2_STATE, "filtering")?;
            let policy = FilterPolicy { min_nonempty, quorum };
            let (kept, report) = consensus_filter(&state, &policy)?;
            let filtered = FilteredSet { canon: state.canon, kdf: state.params, entries: state.private_entries(&kept)? };
            write(&run.join(FILTER_REPORT), &json_bytes(&report)?)?;
            write(&run.join(FILTERED), &json_bytes(&filtered)?)?;
            println!(
                "kept {} / dropped {} below threshold / dropped {} without consensus",
                report.kept, report.dropped_threshold, report.dropped_no_consensus
            );
            note_output("deterministic");
        }
        AuditorStep::Publish { run, out, plan, decoys, ledger, seed } => {
            let filtered_path = run.join(FILTERED);
            if !filtered_path.exists() {
                return Err(Failure::Order(format!("publishing needs {} (run `auditor filter` first)", filtered_path.display())));
            }
            let filtered: FilteredSet = read_json(&filtered_path)?;
            let plan: Option<StagePlan> = plan.as_deref().map(read_json).transpose()?;
            let mut decoy_rows = Vec::new();
            for path in &decoys {
                let sub: ExpertSubmission = decode(path)?;
                if sub.params != filtered.kdf || sub.canon != filtered.canon {
                    return Err(Failure::Usage(format!("{}: decoys must use the document's KDF params and canon", path.display())));
                }
                for item in &sub.items {
                    let Some(hash) = item.answer_hash else { continue };
                    decoy_rows.push(PrivateEntry {
                        entry: crate::model::Entry::new(item.question.clone(), hash, sub.canon)?,
                        sensitivity: Sensitivity::Decoy,
                        contributor: sub.expert_id.clone(),
                    });
                }
            }
            let composition = match seed {
                Some(seed) => compose_published(
                    filtered.entries,
                    decoy_rows,
                    Ledger::default(),
                    plan.as_ref(),
                    filtered.kdf,
                    filtered.canon,
                    &mut ChaCha20Rng::seed_from_u64(seed),
                ),
                None => compose_published(
                    filtered.entries,
                    decoy_rows,
                    Ledger::default(),
                    plan.as_ref(),
                    filtered.kdf,
                    filtered.canon,
                    &mut OsRng,
                ),
            }?;
            write(&out, &composition.document.encode()?)?;
            let ledger_path = ledger.unwrap_or_else(|| run.join(LEDGER_FILE));
            write_private(&ledger_path, &composition.ledger.encode()?)?;
            write(&run.join(SKEW_REPORT), &json_bytes(&composition.skew)?)?;
            println!(
                "published {} entries in {} stage(s); high-stakes fraction {:.2} (auditor only)",
                composition.skew.total_entries,
                composition.document.stages.len(),
                composition.skew.high_stakes_fraction
            );
            let sealed = composition.document.stages.iter().any(|s| s.sealed().is_some());
            note_output(if sealed {
                "randomized (seal nonces)"
            } else if seed.is_some() {
                "deterministic"
            } else {
                "randomized (entry shuffle)"
            });
        }
    }
    Ok(())
}

fn grade_cmd(doc: &Path, sheet: &Path, out: Option<&Path>, format: &str, cfg: &ConfigArgs) -> CmdResult {
    let format: ReportFormat = format.parse()?;
    let config = resolve_config(cfg)?;
    let document: HashmarkDocument = decode(doc)?;
    let sheet: AnswerSheet = decode(sheet)?;
    let opts = GradeOptions { workers: config.workers, memory_budget_kib: config.memory_budget_kib };
    let report = grade_with(&document, &sheet, &opts)?;
    if let Some(out) = out {
        write(out, &render_report(&report, ReportFormat::Json)?)?;
    }
    std::io::stdout()
        .write_all(&render_report(&report, format)?)
        .map_err(|e| Failure::Io(e.to_string()))?;
    note_output("deterministic (except kdf timing)");
    Ok(())
}

struct AttackArgs {
    mode: AttackModeArg,
    doc: PathBuf,
    dict: Option<PathBuf>,
    alphabet: Option<String>,
    max_len: Option<usize>,
    context_question: Option<String>,
    budget: u64,
    override_params: bool,
    rate: f64,
    out: Option<PathBuf>,
}

fn load_dictionary(path: Option<&Path>) -> CmdResult<Dictionary> {
    let path = path.ok_or_else(|| Failure::Usage("this mode needs --dict".into()))?;
    let text = String::from_utf8(read(path)?).map_err(|_| Failure::Usage(format!("{}: not UTF-8", path.display())))?;
    Ok(Dictionary::parse(&text)?)
}

fn attack_cmd(args: AttackArgs, cfg: &ConfigArgs) -> CmdResult {
    let config = resolve_config(cfg)?;
    let document: HashmarkDocument = decode(&args.doc)?;
    let opts = AttackOptions {
        params_override: args.override_params.then_some(config.params),
        budget: args.budget,
        workers: config.workers,
        memory_budget_kib: config.memory_budget_kib,
    };
    let (report, keyspace): (AttackReport, f64) = match args.mode {
        AttackModeArg::Dict => {
            let dict = load_dictionary(args.dict.as_deref())?;
            (dictionary_attack(&document, &dict, &opts)?, dict.len() as f64)
        }
        AttackModeArg::Likelihood => {
            let dict = load_dictionary(args.dict.as_deref())?;
            (likelihood_attack(&document, &dict, &opts)?, dict.len() as f64)
        }
        AttackModeArg::Brute => {
            let alphabet = args.alphabet.ok_or_else(|| Failure::Usage("brute mode needs --alphabet".into()))?;
            let max_len = args.max_len.ok_or_else(|| Failure::Usage("brute mode needs --max-len".into()))?;
            let ks = Keyspace::new(&alphabet, max_len)?;
            (brute_force_attack(&document, &ks, &opts)?, ks.size() as f64)
        }
        AttackModeArg::Rainbow => {
            let dict = load_dictionary(args.dict.as_deref())?;
            let context = match args.context_question {
                Some(q) => SaltContext::Question(q),
                None => SaltContext::Unsalted,
            };
            let params = opts.params_override.unwrap_or(document.kdf);
            let table = build_rainbow_table(&dict, context, &params, document.canon, config.workers)?;
            (rainbow_lookup(&document, &table)?, dict.len() as f64)
        }
    };
    if let Some(out) = &args.out {
        write(out, &json_bytes(&report)?)?;
    }
    let secure = Profile::Secure.params();
    let cost = estimate_attack_cost(&secure, keyspace, args.rate)?;
    println!("mode             {:?}", report.mode);
    println!("cracked          {}/{}", report.cracked_count, report.total_entries);
    println!("evaluations      {}", report.total_evaluations);
    println!("wall time        {:.3} s", report.wall_time);
    println!("workers          {}", report.workers);
    println!(
        "secure profile   {:.1} days worst case, {:.1} days expected per entry at {} hash/min ({})",
        cost.worst_case_days(),
        cost.worst_case_days() / 2.0,
        args.rate,
        cost.assumption
    );
    note_output(if report.workers > 1 { "deterministic cracks, parallel evaluation counts" } else { "deterministic (except wall time)" });
    Ok(())
}

fn calibrate_cmd(duration: f64, target_rate: f64, cfg: &ConfigArgs) -> CmdResult {
    if duration.is_nan() || duration < MIN_DURATION.as_secs_f64() {
        return Err(Failure::Usage(format!("--duration must be at least {} seconds", MIN_DURATION.as_secs())));
    }
    let config = resolve_config(cfg)?;
    let measured = calibrate::measure(&config.params, Duration::from_secs_f64(duration))?;
    let suggestion = calibrate::suggest_iterations(&measured, target_rate)?;
    println!("params           {}", serde_json::to_string(&config.params).map_err(Error::from)?);
    println!("hashes           {} in {:.2} s", measured.hashes, measured.elapsed_secs);
    println!("rate             {:.3} hashes/minute", measured.rate_per_minute);
    println!(
        "suggestion       iterations = {} at memory_kib = {} for {} hash/min",
        suggestion.iterations, suggestion.memory_kib, suggestion.target_rate_per_minute
    );
    note_output("measurement");
    Ok(())
}

fn validate_cmd(file: &Path, kind: Option<FileKind>) -> CmdResult {
    let name = file.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let kind = kind.unwrap_or(if name.ends_with(SUBMISSION_SUFFIX) {
        FileKind::Submission
    } else if name.ends_with(SHEET_SUFFIX) {
        FileKind::Sheet
    } else if name == LEDGER_FILE {
        FileKind::Ledger
    } else {
        FileKind::Document
    });
    let summary = match kind {
        FileKind::Document => {
            let d: HashmarkDocument = decode(file)?;
            format!("document: {} stage(s), {} cleartext entries", d.stages.len(), d.clear_entries().count())
        }
        FileKind::Submission => {
            let s: ExpertSubmission = decode(file)?;
            format!("submission from `{}`: {} items", s.expert_id, s.items.len())
        }
        FileKind::Sheet => format!("sheet: {} items", decode::<AnswerSheet>(file)?.items.len()),
        FileKind::Ledger => format!("ledger: {} entries", decode::<Ledger>(file)?.entries.len()),
    };
    println!("ok: {summary}");
    Ok(())
}
