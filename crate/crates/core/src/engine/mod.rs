//! The three generation workflows.
//!
//! Every workflow starts with one feedback-loop *run*: the generation model
//! receives few-shot examples and produces rows, a second model criticizes
//! them, and the critique is fed back as the next user turn. The workflows
//! differ in what happens once that run is complete:
//!
//! * [`Method::SynthLoop`] restarts with fresh histories and new few-shots;
//! * [`Method::ReducedLoop`] resubmits the final generation request as is;
//! * [`Method::PromptRefine`] asks a third model to condense the history into
//!   a standalone prompt, then reuses it with new few-shots each call.
//!
//! Only the rows of the final generation turn of a run are kept; earlier
//! turns are parsed and counted but serve the feedback loop only.

mod manifest;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{class_groups, profile, sample_few_shots, DatasetError, DatasetProfile, Table};
use crate::llmlink::{
    complete, request_digest, ChatBackend, CompletionParams, Conversation, LlmError, Role,
};
use crate::promptkit::{PromptError, PromptKit, PromptVariant, FEW_SHOTS_TOKEN};
use crate::rowcodec::{serialize, CodecError, ParseReport, RowParser, SerializedBlock};

pub use manifest::{RunManifest, MANIFEST_VERSION};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    SynthLoop,
    ReducedLoop,
    PromptRefine,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::SynthLoop => "synthloop",
            Method::ReducedLoop => "reducedloop",
            Method::PromptRefine => "promptrefine",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "synthloop" => Ok(Method::SynthLoop),
            "reducedloop" => Ok(Method::ReducedLoop),
            "promptrefine" => Ok(Method::PromptRefine),
            _ => Err(format!("unknown method '{s}' (expected synthloop, reducedloop or promptrefine)")),
        }
    }
}

/// Every meta-parameter of a generation job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    /// Generation turns per run.
    pub iterations: usize,
    /// Few-shot rows drawn for each class.
    pub per_class_shots: usize,
    /// Rows requested from the generation model in each call.
    pub n_requested_per_call: usize,
    /// Rows to collect before stopping.
    pub n_total_target: usize,
    pub variant: PromptVariant,
    pub gen_params: CompletionParams,
    pub fb_params: CompletionParams,
    pub summary_params: CompletionParams,
    pub seed: u64,
    /// Cap on runs (SynthLoop) or on follow-up calls (the other methods).
    /// Defaults to `ceil(4 * n_total_target / n_requested_per_call)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_runs: Option<usize>,
    /// Independent runs or calls executed concurrently.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::SynthLoop,
            iterations: 3,
            per_class_shots: 20,
            n_requested_per_call: 2500,
            n_total_target: 2500,
            variant: PromptVariant::default(),
            gen_params: CompletionParams::generation(),
            fb_params: CompletionParams::feedback(),
            summary_params: CompletionParams::feedback(),
            seed: 0,
            max_runs: None,
            jobs: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let positive = [
            ("iterations", self.iterations),
            ("per_class_shots", self.per_class_shots),
            ("n_requested_per_call", self.n_requested_per_call),
            ("n_total_target", self.n_total_target),
            ("jobs", self.jobs),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(EngineError::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.max_runs == Some(0) {
            return Err(EngineError::InvalidConfig("max_runs must be at least 1".into()));
        }
        for (name, p) in [("gen_params", &self.gen_params), ("fb_params", &self.fb_params), ("summary_params", &self.summary_params)] {
            if !(p.temperature >= 0.0 && p.temperature.is_finite()) {
                return Err(EngineError::InvalidConfig(format!("{name}.temperature must be a non-negative number")));
            }
            if p.max_tokens == 0 {
                return Err(EngineError::InvalidConfig(format!("{name}.max_tokens must be at least 1")));
            }
        }
        Ok(())
    }

    /// Maximum number of runs or follow-up calls.
    pub fn call_cap(&self) -> usize {
        self.max_runs
            .unwrap_or_else(|| (4 * self.n_total_target).div_ceil(self.n_requested_per_call.max(1)))
            .max(1)
    }
}

/// Which kind of LLM call a log entry refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// A generation turn inside a feedback-loop run.
    Generation,
    /// An analysis turn of the feedback model.
    Feedback,
    /// ReducedLoop resubmission of the final generation request.
    Resubmission,
    /// Prompt-Refine condensation of the generation history.
    Summary,
    /// Prompt-Refine generation with the refined prompt.
    Refined,
}

/// One LLM request. `run` is the run index for feedback-loop phases and the
/// call index for follow-up phases; `turn` is 1-based within a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub phase: Phase,
    pub run: usize,
    pub turn: usize,
    pub digest: String,
}

/// Parse statistics of one generation output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseSummary {
    pub phase: Phase,
    pub run: usize,
    pub turn: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub coerced: usize,
    /// Whether these rows are part of the output.
    pub kept: bool,
    pub rejected_by_reason: BTreeMap<String, usize>,
}

impl ParseSummary {
    fn new(phase: Phase, run: usize, turn: usize, report: &ParseReport, kept: bool) -> Self {
        let mut rejected_by_reason = BTreeMap::new();
        for r in &report.rejected {
            *rejected_by_reason.entry(r.reason.to_string()).or_default() += 1;
        }
        Self {
            phase,
            run,
            turn,
            accepted: report.accepted.len(),
            rejected: report.rejected.len(),
            coerced: report.coerced_count,
            kept,
            rejected_by_reason,
        }
    }
}

/// State of one feedback-loop run.
#[derive(Debug, Clone)]
pub struct RunState {
    pub gen_history: Conversation,
    pub fb_history: Conversation,
    /// Rows of the final generation turn, in the dataset's column order.
    pub accumulated: Table,
    pub round_index: usize,
    pub call_log: Vec<CallRecord>,
    pub parse_reports: Vec<ParseSummary>,
    /// The few-shot block shown in the initial prompt.
    pub few_shots: SerializedBlock,
}

/// The summary model's prompt, with the few-shot token still in place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinedPrompt {
    pub template: String,
    /// The summary omitted the token and a few-shot section was appended.
    pub placeholder_appended: bool,
}

impl RefinedPrompt {
    pub fn fill(&self, few_shots: &SerializedBlock) -> String {
        self.template.replace(FEW_SHOTS_TOKEN, &few_shots.text)
    }
}

#[derive(Debug, Clone)]
pub struct GenerationResult {
    pub method: Method,
    /// Kept rows, cut down to the target count.
    pub synthetic: Table,
    /// Kept rows before cutting down to the target.
    pub n_generated: usize,
    pub parse_reports: Vec<ParseSummary>,
    pub refined_prompt: Option<RefinedPrompt>,
    pub runs_executed: usize,
    /// Follow-up calls (resubmissions or refined-prompt generations).
    pub follow_up_calls: usize,
    pub rejected_total: usize,
    /// The call cap was hit before the target was reached.
    pub truncated: bool,
    pub call_log: Vec<CallRecord>,
    /// Generation and feedback histories of every run, in run order.
    pub histories: Vec<(Conversation, Conversation)>,
}

impl GenerationResult {
    /// Kept rows per phase.
    pub fn rows_by_phase(&self) -> BTreeMap<Phase, usize> {
        let mut out = BTreeMap::new();
        for r in self.parse_reports.iter().filter(|r| r.kept) {
            *out.entry(r.phase).or_default() += r.accepted;
        }
        out
    }

    pub fn rejected_by_phase(&self) -> BTreeMap<Phase, usize> {
        let mut out = BTreeMap::new();
        for r in &self.parse_reports {
            *out.entry(r.phase).or_default() += r.rejected;
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training table is empty")]
    EmptyTrain,
    #[error("class '{0}' has no row in the training data")]
    MissingClass(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{phase:?} call (run {run}, turn {turn}) failed: {source}")]
    Backend {
        phase: Phase,
        run: usize,
        turn: usize,
        #[source]
        source: LlmError,
    },
    #[error("{phase:?} output (run {run}, turn {turn}) has no valid row: {rejected} lines rejected; output starts with {preview:?}")]
    EmptyGeneration { phase: Phase, run: usize, turn: usize, rejected: usize, preview: String },
    #[error("the summary model returned an empty prompt")]
    EmptySummary,
}

/// Renders a generation history for the summary model, labelling each turn.
pub fn history_text(gen_history: &Conversation) -> String {
    let mut out = String::new();
    let (mut generation, mut feedback) = (0, 0);
    for (i, m) in gen_history.messages().iter().enumerate() {
        let label = match (m.role, i) {
            (Role::System, _) => "[SYSTEM]".to_string(),
            (Role::User, 1) => "[INITIAL PROMPT]".to_string(),
            (Role::User, _) => {
                feedback += 1;
                format!("[FEEDBACK {feedback}]")
            }
            (Role::Assistant, _) => {
                generation += 1;
                format!("[GENERATION {generation}]")
            }
        };
        if !out.is_empty() {
            out.push_str("\n\n");
        }
        let _ = write!(out, "{label}\n{}", m.content.trim_end());
    }
    out
}

/// Everything derived once from the training table.
struct Prepared {
    profile: DatasetProfile,
    /// Training rows in the column order shown to the models.
    prompt_train: Table,
    /// Maps a row in prompt order back to dataset order.
    inverse: Vec<usize>,
    parser: RowParser,
    gen_system: String,
    fb_system: String,
}

/// Runs the workflows against a chat backend.
pub struct Engine<'a> {
    config: RunConfig,
    prompts: PromptKit,
    backend: &'a dyn ChatBackend,
    expected_classes: Vec<String>,
}

impl<'a> Engine<'a> {
    pub fn new(config: RunConfig, backend: &'a dyn ChatBackend) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self { config, prompts: PromptKit::default(), backend, expected_classes: Vec::new() })
    }

    pub fn with_prompts(mut self, prompts: PromptKit) -> Self {
        self.prompts = prompts;
        self
    }

    /// Classes that must all appear in the training table, typically those
    /// of the full dataset before splitting.
    pub fn with_expected_classes<I, S>(mut self, classes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.expected_classes = classes.into_iter().map(Into::into).collect();
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Runs the configured method.
    pub fn run(&self, train: &Table) -> Result<GenerationResult, EngineError> {
        match self.config.method {
            Method::SynthLoop => self.synthloop(train),
            Method::ReducedLoop => self.reducedloop(train),
            Method::PromptRefine => self.prompt_refine(train),
        }
    }

    fn prepare(&self, train: &Table) -> Result<Prepared, EngineError> {
        if train.is_empty() {
            return Err(EngineError::EmptyTrain);
        }
        let present: BTreeSet<String> = class_groups(train).into_iter().map(|(c, _)| c).collect();
        if let Some(missing) = self.expected_classes.iter().find(|c| !present.contains(*c)) {
            return Err(EngineError::MissingClass(missing.clone()));
        }
        let profile = profile(train)?;
        let order = self.config.variant.feature_order.arrange_schema(train.schema().features());
        let mut inverse = vec![0; order.len()];
        for (pos, &orig) in order.iter().enumerate() {
            inverse[orig] = pos;
        }
        let prompt_train = train.permuted(&order);
        let parser = RowParser::new(prompt_train.schema().clone()).with_vocabulary(&profile);
        let gen_system = self.prompts.render_generation_system(&profile, &self.config.variant)?;
        let fb_system = self.prompts.render_feedback_system(&profile, &self.config.variant)?;
        Ok(Prepared { profile, prompt_train, inverse, parser, gen_system, fb_system })
    }

    fn call(
        &self,
        conversation: &Conversation,
        params: &CompletionParams,
        phase: Phase,
        run: usize,
        turn: usize,
        log: &mut Vec<CallRecord>,
    ) -> Result<String, EngineError> {
        let digest = request_digest(conversation, params);
        debug!("{phase:?} call run {run} turn {turn}: {digest}");
        log.push(CallRecord { phase, run, turn, digest });
        complete(conversation, params, self.backend)
            .map(|m| m.content)
            .map_err(|source| EngineError::Backend { phase, run, turn, source })
    }

    fn parse(&self, prep: &Prepared, text: &str, phase: Phase, run: usize, turn: usize) -> Result<ParseReport, EngineError> {
        let report = prep.parser.parse(text);
        if report.accepted.is_empty() {
            let preview: String = text.chars().take(120).collect();
            return Err(EngineError::EmptyGeneration { phase, run, turn, rejected: report.rejected.len(), preview });
        }
        Ok(report)
    }

    fn few_shots(&self, prep: &Prepared, round: usize) -> Result<SerializedBlock, EngineError> {
        let rows = sample_few_shots(&prep.prompt_train, self.config.per_class_shots, self.config.seed, round as u64)?;
        Ok(serialize(&rows)?)
    }

    fn to_dataset_order(prep: &Prepared, rows: &Table) -> Table {
        rows.permuted(&prep.inverse)
    }

    /// One run of the feedback loop: `iterations` generation turns, with an
    /// analysis and feedback injection between consecutive turns.
    pub fn run_feedback_loop(&self, train: &Table, round_index: usize) -> Result<RunState, EngineError> {
        let prep = self.prepare(train)?;
        self.feedback_loop(&prep, round_index)
    }

    fn feedback_loop(&self, prep: &Prepared, round: usize) -> Result<RunState, EngineError> {
        let cfg = &self.config;
        let few_shots = self.few_shots(prep, round)?;
        let mut gen = Conversation::new(prep.gen_system.clone());
        gen.push_user(self.prompts.render_initial_user(&few_shots, cfg.n_requested_per_call)?);
        let mut fb = Conversation::new(prep.fb_system.clone());
        let mut call_log = Vec::new();
        let mut parse_reports = Vec::new();
        let mut last = None;

        for turn in 1..=cfg.iterations {
            let output = self.call(&gen, &cfg.gen_params, Phase::Generation, round, turn, &mut call_log)?;
            gen.push_assistant(output.clone());
            let report = self.parse(prep, &output, Phase::Generation, round, turn)?;
            let is_last = turn == cfg.iterations;
            parse_reports.push(ParseSummary::new(Phase::Generation, round, turn, &report, is_last));
            if is_last {
                last = Some(report);
                break;
            }
            fb.push_user(self.prompts.render_feedback_user(&output, &cfg.variant, Some(&few_shots))?);
            let feedback = self.call(&fb, &cfg.fb_params, Phase::Feedback, round, turn, &mut call_log)?;
            fb.push_assistant(feedback.clone());
            gen.push_user(self.prompts.render_feedback_injection(&feedback)?);
        }

        let report = last.expect("at least one iteration");
        info!("run {round}: {} rows kept from the final turn", report.accepted.len());
        Ok(RunState {
            gen_history: gen,
            fb_history: fb,
            accumulated: Self::to_dataset_order(prep, &report.accepted),
            round_index: round,
            call_log,
            parse_reports,
            few_shots,
        })
    }

    fn finish(
        &self,
        prep: &Prepared,
        mut synthetic: Table,
        states: Vec<RunState>,
        mut follow_up: FollowUp,
        refined_prompt: Option<RefinedPrompt>,
    ) -> GenerationResult {
        let target = self.config.n_total_target;
        let n_generated = synthetic.len();
        let truncated = n_generated < target;
        if truncated {
            warn!("call cap reached with {n_generated} of {target} rows");
        }
        synthetic.truncate(target);
        let mut call_log = Vec::new();
        let mut parse_reports = Vec::new();
        let mut histories = Vec::new();
        let runs_executed = states.len();
        for s in states {
            call_log.extend(s.call_log);
            parse_reports.extend(s.parse_reports);
            histories.push((s.gen_history, s.fb_history));
        }
        call_log.append(&mut follow_up.call_log);
        parse_reports.append(&mut follow_up.parse_reports);
        let rejected_total = parse_reports.iter().map(|r| r.rejected).sum();
        debug_assert!(synthetic.schema().names().eq(prep.profile.features.iter().map(|f| f.name.as_str())));
        GenerationResult {
            method: self.config.method,
            synthetic,
            n_generated,
            parse_reports,
            refined_prompt,
            runs_executed,
            follow_up_calls: follow_up.calls,
            rejected_total,
            truncated,
            call_log,
            histories,
        }
    }

    /// Restarts the feedback loop with fresh histories and few-shots until
    /// enough rows are collected or the run cap is reached.
    pub fn synthloop(&self, train: &Table) -> Result<GenerationResult, EngineError> {
        let prep = self.prepare(train)?;
        let cfg = &self.config;
        let cap = cfg.call_cap();
        let mut synthetic = Table::empty(train.schema().clone());
        let mut states = Vec::new();
        let mut next = 0;
        while synthetic.len() < cfg.n_total_target && next < cap {
            let wave: Vec<usize> = (next..(next + cfg.jobs).min(cap)).collect();
            next += wave.len();
            let results: Vec<Result<RunState, EngineError>> =
                wave.par_iter().map(|&round| self.feedback_loop(&prep, round)).collect();
            for state in results {
                let state = state?;
                synthetic.extend(&state.accumulated)?;
                states.push(state);
            }
        }
        Ok(self.finish(&prep, synthetic, states, FollowUp::default(), None))
    }

    /// One feedback-loop run, then repeated submission of the request that
    /// produced its final generation. The history is never extended.
    pub fn reducedloop(&self, train: &Table) -> Result<GenerationResult, EngineError> {
        let prep = self.prepare(train)?;
        let cfg = &self.config;
        let state = self.feedback_loop(&prep, 0)?;
        let mut synthetic = state.accumulated.clone();

        let frozen = final_request(&state.gen_history);
        let mut follow = FollowUp::default();
        let cap = cfg.call_cap();
        while synthetic.len() < cfg.n_total_target && follow.calls < cap {
            let idx = follow.calls;
            follow.calls += 1;
            let output = self.call(&frozen, &cfg.gen_params, Phase::Resubmission, idx, 1, &mut follow.call_log)?;
            let report = self.parse(&prep, &output, Phase::Resubmission, idx, 1)?;
            follow.parse_reports.push(ParseSummary::new(Phase::Resubmission, idx, 1, &report, true));
            synthetic.extend(&Self::to_dataset_order(&prep, &report.accepted))?;
        }
        Ok(self.finish(&prep, synthetic, vec![state], follow, None))
    }

    /// Asks the summary model for a standalone prompt built from a finished
    /// generation history.
    pub fn refine_prompt(&self, gen_history: &Conversation, log: &mut Vec<CallRecord>) -> Result<RefinedPrompt, EngineError> {
        let mut conv = Conversation::new(self.prompts.render_summary_system()?);
        conv.push_user(self.prompts.render_summary_request(&history_text(gen_history))?);
        let text = self.call(&conv, &self.config.summary_params, Phase::Summary, 0, 1, log)?;
        let text = text.trim();
        if text.is_empty() {
            return Err(EngineError::EmptySummary);
        }
        if text.contains(FEW_SHOTS_TOKEN) {
            return Ok(RefinedPrompt { template: text.to_string(), placeholder_appended: false });
        }
        warn!("refined prompt lacks {FEW_SHOTS_TOKEN}; appending a few-shot section");
        Ok(RefinedPrompt {
            template: format!("{text}\n\nExamples from the original dataset:\n\n{FEW_SHOTS_TOKEN}"),
            placeholder_appended: true,
        })
    }

    /// One feedback-loop run, a summary call, then generation calls that use
    /// the refined prompt with newly drawn few-shots each time.
    pub fn prompt_refine(&self, train: &Table) -> Result<GenerationResult, EngineError> {
        let prep = self.prepare(train)?;
        let cfg = &self.config;
        let state = self.feedback_loop(&prep, 0)?;
        let mut synthetic = state.accumulated.clone();

        let mut follow = FollowUp::default();
        let refined = self.refine_prompt(&state.gen_history, &mut follow.call_log)?;
        let cap = cfg.call_cap();
        while synthetic.len() < cfg.n_total_target && follow.calls < cap {
            let wave: Vec<usize> = (follow.calls..(follow.calls + cfg.jobs).min(cap)).collect();
            follow.calls += wave.len();
            let results: Vec<_> = wave
                .par_iter()
                .map(|&idx| {
                    let mut log = Vec::new();
                    // round 0 belongs to the feedback-loop run
                    let few_shots = self.few_shots(&prep, idx + 1)?;
                    let mut conv = Conversation::new(prep.gen_system.clone());
                    conv.push_user(refined.fill(&few_shots));
                    let output = self.call(&conv, &cfg.gen_params, Phase::Refined, idx, 1, &mut log)?;
                    let report = self.parse(&prep, &output, Phase::Refined, idx, 1)?;
                    Ok::<_, EngineError>((log, report))
                })
                .collect();
            for (i, r) in wave.iter().zip(results) {
                let (mut log, report) = r?;
                follow.call_log.append(&mut log);
                follow.parse_reports.push(ParseSummary::new(Phase::Refined, *i, 1, &report, true));
                synthetic.extend(&Self::to_dataset_order(&prep, &report.accepted))?;
            }
        }
        Ok(self.finish(&prep, synthetic, vec![state], follow, Some(refined)))
    }
}

#[derive(Default)]
struct FollowUp {
    calls: usize,
    call_log: Vec<CallRecord>,
    parse_reports: Vec<ParseSummary>,
}

/// The generation request that produced the final assistant turn.
fn final_request(gen_history: &Conversation) -> Conversation {
    let messages = gen_history.messages();
    let keep = if messages.last().is_some_and(|m| m.role == Role::Assistant) {
        messages.len() - 1
    } else {
        messages.len()
    };
    let mut conv = Conversation::new(messages[0].content.clone());
    for m in &messages[1..keep] {
        conv.push(m.clone()).expect("copied from a valid conversation");
    }
    conv
}

pub fn synthloop(config: &RunConfig, train: &Table, backend: &dyn ChatBackend) -> Result<GenerationResult, EngineError> {
    Engine::new(config.clone(), backend)?.synthloop(train)
}

pub fn reducedloop(config: &RunConfig, train: &Table, backend: &dyn ChatBackend) -> Result<GenerationResult, EngineError> {
    Engine::new(config.clone(), backend)?.reducedloop(train)
}

pub fn prompt_refine(config: &RunConfig, train: &Table, backend: &dyn ChatBackend) -> Result<GenerationResult, EngineError> {
    Engine::new(config.clone(), backend)?.prompt_refine(train)
}

/// Runs `config.method`.
pub fn generate(config: &RunConfig, train: &Table, backend: &dyn ChatBackend) -> Result<GenerationResult, EngineError> {
    Engine::new(config.clone(), backend)?.run(train)
}
