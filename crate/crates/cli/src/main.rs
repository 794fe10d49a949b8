use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tagal::engine::Method;
use tagal::llmlink::{BackendKind, RetryPolicy};
use tagal::promptkit::{FeatureOrder, FeedbackMode, InfoMode};
use tagal_cli::{cmd_baseline, cmd_e2e, cmd_evaluate, cmd_generate, cmd_profile, ExperimentConfig};

#[derive(Parser)]
#[command(name = "tagal", version, about = "Synthetic tabular data from chat LLMs, with an evaluation suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Print per-feature statistics and class shares of a dataset.
    Profile {
        #[arg(long)]
        json: bool,
    },
    /// Generate synthetic rows with one of the LLM workflows.
    Generate,
    /// Generate rows by sampling every feature independently.
    Baseline,
    /// Score a synthetic CSV against the held-out split of the dataset.
    Evaluate {
        #[arg(long)]
        synthetic: PathBuf,
        /// Row label in the text report.
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Generate, then evaluate the result.
    E2e {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        no_eval: bool,
    },
}

#[derive(Args, Default)]
struct EvalArgs {
    /// Neighbour count of the precision/recall manifolds.
    #[arg(long)]
    k: Option<usize>,
    /// Classifier fits averaged per utility score.
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Http,
    Mock,
    Replay,
}

#[derive(Clone, Copy, ValueEnum)]
enum InfoArg {
    Info,
    NoInfo,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeedbackArg {
    Full,
    Weakness,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Original,
    CatFirst,
    NumFirst,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment config; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Target column (defaults to the last column).
    #[arg(long, global = true)]
    target: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    train_fraction: Option<f64>,
    #[arg(long, global = true)]
    stratified: bool,
    #[arg(long, global = true, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    /// Few-shot rows per class.
    #[arg(long, global = true)]
    shots: Option<usize>,
    /// Rows requested per generation call.
    #[arg(long, global = true)]
    request_size: Option<usize>,
    /// Rows to collect.
    #[arg(long, global = true)]
    target_count: Option<usize>,
    #[arg(long, global = true)]
    max_runs: Option<usize>,
    /// Sampling temperature of every model.
    #[arg(long, global = true)]
    temperature: Option<f64>,
    /// Model name sent with every request.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Base URL of an OpenAI-compatible server.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, global = true)]
    api_key_env: Option<String>,
    #[arg(long, global = true)]
    mock_script: Option<PathBuf>,
    /// Record/replay cache (JSON lines).
    #[arg(long, global = true)]
    replay_cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    variant_info: Option<InfoArg>,
    #[arg(long, global = true, value_enum)]
    variant_feedback: Option<FeedbackArg>,
    #[arg(long, global = true, value_enum)]
    feature_order: Option<OrderArg>,
    /// Show the few-shot examples to the feedback model too.
    #[arg(long, global = true)]
    fshots_feedback: Option<bool>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory of template overrides.
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl CommonArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if self.dataset.is_some() {
            cfg.dataset = self.dataset;
        }
        if self.target.is_some() {
            cfg.target = self.target;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        if self.templates.is_some() {
            cfg.templates = self.templates;
        }
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.train_fraction, self.train_fraction);
        cfg.stratified |= self.stratified;

        let run = &mut cfg.run;
        set(&mut run.method, self.method);
        set(&mut run.iterations, self.iterations);
        set(&mut run.per_class_shots, self.shots);
        set(&mut run.n_requested_per_call, self.request_size);
        set(&mut run.n_total_target, self.target_count);
        set(&mut run.jobs, self.jobs);
        if self.max_runs.is_some() {
            run.max_runs = self.max_runs;
        }
        for params in [&mut run.gen_params, &mut run.fb_params, &mut run.summary_params] {
            set(&mut params.temperature, self.temperature);
            set(&mut params.model_name, self.model.clone());
        }
        let v = &mut run.variant;
        if let Some(i) = self.variant_info {
            v.info_mode = match i {
                InfoArg::Info => InfoMode::Info,
                InfoArg::NoInfo => InfoMode::NoInfo,
            };
        }
        if let Some(f) = self.variant_feedback {
            v.feedback_mode = match f {
                FeedbackArg::Full => FeedbackMode::Full,
                FeedbackArg::Weakness => FeedbackMode::Weakness,
            };
        }
        if let Some(o) = self.feature_order {
            v.feature_order = match o {
                OrderArg::Original => FeatureOrder::Original,
                OrderArg::CatFirst => FeatureOrder::CatFirst,
                OrderArg::NumFirst => FeatureOrder::NumFirst,
            };
        }
        set(&mut v.fshots_to_feedback, self.fshots_feedback);

        if self.replay_cache.is_some() {
            cfg.replay_cache = self.replay_cache.clone();
        }
        match self.backend {
            Some(BackendArg::Http) => {
                let (old_endpoint, old_key, retry) = match cfg.backend.take() {
                    Some(BackendKind::Http { endpoint, api_key_env, retry }) => (Some(endpoint), api_key_env, retry),
                    _ => (None, None, RetryPolicy::default()),
                };
                let endpoint = self.endpoint.or(old_endpoint).context("--backend http needs --endpoint")?;
                cfg.backend = Some(BackendKind::Http { endpoint, api_key_env: self.api_key_env.or(old_key), retry });
            }
            Some(BackendArg::Mock) => {
                let script = self.mock_script.context("--backend mock needs --mock-script")?;
                cfg.backend = Some(BackendKind::Mock { script });
            }
            Some(BackendArg::Replay) => {
                let cache = cfg.replay_cache.take().context("--backend replay needs --replay-cache")?;
                cfg.backend = Some(BackendKind::Replay { cache, fallback: None });
            }
            None => {
                if self.endpoint.is_some() || self.api_key_env.is_some() || self.mock_script.is_some() {
                    bail!("--endpoint, --api-key-env and --mock-script need --backend");
                }
            }
        }
        Ok(cfg)
    }
}

fn apply_eval(cfg: &mut ExperimentConfig, eval: EvalArgs) {
    set(&mut cfg.eval.k, eval.k);
    set(&mut cfg.eval.runs, eval.runs);
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = cli.common.into_config()?;
    match cli.command {
        Command::Profile { json } => {
            print!("{}", cmd_profile(&cfg, json)?);
        }
        Command::Generate => {
            let out = cmd_generate(&cfg.resolved())?;
            println!(
                "{} rows written to {} ({} runs, {} follow-up calls{})",
                out.result.synthetic.len(),
                out.synthetic_path.display(),
                out.result.runs_executed,
                out.result.follow_up_calls,
                if out.result.truncated { ", target not reached" } else { "" }
            );
        }
        Command::Baseline => {
            let path = cmd_baseline(&cfg.resolved())?;
            println!("baseline rows written to {}", path.display());
        }
        Command::Evaluate { synthetic, label, eval } => {
            apply_eval(&mut cfg, eval);
            let label = label.unwrap_or_else(|| {
                synthetic.file_stem().map_or_else(|| "synthetic".into(), |s| s.to_string_lossy().into_owned())
            });
            let out = cmd_evaluate(&cfg.resolved(), &synthetic, &label)?;
            print!("{}", out.text);
        }
        Command::E2e { eval, no_eval } => {
            apply_eval(&mut cfg, eval);
            cfg.evaluate &= !no_eval;
            let out = cmd_e2e(&cfg.resolved())?;
            println!("{} rows written to {}", out.generate.result.synthetic.len(), out.generate.synthetic_path.display());
            if let Some(e) = out.evaluate {
                print!("{}", e.text);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
