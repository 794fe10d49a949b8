use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use serde::Serialize;

use tagal::dataset::{
    format_float, load_csv, profile, split_with, write_csv, DatasetProfile, FeatureStats, Split, Table,
};
use tagal::engine::{Engine, GenerationResult, RunManifest};
use tagal::evalsuite::{evaluate, EvalReport};
use tagal::promptkit::PromptKit;
use tagal::statgen::BaselineModel;

use crate::config::ExperimentConfig;

pub const SYNTHETIC_FILE: &str = "synthetic.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const EVAL_JSON_FILE: &str = "eval.json";
pub const EVAL_TEXT_FILE: &str = "eval.txt";

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Table> {
    let path = cfg.dataset()?;
    let table = load_csv(path, cfg.features.as_deref())?;
    Ok(match &cfg.target {
        Some(t) => table.with_target(t)?,
        None => table,
    })
}

pub fn split_dataset(cfg: &ExperimentConfig, table: &Table) -> Result<Split> {
    Ok(split_with(table, cfg.seed, cfg.train_fraction, cfg.split_mode())?)
}

/// Human-readable profile: one line per feature and the class shares.
pub fn render_profile(p: &DatasetProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "rows: {}", p.n_rows);
    let _ = writeln!(out, "features: {}", p.features.len());
    let width = p.features.iter().map(|f| f.name.len()).max().unwrap_or(0).max(7);
    let _ = writeln!(out, "{:<width$}  {:<6}  {:<11}  {:>7}  summary", "feature", "type", "kind", "missing");
    for f in &p.features {
        let summary = match &f.stats {
            FeatureStats::Categorical { values } => {
                let shown: Vec<String> = values.iter().take(8).map(|c| format!("{} {:.2}%", c.value, c.frequency * 100.0)).collect();
                let more = if values.len() > 8 { format!(", ... ({} values)", values.len()) } else { String::new() };
                format!("{}{more}", shown.join(", "))
            }
            FeatureStats::Numerical(s) => format!(
                "mean {}, median {}, std {}, range [{}, {}]",
                format_float(s.mean),
                format_float(s.median),
                format_float(s.std),
                format_float(s.min),
                format_float(s.max)
            ),
        };
        let kind = if f.is_target { format!("{} *", f.kind()) } else { f.kind().to_string() };
        let _ = writeln!(out, "{:<width$}  {:<6}  {:<11}  {:>7}  {summary}", f.name, f.value_type.to_string(), kind, f.missing);
    }
    let shares: Vec<String> = p.class_shares.iter().map(|c| format!("{} {:.2}%", c.value, c.frequency * 100.0)).collect();
    let _ = writeln!(out, "class shares ({}): {}", p.target().name, shares.join(", "));
    out
}

pub fn cmd_profile(cfg: &ExperimentConfig, json: bool) -> Result<String> {
    let table = load_dataset(cfg)?;
    let p = profile(&table)?;
    Ok(if json { serde_json::to_string_pretty(&p)? + "\n" } else { render_profile(&p) })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn prepare_out(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let out = cfg.out()?.to_path_buf();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out)
}

#[derive(Debug)]
pub struct GenerateOutcome {
    pub synthetic_path: PathBuf,
    pub manifest_path: PathBuf,
    pub result: GenerationResult,
    pub split: Split,
}

pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<GenerateOutcome> {
    generate_inner(cfg, false)
}

fn generate_inner(cfg: &ExperimentConfig, link_eval: bool) -> Result<GenerateOutcome> {
    cfg.validate()?;
    let backend_kind = cfg.effective_backend()?;
    let table = load_dataset(cfg)?;
    let split = split_dataset(cfg, &table)?;
    let classes: Vec<String> = profile(&table)?.class_labels().into_iter().map(String::from).collect();
    let prompts = match &cfg.templates {
        Some(dir) => PromptKit::from_dir(dir)?,
        None => PromptKit::default(),
    };
    let out = prepare_out(cfg)?;
    let backend = backend_kind.build()?;

    let engine = Engine::new(cfg.run.clone(), backend.as_ref())?
        .with_prompts(prompts)
        .with_expected_classes(classes);
    info!("{} on {} training rows", cfg.run.method, split.train.len());
    let result = engine.run(&split.train)?;

    let synthetic_path = out.join(SYNTHETIC_FILE);
    write_csv(&result.synthetic, &synthetic_path)?;
    let mut manifest = RunManifest::new(&cfg.run, &result)
        .with_extra("dataset", cfg.dataset()?.display().to_string())
        .with_extra("split", split_info(cfg, &split))
        .with_extra("backend", &backend_kind)
        .with_extra("synthetic", SYNTHETIC_FILE);
    if let Some(dir) = &cfg.templates {
        manifest = manifest.with_extra("templates", dir.display().to_string());
    }
    if link_eval {
        manifest = manifest.with_extra("evaluation", EVAL_JSON_FILE);
    }
    let manifest_path = out.join(MANIFEST_FILE);
    write_text(&manifest_path, &(manifest.to_json_pretty() + "\n"))?;
    if result.truncated {
        log::warn!("only {} of {} rows generated before the call cap", result.n_generated, cfg.run.n_total_target);
    }
    Ok(GenerateOutcome { synthetic_path, manifest_path, result, split })
}

#[derive(Serialize)]
struct SplitInfo {
    seed: u64,
    train_fraction: f64,
    mode: String,
    train_rows: usize,
    test_rows: usize,
}

fn split_info(cfg: &ExperimentConfig, split: &Split) -> SplitInfo {
    SplitInfo {
        seed: split.seed,
        train_fraction: split.train_fraction,
        mode: if cfg.stratified { "stratified" } else { "shuffle" }.to_string(),
        train_rows: split.train.len(),
        test_rows: split.test.len(),
    }
}

#[derive(Serialize)]
struct BaselineManifest<'a> {
    method: &'a str,
    created_at: String,
    dataset: String,
    seed: u64,
    n_rows: usize,
    split: SplitInfo,
    synthetic: &'a str,
}

/// Independent per-feature sampling from the training profile.
pub fn cmd_baseline(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let table = load_dataset(cfg)?;
    let split = split_dataset(cfg, &table)?;
    let out = prepare_out(cfg)?;
    let p = profile(&split.train)?;
    let n = cfg.run.n_total_target;
    let synthetic = BaselineModel::new(&p, split.train.schema(), cfg.seed)?.generate(n)?;
    let path = out.join(SYNTHETIC_FILE);
    write_csv(&synthetic, &path)?;
    let manifest = BaselineManifest {
        method: "baseline",
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        dataset: cfg.dataset()?.display().to_string(),
        seed: cfg.seed,
        n_rows: synthetic.len(),
        split: split_info(cfg, &split),
        synthetic: SYNTHETIC_FILE,
    };
    write_text(&out.join(MANIFEST_FILE), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(path)
}

#[derive(Debug)]
pub struct EvaluateOutcome {
    pub report: EvalReport,
    pub text: String,
    pub json_path: PathBuf,
    pub text_path: PathBuf,
}

/// Scores `synthetic` against the split of the configured dataset and writes
/// the JSON and text reports to the output directory.
pub fn cmd_evaluate(cfg: &ExperimentConfig, synthetic: &Path, label: &str) -> Result<EvaluateOutcome> {
    cfg.validate()?;
    let table = load_dataset(cfg)?;
    let split = split_dataset(cfg, &table)?;
    let synth = load_csv(synthetic, Some(split.train.schema().features()))
        .with_context(|| format!("loading synthetic rows from {}", synthetic.display()))?;
    evaluate_split(cfg, &split, &synth, label)
}

fn evaluate_split(cfg: &ExperimentConfig, split: &Split, synth: &Table, label: &str) -> Result<EvaluateOutcome> {
    let out = prepare_out(cfg)?;
    let report = evaluate(&split.train, &split.test, synth, &cfg.eval)?;
    let text = report.to_text_table(label);
    let json_path = out.join(EVAL_JSON_FILE);
    let text_path = out.join(EVAL_TEXT_FILE);
    write_text(&json_path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    write_text(&text_path, &text)?;
    Ok(EvaluateOutcome { report, text, json_path, text_path })
}

#[derive(Debug)]
pub struct E2eOutcome {
    pub generate: GenerateOutcome,
    pub evaluate: Option<EvaluateOutcome>,
}

/// Generation followed by evaluation on the same split. When evaluation
/// fails the generated files are kept and the error names them.
pub fn cmd_e2e(cfg: &ExperimentConfig) -> Result<E2eOutcome> {
    let generate = generate_inner(cfg, cfg.evaluate)?;
    if !cfg.evaluate {
        return Ok(E2eOutcome { generate, evaluate: None });
    }
    let label = cfg.run.method.to_string();
    // score what was written, so the numbers match a later `evaluate`
    let evaluated = load_csv(&generate.synthetic_path, Some(generate.split.train.schema().features()))
        .map_err(anyhow::Error::from)
        .and_then(|synth| evaluate_split(cfg, &generate.split, &synth, &label));
    let evaluate = evaluated.with_context(|| {
        format!(
            "generation succeeded ({} and {} written) but evaluation failed",
            generate.synthetic_path.display(),
            generate.manifest_path.display()
        )
    })?;
    Ok(E2eOutcome { generate, evaluate: Some(evaluate) })
}
