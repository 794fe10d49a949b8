//! Training-free synthetic tabular data generation with agentic LLM
//! workflows, plus the metrics used to judge the output.
//!
//! The crate is organised bottom-up:
//!
//! - [`dataset`]: typed tables, CSV, splits, profiles, few-shot draws.
//! - [`rowcodec`]: the CSV block embedded in prompts and the lenient parser for
//!   model output.
//! - [`promptkit`]: template rendering for every prompt in the workflows.
//! - [`llmlink`]: chat-completion backends (HTTP, scripted mock, record/replay).
//! - [`engine`]: the SynthLoop, ReducedLoop and Prompt-Refine workflows.
//! - [`statgen`]: an independent-marginals statistical baseline generator.
//! - [`evalsuite`]: manifold precision/recall, collisions, ROC AUC, and
//!   downstream utility with an in-repo tree ensemble.

pub mod dataset;
pub mod engine;
pub mod evalsuite;
pub mod llmlink;
pub mod promptkit;
pub mod rowcodec;
pub mod statgen;
