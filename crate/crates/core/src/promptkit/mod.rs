//! Prompt rendering for the generation, feedback and summary roles.
//!
//! Wording lives in plain-text templates (see `templates/` in this crate)
//! with `{name}` placeholders; `{{` and `}}` escape literal braces. A template
//! directory can override any subset of the defaults, so prompt experiments
//! are data changes.

mod features;
mod template;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetProfile;
use crate::rowcodec::SerializedBlock;

pub use features::{feature_info_block, FeatureOrder};
pub use template::{render, unresolved_placeholders};

/// Sentinel the summary model must leave in the refined prompt; the engine
/// replaces it with freshly sampled few-shot examples on every call.
pub const FEW_SHOTS_TOKEN: &str = "{FEW_SHOTS}";

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("template '{template}' uses unbound placeholder '{{{name}}}'")]
    Unbound { template: TemplateId, name: String },
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("requested example count must be at least 1")]
    ZeroRequested,
    #[error("failed to read template {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    GenSystem,
    GenInitialUser,
    GenFeedbackUser,
    FbSystem,
    FbUser,
    FbFewShots,
    CritiqueFull,
    CritiqueWeakness,
    SummarySystem,
    SummaryUser,
}

impl TemplateId {
    pub const ALL: [TemplateId; 10] = [
        TemplateId::GenSystem,
        TemplateId::GenInitialUser,
        TemplateId::GenFeedbackUser,
        TemplateId::FbSystem,
        TemplateId::FbUser,
        TemplateId::FbFewShots,
        TemplateId::CritiqueFull,
        TemplateId::CritiqueWeakness,
        TemplateId::SummarySystem,
        TemplateId::SummaryUser,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            TemplateId::GenSystem => "gen_system.txt",
            TemplateId::GenInitialUser => "gen_initial_user.txt",
            TemplateId::GenFeedbackUser => "gen_feedback_user.txt",
            TemplateId::FbSystem => "fb_system.txt",
            TemplateId::FbUser => "fb_user.txt",
            TemplateId::FbFewShots => "fb_few_shots.txt",
            TemplateId::CritiqueFull => "critique_full.txt",
            TemplateId::CritiqueWeakness => "critique_weakness.txt",
            TemplateId::SummarySystem => "summary_system.txt",
            TemplateId::SummaryUser => "summary_user.txt",
        }
    }

    fn default_body(self) -> &'static str {
        match self {
            TemplateId::GenSystem => include_str!("../../templates/gen_system.txt"),
            TemplateId::GenInitialUser => include_str!("../../templates/gen_initial_user.txt"),
            TemplateId::GenFeedbackUser => include_str!("../../templates/gen_feedback_user.txt"),
            TemplateId::FbSystem => include_str!("../../templates/fb_system.txt"),
            TemplateId::FbUser => include_str!("../../templates/fb_user.txt"),
            TemplateId::FbFewShots => include_str!("../../templates/fb_few_shots.txt"),
            TemplateId::CritiqueFull => include_str!("../../templates/critique_full.txt"),
            TemplateId::CritiqueWeakness => include_str!("../../templates/critique_weakness.txt"),
            TemplateId::SummarySystem => include_str!("../../templates/summary_system.txt"),
            TemplateId::SummaryUser => include_str!("../../templates/summary_user.txt"),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_name().trim_end_matches(".txt"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMode {
    /// Feature names, types and statistics are included in the system prompts.
    #[default]
    Info,
    NoInfo,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    /// Strengths, weaknesses and recommendations.
    #[default]
    Full,
    /// Weaknesses and recommendations only.
    Weakness,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptVariant {
    pub info_mode: InfoMode,
    pub feedback_mode: FeedbackMode,
    pub feature_order: FeatureOrder,
    pub fshots_to_feedback: bool,
}

/// A full set of templates, defaults unless overridden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptKit {
    templates: BTreeMap<TemplateId, String>,
}

impl Default for PromptKit {
    fn default() -> Self {
        Self {
            templates: TemplateId::ALL
                .iter()
                .map(|&id| (id, id.default_body().to_string()))
                .collect(),
        }
    }
}

impl PromptKit {
    /// Defaults overridden by every `<template>.txt` present in `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let mut kit = Self::default();
        for id in TemplateId::ALL {
            let path = dir.as_ref().join(id.file_name());
            if path.exists() {
                let body = std::fs::read_to_string(&path).map_err(|source| PromptError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                kit.templates.insert(id, body);
            }
        }
        Ok(kit)
    }

    pub fn with_template(mut self, id: TemplateId, body: impl Into<String>) -> Self {
        self.templates.insert(id, body.into());
        self
    }

    pub fn template(&self, id: TemplateId) -> &str {
        &self.templates[&id]
    }

    fn render(&self, id: TemplateId, bindings: &[(&str, &str)]) -> Result<String, PromptError> {
        render(self.template(id), bindings)
            .map(|s| s.trim_end().to_string())
            .map_err(|name| PromptError::Unbound { template: id, name })
    }

    fn feature_info(&self, profile: &DatasetProfile, variant: &PromptVariant) -> String {
        match variant.info_mode {
            InfoMode::Info => format!("\n{}", feature_info_block(profile, variant.feature_order)),
            InfoMode::NoInfo => String::new(),
        }
    }

    fn critique(&self, variant: &PromptVariant) -> Result<String, PromptError> {
        match variant.feedback_mode {
            FeedbackMode::Full => self.render(TemplateId::CritiqueFull, &[]),
            FeedbackMode::Weakness => self.render(TemplateId::CritiqueWeakness, &[]),
        }
    }

    pub fn render_generation_system(
        &self,
        profile: &DatasetProfile,
        variant: &PromptVariant,
    ) -> Result<String, PromptError> {
        let info = self.feature_info(profile, variant);
        self.render(TemplateId::GenSystem, &[("feature_info", &info)])
    }

    pub fn render_initial_user(
        &self,
        few_shots: &SerializedBlock,
        n_requested: usize,
    ) -> Result<String, PromptError> {
        if n_requested == 0 {
            return Err(PromptError::ZeroRequested);
        }
        let n = n_requested.to_string();
        let noun = if n_requested == 1 { "example" } else { "examples" };
        self.render(
            TemplateId::GenInitialUser,
            &[("few_shots", &few_shots.text), ("n_requested", &n), ("example_noun", noun)],
        )
    }

    pub fn render_feedback_system(
        &self,
        profile: &DatasetProfile,
        variant: &PromptVariant,
    ) -> Result<String, PromptError> {
        let info = self.feature_info(profile, variant);
        let critique = self.critique(variant)?;
        self.render(TemplateId::FbSystem, &[("feature_info", &info), ("critique", &critique)])
    }

    /// The analysis request. Few-shots are embedded only when the variant
    /// forwards them to the feedback role.
    pub fn render_feedback_user(
        &self,
        generated_block: &str,
        variant: &PromptVariant,
        few_shots: Option<&SerializedBlock>,
    ) -> Result<String, PromptError> {
        if generated_block.trim().is_empty() {
            return Err(PromptError::EmptyInput("generated block"));
        }
        let section = match (variant.fshots_to_feedback, few_shots) {
            (true, Some(block)) => self.render(TemplateId::FbFewShots, &[("few_shots", &block.text)])?,
            _ => String::new(),
        };
        let critique = self.critique(variant)?;
        self.render(
            TemplateId::FbUser,
            &[
                ("few_shots_section", &section),
                ("generated_block", generated_block.trim_end()),
                ("critique", &critique),
            ],
        )
    }

    pub fn render_feedback_injection(&self, feedback_text: &str) -> Result<String, PromptError> {
        if feedback_text.trim().is_empty() {
            return Err(PromptError::EmptyInput("feedback text"));
        }
        self.render(TemplateId::GenFeedbackUser, &[("feedback_text", feedback_text)])
    }

    pub fn render_summary_system(&self) -> Result<String, PromptError> {
        self.render(TemplateId::SummarySystem, &[])
    }

    pub fn render_summary_request(&self, history_text: &str) -> Result<String, PromptError> {
        if history_text.trim().is_empty() {
            return Err(PromptError::EmptyInput("generation history"));
        }
        self.render(TemplateId::SummaryUser, &[("history_text", history_text)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{profile, read_csv_str, sample_few_shots};
    use crate::rowcodec::serialize;

    fn fixture() -> (DatasetProfile, SerializedBlock) {
        let mut csv = String::from("age,workclass,hours,income\n");
        for i in 0..40 {
            let income = if i % 4 == 0 { ">50K" } else { "<=50K" };
            let work = if i % 3 == 0 { "Private" } else { "State-gov" };
            csv.push_str(&format!("{},{work},{},{income}\n", 20 + i, 30 + i % 7));
        }
        let t = read_csv_str(&csv, None).unwrap();
        let shots = sample_few_shots(&t, 3, 1, 0).unwrap();
        (profile(&t).unwrap(), serialize(&shots).unwrap())
    }

    #[test]
    fn info_variant_lists_statistics() {
        let (p, _) = fixture();
        let kit = PromptKit::default();
        let text = kit.render_generation_system(&p, &PromptVariant::default()).unwrap();
        assert!(text.contains("step by step"));
        assert!(text.contains("Follow the distribution of the original dataset"));
        assert!(text.contains("<=50K 75.00%"), "{text}");
        assert!(text.contains("standard deviation"));
    }

    #[test]
    fn no_info_variant_drops_feature_block() {
        let (p, _) = fixture();
        let kit = PromptKit::default();
        let variant = PromptVariant {
            info_mode: InfoMode::NoInfo,
            ..Default::default()
        };
        for text in [
            kit.render_generation_system(&p, &variant).unwrap(),
            kit.render_feedback_system(&p, &variant).unwrap(),
        ] {
            assert!(!text.contains("standard deviation"));
            assert!(!text.contains('%'));
            assert!(!text.contains("workclass"));
        }
    }

    #[test]
    fn initial_user_embeds_block_and_count() {
        let (_, block) = fixture();
        let kit = PromptKit::default();
        let text = kit.render_initial_user(&block, 2500).unwrap();
        assert!(text.contains("2500"));
        assert!(text.contains(&block.text));
        let one = kit.render_initial_user(&block, 1).unwrap();
        assert!(one.contains("Generate 1 new synthetic example "));
        assert!(kit.render_initial_user(&block, 0).is_err());
    }

    #[test]
    fn feedback_modes() {
        let (_, block) = fixture();
        let kit = PromptKit::default();
        let full = kit
            .render_feedback_user("1,x", &PromptVariant::default(), Some(&block))
            .unwrap();
        assert!(full.contains("strengths") && full.contains("weaknesses"));
        assert!(!full.contains(&block.text), "few-shots only when forwarded");
        let weak = PromptVariant {
            feedback_mode: FeedbackMode::Weakness,
            fshots_to_feedback: true,
            ..Default::default()
        };
        let text = kit.render_feedback_user("1,x", &weak, Some(&block)).unwrap();
        assert!(!text.to_lowercase().contains("strength"));
        assert!(text.contains("weaknesses"));
        assert!(text.contains(&block.text));
        assert!(kit.render_feedback_user("  ", &weak, None).is_err());
    }

    #[test]
    fn weakness_system_prompt_has_no_strengths() {
        let (p, _) = fixture();
        let weak = PromptVariant {
            feedback_mode: FeedbackMode::Weakness,
            ..Default::default()
        };
        let text = PromptKit::default().render_feedback_system(&p, &weak).unwrap();
        assert!(!text.to_lowercase().contains("strength"));
    }

    #[test]
    fn injection_preserves_feedback_verbatim() {
        let kit = PromptKit::default();
        let a = kit.render_feedback_injection("Add diversity").unwrap();
        assert!(a.contains("Add diversity"));
        let multi = "- point one\n- point two\n\n- point three";
        let b = kit.render_feedback_injection(multi).unwrap();
        assert!(b.contains(multi));
        for text in [a, b] {
            assert!(text.contains("following the additional recommendations from the feedback"));
        }
        assert!(kit.render_feedback_injection("").is_err());
    }

    #[test]
    fn summary_request_names_token_once() {
        let kit = PromptKit::default();
        let history = "[FEEDBACK 1]\nfirst\n\n[FEEDBACK 2]\nsecond\n\n[FEEDBACK 3]\nthird";
        let text = kit.render_summary_request(history).unwrap();
        assert_eq!(text.matches(FEW_SHOTS_TOKEN).count(), 1);
        for needle in ["first", "second", "third"] {
            assert!(text.contains(needle));
        }
        assert!(kit.render_summary_request(" ").is_err());
    }

    #[test]
    fn rendered_defaults_have_no_unresolved_placeholders() {
        let (p, block) = fixture();
        let kit = PromptKit::default();
        let v = PromptVariant {
            fshots_to_feedback: true,
            ..Default::default()
        };
        let texts = [
            kit.render_generation_system(&p, &v).unwrap(),
            kit.render_initial_user(&block, 10).unwrap(),
            kit.render_feedback_system(&p, &v).unwrap(),
            kit.render_feedback_user("1,2", &v, Some(&block)).unwrap(),
            kit.render_feedback_injection("fb").unwrap(),
            kit.render_summary_system().unwrap(),
            kit.render_summary_request("history").unwrap(),
        ];
        for t in &texts {
            assert!(unresolved_placeholders(t).is_empty(), "{t}");
        }
    }

    #[test]
    fn override_with_unbound_placeholder_fails() {
        let kit = PromptKit::default().with_template(TemplateId::GenFeedbackUser, "{feedback_text} {oops}");
        assert!(matches!(
            kit.render_feedback_injection("x"),
            Err(PromptError::Unbound { name, .. }) if name == "oops"
        ));
    }

    #[test]
    fn templates_load_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("gen_feedback_user.txt"), "Expert says: {feedback_text}").unwrap();
        let kit = PromptKit::from_dir(dir.path()).unwrap();
        assert_eq!(kit.render_feedback_injection("hi").unwrap(), "Expert says: hi");
        assert_eq!(kit.template(TemplateId::GenSystem), PromptKit::default().template(TemplateId::GenSystem));
    }

    #[test]
    fn info_mode_does_not_touch_few_shot_block() {
        let (p, block) = fixture();
        let kit = PromptKit::default();
        let a = kit.render_initial_user(&block, 5).unwrap();
        let no_info = PromptVariant {
            info_mode: InfoMode::NoInfo,
            ..Default::default()
        };
        let _ = kit.render_generation_system(&p, &no_info).unwrap();
        assert_eq!(a, kit.render_initial_user(&block, 5).unwrap());
    }
}
