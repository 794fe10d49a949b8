#![allow(dead_code)]

use tagal::dataset::{read_csv_str, Table};
use tagal::llmlink::{Conversation, Role, ScriptedMock};

pub const FEEDBACK_SYSTEM_PREFIX: &str = "You are an expert data scientist who reviews";
pub const SUMMARY_SYSTEM_PREFIX: &str = "You are an expert prompt engineer";

/// 16 rows, 10 "no" and 6 "yes".
pub fn train() -> Table {
    let mut csv = String::from("age,job,hours,y\n");
    for i in 0..16 {
        let job = ["clerk", "nurse", "smith"][i % 3];
        let y = if i < 10 { "no" } else { "yes" };
        csv.push_str(&format!("{},{job},{}.5,{y}\n", 20 + 2 * i, 30 + i));
    }
    read_csv_str(&csv, None).unwrap()
}

/// `n` valid rows for [`train`]'s schema, different for every `call`.
pub fn rows(call: usize, n: usize) -> String {
    (0..n)
        .map(|j| {
            let job = ["clerk", "nurse", "smith"][(call + j) % 3];
            let y = if j % 2 == 0 { "no" } else { "yes" };
            format!("{},{job},{}.25,{y}", 18 + (call * 31 + j) % 60, 20 + j % 40)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub enum Caller {
    Generation,
    Feedback,
    Summary,
}

pub fn caller(conv: &Conversation) -> Caller {
    let system = &conv.messages()[0];
    assert_eq!(system.role, Role::System);
    if system.content.starts_with(FEEDBACK_SYSTEM_PREFIX) {
        Caller::Feedback
    } else if system.content.starts_with(SUMMARY_SYSTEM_PREFIX) {
        Caller::Summary
    } else {
        Caller::Generation
    }
}

/// Mock answering each role: generation calls get `rows_per_call` fresh
/// rows, feedback calls a numbered critique, summary calls `summary`.
pub fn role_mock(rows_per_call: usize, summary: &'static str) -> ScriptedMock {
    ScriptedMock::from_fn(move |i, conv, _| {
        Some(match caller(conv) {
            Caller::Generation => format!("```csv\nage,job,hours,y\n{}\n```", rows(i, rows_per_call)),
            Caller::Feedback => format!("Feedback {i}: ages are too uniform.\nEnsure all generated examples are unique."),
            Caller::Summary => summary.to_string(),
        })
    })
}

/// Plain-text rendering of a conversation for golden comparisons.
pub fn transcript(conv: &Conversation) -> String {
    conv.messages()
        .iter()
        .map(|m| format!("=== {} ===\n{}\n", m.role, m.content))
        .collect()
}
