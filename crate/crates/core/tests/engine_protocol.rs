mod common;

use std::collections::BTreeSet;
use std::path::Path;

use common::{caller, role_mock, rows, train, transcript, Caller};
use tagal::dataset::write_csv_string;
use tagal::engine::{Engine, EngineError, Method, Phase, RunConfig, RunManifest};
use tagal::llmlink::{ChatBackend, ReplayBackend, Role, ScriptedMock};
use tagal::promptkit::FEW_SHOTS_TOKEN;

const SUMMARY: &str = "Generate synthetic rows of the census extract.\nEnsure all generated examples are unique.\n\n{FEW_SHOTS}\n\nWrite CSV only.";

fn config(method: Method) -> RunConfig {
    RunConfig { method, per_class_shots: 3, n_requested_per_call: 10, n_total_target: 10, ..Default::default() }
}

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "transcript differs from {}", path.display());
}

fn roles(s: &str) -> Vec<Role> {
    s.split(',')
        .map(|r| match r {
            "s" => Role::System,
            "u" => Role::User,
            _ => Role::Assistant,
        })
        .collect()
}

#[test]
fn synthloop_three_iterations_history_shape() {
    let mock = role_mock(10, SUMMARY);
    let engine = Engine::new(config(Method::SynthLoop), &mock).unwrap();
    let result = engine.run(&train()).unwrap();
    assert_eq!(result.runs_executed, 1);
    let (gen, fb) = &result.histories[0];
    assert_eq!(gen.roles(), roles("s,u,a,u,a,u,a"));
    // no analysis of the final generation
    assert_eq!(fb.roles(), roles("s,u,a,u,a"));

    let phases: Vec<(Phase, usize)> = result.call_log.iter().map(|c| (c.phase, c.turn)).collect();
    assert_eq!(
        phases,
        [(Phase::Generation, 1), (Phase::Feedback, 1), (Phase::Generation, 2), (Phase::Feedback, 2), (Phase::Generation, 3)]
    );
    golden("synthloop_gen_history.txt", &transcript(gen));
    golden("synthloop_fb_history.txt", &transcript(fb));
}

#[test]
fn feedback_is_injected_verbatim() {
    let mock = role_mock(10, SUMMARY);
    let result = Engine::new(config(Method::SynthLoop), &mock).unwrap().run(&train()).unwrap();
    let (gen, fb) = &result.histories[0];
    for k in 0..2 {
        let feedback = &fb.messages()[2 + 2 * k].content;
        let injected = &gen.messages()[3 + 2 * k].content;
        assert!(injected.contains(feedback.as_str()), "{injected}");
        // the analysis request carries the generation verbatim
        let generated = &gen.messages()[2 + 2 * k].content;
        assert!(fb.messages()[1 + 2 * k].content.contains(generated.trim_end()));
    }
}

#[test]
fn single_iteration_never_calls_feedback() {
    let mock = role_mock(10, SUMMARY);
    let cfg = RunConfig { iterations: 1, ..config(Method::SynthLoop) };
    let result = Engine::new(cfg, &mock).unwrap().run(&train()).unwrap();
    assert!(mock.calls().iter().all(|c| matches!(caller(&c.conversation), Caller::Generation)));
    assert_eq!(result.histories[0].0.roles(), roles("s,u,a"));
    assert_eq!(result.histories[0].1.roles(), roles("s"));
}

#[test]
fn only_final_turn_rows_are_kept() {
    // turns give 5, 7 and 9 rows
    let mock = ScriptedMock::from_fn(|i, conv, _| {
        Some(match caller(conv) {
            Caller::Generation => rows(i, 5 + i),
            _ => "More variety.".to_string(),
        })
    });
    let cfg = RunConfig { n_total_target: 9, ..config(Method::SynthLoop) };
    let result = Engine::new(cfg, &mock).unwrap().run(&train()).unwrap();
    assert_eq!(result.synthetic.len(), 9);
    let kept: Vec<_> = result.parse_reports.iter().map(|r| (r.turn, r.accepted, r.kept)).collect();
    assert_eq!(kept, [(1, 5, false), (2, 7, false), (3, 9, true)]);
    assert_eq!(result.rows_by_phase()[&Phase::Generation], 9);
}

#[test]
fn synthloop_restarts_until_target() {
    let mock = role_mock(60, SUMMARY);
    let cfg = RunConfig { n_total_target: 100, n_requested_per_call: 60, ..config(Method::SynthLoop) };
    let result = Engine::new(cfg, &mock).unwrap().run(&train()).unwrap();
    assert_eq!(result.runs_executed, 2);
    assert_eq!(result.n_generated, 120);
    assert_eq!(result.synthetic.len(), 100);
    assert!(!result.truncated);

    let calls = mock.calls();
    let run_starts: Vec<_> = calls
        .iter()
        .filter(|c| matches!(caller(&c.conversation), Caller::Generation) && c.conversation.len() == 2)
        .collect();
    assert_eq!(run_starts.len(), 2, "run 2 restarts from a two-message history");
    assert_ne!(run_starts[0].digest, run_starts[1].digest, "fresh few-shots per run");
    assert_ne!(run_starts[0].conversation.messages()[1], run_starts[1].conversation.messages()[1]);
    assert_eq!(run_starts[0].conversation.messages()[0], run_starts[1].conversation.messages()[0]);
}

#[test]
fn histories_only_grow_within_a_run() {
    let mock = role_mock(10, SUMMARY);
    let cfg = RunConfig { n_total_target: 20, ..config(Method::SynthLoop) };
    Engine::new(cfg, &mock).unwrap().run(&train()).unwrap();
    let calls = mock.calls();
    for (i, a) in calls.iter().enumerate() {
        for b in &calls[i + 1..] {
            let same_thread = a.conversation.messages()[..2.min(a.conversation.len())]
                == b.conversation.messages()[..2.min(b.conversation.len())];
            if same_thread && b.conversation.len() > a.conversation.len() {
                assert!(a.conversation.is_prefix_of(&b.conversation));
            }
        }
    }
}

#[test]
fn run_cap_flags_truncation() {
    let mock = role_mock(4, SUMMARY);
    let cfg = RunConfig { n_total_target: 100, max_runs: Some(3), ..config(Method::SynthLoop) };
    let result = Engine::new(cfg, &mock).unwrap().run(&train()).unwrap();
    assert_eq!(result.runs_executed, 3);
    assert_eq!(result.synthetic.len(), 12);
    assert!(result.truncated);
}

#[test]
fn parallel_runs_match_sequential_runs() {
    let cfg = RunConfig { n_total_target: 40, ..config(Method::SynthLoop) };
    let mk = || {
        ScriptedMock::from_fn(|_, conv, _| {
            // content derived from the request only, so arrival order does not matter
            let salt = conv.messages()[1].content.len() + conv.len();
            Some(match caller(conv) {
                Caller::Generation => rows(salt, 10),
                _ => format!("feedback {salt}"),
            })
        })
    };
    let seq_mock = mk();
    let seq = Engine::new(cfg.clone(), &seq_mock).unwrap().run(&train()).unwrap();
    let par_mock = mk();
    let par = Engine::new(RunConfig { jobs: 4, ..cfg }, &par_mock).unwrap().run(&train()).unwrap();
    assert_eq!(write_csv_string(&seq.synthetic), write_csv_string(&par.synthetic));
    assert_eq!(seq.call_log, par.call_log);
}

#[test]
fn reducedloop_resubmits_the_same_request() {
    for iterations in [1, 3] {
        let mock = role_mock(4, SUMMARY);
        let cfg = RunConfig { iterations, n_total_target: 20, ..config(Method::ReducedLoop) };
        let result = Engine::new(cfg, &mock).unwrap().run(&train()).unwrap();
        let phase1: Vec<_> = result.call_log.iter().filter(|c| c.phase == Phase::Generation).collect();
        let phase2: Vec<_> = result.call_log.iter().filter(|c| c.phase == Phase::Resubmission).collect();
        assert_eq!(phase2.len(), 4, "4 rows from phase 1, then 4 per resubmission");
        let digests: BTreeSet<_> = phase2.iter().map(|c| c.digest.as_str()).collect();
        assert_eq!(digests.len(), 1);
        assert_eq!(phase1.last().unwrap().digest, phase2[0].digest);
        assert_eq!(phase1[0].digest == phase2[0].digest, iterations == 1);
        // history frozen after phase 1
        assert_eq!(result.histories[0].0.len(), 2 * iterations + 1);
        assert_eq!(result.synthetic.len(), 20);

        let calls = mock.calls();
        let resubmitted: Vec<_> = calls.iter().filter(|c| c.digest == phase2[0].digest).collect();
        assert!(resubmitted.windows(2).all(|w| w[0].conversation == w[1].conversation));
    }
}

#[test]
fn prompt_refine_reuses_refined_prompt() {
    let mock = role_mock(5, SUMMARY);
    let cfg = RunConfig { n_total_target: 25, ..config(Method::PromptRefine) };
    let engine = Engine::new(cfg, &mock).unwrap();
    let result = engine.run(&train()).unwrap();
    let refined = result.refined_prompt.clone().unwrap();
    assert!(!refined.placeholder_appended);
    assert_eq!(refined.template, SUMMARY);
    assert!(refined.template.contains("Ensure all generated examples are unique."));

    let calls = mock.calls();
    let summary: Vec<_> = calls.iter().filter(|c| matches!(caller(&c.conversation), Caller::Summary)).collect();
    assert_eq!(summary.len(), 1);
    let request = &summary[0].conversation.messages()[1].content;
    let (gen, _) = &result.histories[0];
    for m in gen.messages() {
        assert!(request.contains(m.content.trim_end()));
    }
    assert!(request.contains("[FEEDBACK 2]") && request.contains("[GENERATION 3]"));

    let phase3: Vec<_> = calls
        .iter()
        .filter(|c| matches!(caller(&c.conversation), Caller::Generation) && !c.conversation.messages()[1].content.starts_with("Here are"))
        .collect();
    assert_eq!(phase3.len(), 4, "5 rows from phase 1, 5 per call");
    let system = &gen.messages()[0];
    let mut blocks = BTreeSet::new();
    for c in &phase3 {
        assert_eq!(c.conversation.len(), 2);
        assert_eq!(&c.conversation.messages()[0], system);
        let prompt = &c.conversation.messages()[1].content;
        let (head, tail) = refined.template.split_once(FEW_SHOTS_TOKEN).unwrap();
        // only the few-shot block differs between calls
        assert!(prompt.starts_with(head) && prompt.ends_with(tail));
        let block = &prompt[head.len()..prompt.len() - tail.len()];
        assert!(block.starts_with("age,job,hours,y\n"));
        assert_eq!(block.lines().count(), 1 + 2 * 3);
        blocks.insert(block.to_string());
    }
    assert_eq!(blocks.len(), phase3.len(), "fresh few-shots for every call");
    assert_eq!(result.rows_by_phase()[&Phase::Refined], 20);
}

#[test]
fn prompt_refine_appends_missing_placeholder() {
    let mock = role_mock(10, "Generate rows like the original ones.");
    let cfg = RunConfig { n_total_target: 20, ..config(Method::PromptRefine) };
    let result = Engine::new(cfg, &mock).unwrap().run(&train()).unwrap();
    let refined = result.refined_prompt.unwrap();
    assert!(refined.placeholder_appended);
    assert!(refined.template.starts_with("Generate rows like the original ones."));
    assert!(refined.template.ends_with(FEW_SHOTS_TOKEN));
}

#[test]
fn prompt_refine_rejects_empty_summary() {
    let mock = role_mock(10, "   \n");
    let cfg = RunConfig { n_total_target: 20, ..config(Method::PromptRefine) };
    let err = Engine::new(cfg, &mock).unwrap().run(&train()).unwrap_err();
    assert!(matches!(err, EngineError::EmptySummary));
}

#[test]
fn replay_makes_every_method_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for method in [Method::SynthLoop, Method::ReducedLoop, Method::PromptRefine] {
        let cache = dir.path().join(format!("{method}.jsonl"));
        let cfg = RunConfig { n_total_target: 25, ..config(method) };

        let fallback: Box<dyn ChatBackend> = Box::new(role_mock(7, SUMMARY));
        let recording = ReplayBackend::open(&cache, Some(fallback)).unwrap();
        let first = Engine::new(cfg.clone(), &recording).unwrap().run(&train()).unwrap();

        let replay = ReplayBackend::open(&cache, None).unwrap();
        let second = Engine::new(cfg.clone(), &replay).unwrap().run(&train()).unwrap();
        assert_eq!(write_csv_string(&first.synthetic), write_csv_string(&second.synthetic), "{method}");
        assert_eq!(first.call_log, second.call_log);

        let mut a = RunManifest::new(&cfg, &first);
        let mut b = RunManifest::new(&cfg, &second);
        a.created_at.clear();
        b.created_at.clear();
        assert_eq!(a.to_json_pretty(), b.to_json_pretty());
    }
}

#[test]
fn manifest_lists_digests_and_counts() {
    let mock = role_mock(10, SUMMARY);
    let cfg = config(Method::PromptRefine);
    let result = Engine::new(cfg.clone(), &mock).unwrap().run(&train()).unwrap();
    let json: serde_json::Value = serde_json::from_str(&RunManifest::new(&cfg, &result).to_json_pretty()).unwrap();
    assert_eq!(json["method"], "promptrefine");
    assert_eq!(json["calls"].as_array().unwrap().len(), mock.calls().len());
    assert_eq!(json["rows_by_phase"]["generation"], 10);
    assert_eq!(json["config"]["iterations"], 3);
    assert!(json["refined_prompt"]["template"].as_str().unwrap().contains(FEW_SHOTS_TOKEN));
}
