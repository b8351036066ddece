use std::path::PathBuf;
use std::sync::Arc;

use phonesim::agents::backend::{prompt_sha256, RecordingBackend, Transcript};
use phonesim::agents::m3a::{
    self, build_action_prompt, build_reflection_prompt, parse_action, EMPTY_HISTORY, GUIDELINES,
};
use phonesim::agents::seeact::{self, candidates, choice_label, first_turn_prompt, parse_answer, second_turn_prompt};
use phonesim::agents::{
    factory, Agent, AgentKind, BackendError, HistoryEntry, M3aAgent, M3aConfig, ModelBackend, OracleAgent, PolicyStep,
    RandomAgent, ScriptedBackend, SeeActAgent,
};
use phonesim::harness::{run_episode, DEFAULT_SEED};
use phonesim::screens::{ActionType, AgentAction, Direction, ElementClass, Observation, UIElement};
use phonesim::session::Session;
use phonesim::tasks::{self, cached_registry, find};
use serde_json::Value;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn blessing() -> bool {
    std::env::var_os("PHONESIM_BLESS").is_some()
}

/// Compares `actual` with a checked-in file; `PHONESIM_BLESS=1` rewrites it.
fn golden(rel: &str, actual: &str) {
    let path = fixture(rel);
    if blessing() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing {}; rerun with PHONESIM_BLESS=1", path.display()));
    assert!(expected == actual, "{} differs from the generated text", path.display());
}

// ------------------------------------------------------------------ random

#[test]
fn random_actions_are_valid_on_the_screen_they_see() {
    let mut samples = 0;
    let mut statuses = 0;
    let mut seed = 0;
    while samples < 10_000 {
        for def in cached_registry() {
            let inst = tasks::instantiate(def, seed).unwrap();
            let mut session = Session::new();
            tasks::initialize_task(&inst, &mut session).unwrap();
            let mut agent = RandomAgent::new(99);
            agent.begin(&inst);
            for i in 0..inst.max_steps {
                let obs = session.observe();
                let a = agent.step(&obs, i).action;
                a.validate().unwrap();
                match a.action_type {
                    ActionType::Click | ActionType::LongPress => {
                        let e = &obs.elements[a.index.unwrap()];
                        assert!(e.is_clickable, "{a:?} on a non-clickable element");
                    }
                    ActionType::InputText | ActionType::KeyboardEnter => assert!(obs.focused().is_some()),
                    ActionType::Scroll if matches!(a.direction, Some(Direction::Left | Direction::Right)) => {
                        assert!(obs.elements.iter().any(|e| e.is_scrollable))
                    }
                    ActionType::Status => {
                        assert!(i + 1 >= inst.max_steps, "status at step {i} of {}", inst.max_steps);
                        statuses += 1;
                    }
                    ActionType::Answer | ActionType::Unknown => panic!("random agent produced {a:?}"),
                    _ => {}
                }
                samples += 1;
                session.dispatch(&a).unwrap();
                if session.is_closed() {
                    break;
                }
            }
        }
        seed += 1;
    }
    assert!(statuses > 0, "the final-step status was never drawn");
}

#[test]
fn random_agent_is_reproducible() {
    let def = find("ExpenseAddSingle").unwrap();
    let a = run_episode(&def, &mut RandomAgent::new(5), 12).unwrap();
    let b = run_episode(&def, &mut RandomAgent::new(5), 12).unwrap();
    let c = run_episode(&def, &mut RandomAgent::new(6), 12).unwrap();
    assert_eq!(a.trajectory_digest(), b.trajectory_digest());
    assert_ne!(a.trajectory_digest(), c.trajectory_digest());
}

// ----------------------------------------------------------- golden prompts

/// Home screen and the compose screen of SendSms, seed 30, after the
/// oracle's first two actions.
fn live_observations() -> (String, Observation, Observation) {
    let def = find("SendSms").unwrap();
    let inst = tasks::instantiate(&def, DEFAULT_SEED).unwrap();
    let mut session = Session::new();
    tasks::initialize_task(&inst, &mut session).unwrap();
    let mut oracle = OracleAgent::new();
    oracle.begin(&inst);
    let home = session.observe();
    for i in 0..2 {
        let step = oracle.step(&session.observe(), i);
        session.dispatch(&step.action).unwrap();
    }
    (inst.goal.clone(), home, session.observe())
}

fn pinned() -> (String, Observation, Observation) {
    let (goal, before, after) = live_observations();
    let doc = serde_json::json!({ "goal": goal, "before": before, "after": after });
    golden(
        "prompts/observations.json",
        &(serde_json::to_string_pretty(&doc).unwrap() + "\n"),
    );
    let text = std::fs::read_to_string(fixture("prompts/observations.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    (
        v["goal"].as_str().unwrap().to_string(),
        serde_json::from_value(v["before"].clone()).unwrap(),
        serde_json::from_value(v["after"].clone()).unwrap(),
    )
}

fn sample_history() -> Vec<HistoryEntry> {
    vec![
        HistoryEntry {
            step_index: 0,
            summary: "Opened the messaging app.".into(),
        },
        HistoryEntry {
            step_index: 1,
            summary: "Tapped the compose button; a new message form is shown.".into(),
        },
    ]
}

#[test]
fn m3a_prompts_match_golden_files() {
    let (goal, before, after) = pinned();
    let start = build_action_prompt(&goal, &after, &[], Some(GUIDELINES));
    assert!(start.contains(EMPTY_HISTORY));
    assert!(start.contains("UIelement0: UIElement(text="));
    assert!(start.contains("bbox_pixels=BoundingBox(x_min="));
    assert!(start.ends_with("Reason: ...\nAction: {\"action_type\":...}"));
    golden("prompts/m3a_action_start.txt", &start);

    let with_history = build_action_prompt(&goal, &after, &sample_history(), Some(GUIDELINES));
    assert!(with_history.contains("Step 1- Tapped the compose button"));
    golden("prompts/m3a_action_history.txt", &with_history);

    let simple_history = [HistoryEntry {
        step_index: 0,
        summary: format!(
            "Action taken: {}",
            AgentAction::open_app("Simple SMS Messenger").to_json()
        ),
    }];
    let simple = build_action_prompt(&goal, &after, &simple_history, None);
    assert!(!simple.contains(GUIDELINES.trim()));
    golden("prompts/m3a_simple_action.txt", &simple);

    let step = PolicyStep::new(
        AgentAction::click(before.elements[0].index),
        "Start from the first icon.",
    );
    let reflection = build_reflection_prompt(&goal, &before, &after, &step);
    assert!(reflection.ends_with("Summary of this step: "));
    golden("prompts/m3a_reflection.txt", &reflection);
}

#[test]
fn seeact_prompts_match_golden_files() {
    let (goal, _, after) = pinned();
    let first = first_turn_prompt(&goal, &[], &after);
    assert!(first.starts_with("> Role: SYSTEM\n"));
    assert!(first.contains("Screen description:\n"));
    golden("prompts/seeact_first.txt", &first);
    let second = second_turn_prompt(&first, "I should type the message body.", &after);
    assert!(second.contains("> Role: ASSISTANT\nI should type the message body."));
    assert!(second.contains("please select Z"));
    let (cands, overflow) = candidates(&after);
    assert_eq!(overflow, 0);
    for (i, e) in cands.iter().enumerate() {
        assert!(second.contains(&format!("{}. {}\n", choice_label(i), seeact::describe_choice(e))));
    }
    golden("prompts/seeact_second.txt", &second);
}

#[test]
fn pinned_observation_matches_the_simulator() {
    let (goal, before, after) = live_observations();
    let (g, b, a) = pinned();
    assert_eq!(
        (goal, before, after),
        (g, b, a),
        "the screens changed; rebless the prompt fixtures"
    );
}

#[test]
fn choice_labels_are_unique_and_skip_bare_z() {
    let labels: Vec<String> = (0..seeact::MAX_CANDIDATES).map(choice_label).collect();
    let set: std::collections::BTreeSet<_> = labels.iter().collect();
    assert_eq!(set.len(), labels.len());
    assert!(!labels.iter().any(|l| l == "Z"));
}

// ------------------------------------------------------- transcript replay

fn transcript() -> Transcript {
    serde_json::from_str(&std::fs::read_to_string(fixture("transcripts/m3a_send_sms.json")).unwrap()).unwrap()
}

#[test]
fn m3a_replays_the_send_sms_transcript() {
    let t = transcript();
    let known: std::collections::HashSet<String> = t.entries.iter().map(|e| e.prompt_sha256.clone()).collect();
    let def = find("SendSms").unwrap();
    let mut digests = Vec::new();
    for _ in 0..2 {
        let recorder = Arc::new(RecordingBackend::new(ScriptedBackend::from_transcript(&t)));
        let backend: Arc<dyn ModelBackend> = recorder.clone();
        let mut agent = M3aAgent::new(backend, M3aConfig::default());
        let r = run_episode(&def, &mut agent, DEFAULT_SEED).unwrap();
        assert_eq!(r.reward, 1.0);
        assert!(r.steps_taken <= r.max_steps);
        let seen = recorder.entries();
        assert_eq!(seen.len(), t.entries.len());
        for e in &seen {
            assert!(
                known.contains(&e.prompt_sha256),
                "prompt not in the transcript; fallback was used"
            );
        }
        digests.push(r.trajectory_digest());
    }
    assert_eq!(digests[0], digests[1]);

    // the same transcript through the factory
    let f = factory(AgentKind::M3a, Some(Arc::new(ScriptedBackend::from_transcript(&t))));
    let r = run_episode(&def, f().as_mut(), DEFAULT_SEED).unwrap();
    assert_eq!(r.trajectory_digest(), digests[0]);
}

#[test]
fn transcript_has_no_unused_entries() {
    let t = transcript();
    let hashes: Vec<_> = t.entries.iter().map(|e| e.prompt_sha256.as_str()).collect();
    let mut dedup = hashes.clone();
    dedup.sort();
    dedup.dedup();
    assert_eq!(dedup.len(), hashes.len());
    assert!(hashes.iter().all(|h| h.len() == 64));
    assert_eq!(prompt_sha256("").len(), 64);
}

#[test]
fn m3a_on_an_empty_transcript_waits_out_the_budget() {
    let def = find("SendSms").unwrap();
    let f = factory(AgentKind::M3a, Some(Arc::new(ScriptedBackend::empty())));
    let r = run_episode(&def, f().as_mut(), DEFAULT_SEED).unwrap();
    assert_eq!(r.reward, 0.0);
    assert_eq!(r.steps_taken, r.max_steps);
    assert!(r.trajectory.iter().all(|s| s.action == AgentAction::wait()));
}

// ---------------------------------------------------------------- history

struct Counter(std::sync::atomic::AtomicUsize);

impl ModelBackend for Counter {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let n = self.0.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        if prompt.ends_with("Summary of this step: ") {
            if n == 5 {
                return Err(BackendError("timeout".into()));
            }
            return Ok(format!("summary {n}"));
        }
        Ok("Reason: look around\nAction: {\"action_type\":\"scroll\",\"direction\":\"down\"}".into())
    }
}

#[test]
fn reflection_builds_history() {
    let def = find("SendSms").unwrap();
    let inst = tasks::instantiate(&def, 1).unwrap();
    let mut session = Session::new();
    tasks::initialize_task(&inst, &mut session).unwrap();
    let backend: Arc<dyn ModelBackend> = Arc::new(Counter(0.into()));
    let mut agent = M3aAgent::new(backend, M3aConfig::default());
    agent.begin(&inst);
    for i in 0..3 {
        let before = session.observe();
        let step = agent.step(&before, i);
        assert_eq!(step.action, AgentAction::scroll(Direction::Down));
        let res = session.dispatch(&step.action).unwrap();
        agent.after_step(&before, Some(&session.observe()), &step, &res);
    }
    let h = agent.history();
    assert_eq!(h.len(), 3);
    assert_eq!(h[0].summary, "summary 1");
    assert_eq!(h[1].summary, "summary 3");
    assert_eq!(h[2].summary, "step 2: no summary (backend error)");
    let prompt = agent.action_prompt(&session.observe());
    assert!(prompt.contains("Step 0- summary 1\nStep 1- summary 3\nStep 2- step 2: no summary"));
}

#[test]
fn simple_variant_records_raw_actions() {
    let def = find("SendSms").unwrap();
    let inst = tasks::instantiate(&def, 1).unwrap();
    let mut session = Session::new();
    tasks::initialize_task(&inst, &mut session).unwrap();
    let calls = Arc::new(std::sync::atomic::AtomicUsize::new(0));
    let c = calls.clone();
    let backend: Arc<dyn ModelBackend> = Arc::new(move |_: &str| {
        c.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        "Action: {\"action_type\":\"navigate_home\"}".to_string()
    });
    let mut agent = M3aAgent::new(backend, M3aConfig::simple());
    agent.begin(&inst);
    for i in 0..2 {
        let before = session.observe();
        let step = agent.step(&before, i);
        let res = session.dispatch(&step.action).unwrap();
        agent.after_step(&before, Some(&session.observe()), &step, &res);
    }
    assert_eq!(
        calls.load(std::sync::atomic::Ordering::SeqCst),
        2,
        "no reflection calls"
    );
    assert_eq!(
        agent.history()[1].summary,
        "Action taken: {\"action_type\":\"navigate_home\"}"
    );
    assert_eq!(agent.name(), "m3a_simple");
}

#[test]
fn seeact_clicks_before_typing_into_an_unfocused_field() {
    let (_, _, after) = live_observations();
    let (cands, _) = candidates(&after);
    let field = cands
        .iter()
        .position(|e| e.class_name == ElementClass::EditText && !e.is_focused)
        .expect("compose screen has an unfocused field");
    let label = choice_label(field);
    let reply = format!("ELEMENT: {label}\nACTION: INPUT TEXT\nVALUE: hello there");
    let backend: Arc<dyn ModelBackend> = Arc::new(move |p: &str| {
        if p.contains("> Role: ASSISTANT") {
            reply.clone()
        } else {
            "The field needs text.".to_string()
        }
    });
    let def = find("SendSms").unwrap();
    let inst = tasks::instantiate(&def, DEFAULT_SEED).unwrap();
    let mut agent = SeeActAgent::new(backend);
    agent.begin(&inst);
    let first = agent.step(&after, 0);
    assert_eq!(first.action, AgentAction::click(cands[field].index));
    let second = agent.step(&after, 1);
    assert_eq!(second.action, AgentAction::input_text("hello there"));
}

// ------------------------------------------------------ adversarial parsers

/// `(model output, expected action)` pairs; `None` expects `unknown`.
fn corpus(name: &str) -> Vec<(String, Option<AgentAction>)> {
    let text = std::fs::read_to_string(fixture(&format!("parsers/{name}.json"))).unwrap();
    let cases: Vec<Value> = serde_json::from_str(&text).unwrap();
    cases
        .into_iter()
        .map(|c| {
            let expect = (!c["expect"].is_null()).then(|| serde_json::from_value(c["expect"].clone()).unwrap());
            (c["output"].as_str().unwrap().to_string(), expect)
        })
        .collect()
}

#[test]
fn m3a_parser_is_total() {
    let corpus = corpus("m3a");
    assert_eq!(corpus.len(), 50);
    for (i, (text, want)) in corpus.iter().enumerate() {
        let got = std::panic::catch_unwind(|| parse_action(text)).unwrap_or_else(|_| panic!("case {i} panicked"));
        got.action.validate().unwrap();
        match want {
            Some(a) => assert_eq!(&got.action, a, "case {i}"),
            None => {
                assert_eq!(
                    got.action.action_type,
                    ActionType::Unknown,
                    "case {i}: {:?}",
                    got.action
                );
                assert_eq!(got.reason, *text, "case {i}: raw output kept");
            }
        }
    }
}

fn button(index: usize, text: &str, class: ElementClass, focused: bool) -> UIElement {
    UIElement {
        index,
        text: Some(text.into()),
        content_description: None,
        class_name: class,
        bbox: phonesim::screens::BBox {
            x_min: 0,
            y_min: 0,
            x_max: 10,
            y_max: 10,
        },
        is_clickable: true,
        is_scrollable: false,
        is_focused: focused,
        is_checked: false,
    }
}

#[test]
fn seeact_parser_is_total() {
    let els = [
        button(4, "Send", ElementClass::Button, false),
        button(7, "To", ElementClass::EditText, false),
        button(9, "Body", ElementClass::EditText, true),
    ];
    let cands: Vec<&UIElement> = els.iter().collect();
    // the seeact corpus is written against these three choices: A, B, C
    let corpus = corpus("seeact");
    assert_eq!(corpus.len(), 50);
    for (i, (text, want)) in corpus.iter().enumerate() {
        let d = std::panic::catch_unwind(|| parse_answer(text, &cands)).unwrap_or_else(|_| panic!("case {i} panicked"));
        d.action.validate().unwrap();
        if let Some(then) = &d.then {
            then.validate().unwrap();
        }
        match want {
            Some(a) => assert_eq!(&d.action, a, "case {i}: {text:?}"),
            None => assert_eq!(
                d.action.action_type,
                ActionType::Unknown,
                "case {i}: {text:?} gave {:?}",
                d.action
            ),
        }
    }
}

#[test]
fn parsers_never_panic_on_arbitrary_text() {
    let mut runner = proptest::test_runner::TestRunner::default();
    let els = [button(1, "x", ElementClass::Button, false)];
    let cands: Vec<&UIElement> = els.iter().collect();
    runner
        .run(
            &"(Reason:|Action:|ELEMENT:|ACTION:|VALUE:|[{}\"\\\\ a-zA-Z0-9\n:,_]){0,40}",
            |s| {
                parse_action(&s).action.validate().unwrap();
                parse_answer(&s, &cands).action.validate().unwrap();
                Ok(())
            },
        )
        .unwrap();
    let _ = m3a::describe_element(&els[0]);
}
