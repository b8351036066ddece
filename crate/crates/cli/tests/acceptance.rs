//! One line per acceptance criterion. Runs as a plain binary
//! (`harness = false`) and exits non-zero if any criterion fails.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use chrono::{DateTime, Utc};
use phonesim::agents::backend::Transcript;
use phonesim::agents::m3a::{build_action_prompt, build_reflection_prompt, parse_action, GUIDELINES};
use phonesim::agents::seeact::{first_turn_prompt, parse_answer, second_turn_prompt};
use phonesim::agents::{factory, Agent, AgentKind, HistoryEntry, OracleAgent, PolicyStep, ScriptedBackend};
use phonesim::device::{FieldKind, Predicate, Scalar, SettingValue, Write};
use phonesim::harness::{robustness_experiment, run_episode, run_suite, wilson_interval, DEFAULT_SEED};
use phonesim::ir::{score_answer, MatchType};
use phonesim::screens::{ActionType, AgentAction, ElementClass, Observation, UIElement};
use phonesim::session::Session;
use phonesim::tasks::{self, cached_registry, compose, find, leaf_definition, TaskDefinition, TaskInstance, TaskKind};
use phonesim::wire::{Connection, RpcResponse};
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)*));
        }
    };
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn read(rel: &str) -> Result<String, String> {
    std::fs::read_to_string(fixtures().join(rel)).map_err(|e| format!("{rel}: {e}"))
}

fn solved(def: &TaskDefinition, seed: u64) -> (TaskInstance, Session) {
    let inst = tasks::instantiate(def, seed).expect("instantiate");
    let mut session = Session::new();
    tasks::initialize_task(&inst, &mut session).expect("initialize");
    let mut agent = OracleAgent::new();
    agent.begin(&inst);
    for i in 0..inst.max_steps {
        let step = agent.step(&session.observe(), i);
        session.dispatch(&step.action).expect("open session");
        if session.is_closed() {
            break;
        }
    }
    (inst, session)
}

fn c1_oracle() -> Check {
    let seeds: Vec<u64> = (0..20).map(|i| DEFAULT_SEED + i).collect();
    let t = Instant::now();
    let rep = run_suite(
        cached_registry(),
        &factory(AgentKind::Oracle, None),
        "oracle",
        &seeds,
        1,
    );
    let secs = t.elapsed().as_secs_f64();
    ensure!(rep.episodes.len() == 240, "{} episodes", rep.episodes.len());
    ensure!(rep.overall.success_rate == 1.0, "SR {}", rep.overall.success_rate);
    ensure!(secs < 60.0, "took {secs:.1}s");
    Ok(format!("12 tasks x 20 seeds, SR 1.0 in {secs:.2}s"))
}

fn c2_determinism() -> Check {
    let seeds: Vec<u64> = (0..20).map(|i| DEFAULT_SEED + i).collect();
    let f = factory(AgentKind::Oracle, None);
    let a = run_suite(cached_registry(), &f, "oracle", &seeds, 1);
    let b = run_suite(cached_registry(), &f, "oracle", &seeds, 4);
    ensure!(a.deterministic_json() == b.deterministic_json(), "reports differ");
    let da: Vec<String> = a.episodes.iter().map(|e| e.trajectory_digest()).collect();
    let db: Vec<String> = b.episodes.iter().map(|e| e.trajectory_digest()).collect();
    ensure!(da == db, "trajectory digests differ");
    Ok(format!(
        "{} byte-identical report bytes, {} digests equal",
        a.deterministic_json().len(),
        da.len()
    ))
}

fn c3_mutations() -> Check {
    let mut cases = 0;
    for def in cached_registry().iter().filter(|d| d.kind == TaskKind::TC) {
        for seed in 0..10 {
            let (inst, done) = solved(def, seed);
            ensure!(
                tasks::is_successful(&inst, &done) == 1.0,
                "{} seed {seed} not solved",
                def.name
            );
            for m in tasks::mutations(&inst) {
                let mut s = done.clone();
                (m.apply)(&mut s);
                let r = tasks::is_successful(&inst, &s);
                let flipped = if def.is_composite() { r < 1.0 } else { r == 0.0 };
                ensure!(flipped, "{} seed {seed}: '{}' kept reward {r}", def.name, m.label);
                cases += 1;
            }
        }
    }
    ensure!(cases >= 200, "only {cases} cases");
    Ok(format!("{cases} mutation cases, 0 false accepts"))
}

fn c4_init() -> Check {
    let mut n = 0;
    for def in cached_registry().iter().filter(|d| d.kind == TaskKind::TC) {
        for seed in 0..50 {
            let inst = tasks::instantiate(def, seed).map_err(|e| e.to_string())?;
            let mut s = Session::new();
            tasks::initialize_task(&inst, &mut s).map_err(|e| e.to_string())?;
            ensure!(
                tasks::is_successful(&inst, &s) == 0.0,
                "{} seed {seed} starts solved",
                def.name
            );
            n += 1;
        }
    }
    Ok(format!("{n} initialized instances all score 0"))
}

fn c5_composite() -> Check {
    let def = find("TurnOnWifiAndOpenApp").map_err(|e| e.to_string())?;
    let inst = tasks::instantiate(&def, DEFAULT_SEED).map_err(|e| e.to_string())?;
    let app = inst.param_str("app_name").to_string();
    for (wifi, open) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let mut s = Session::new();
        tasks::initialize_task(&inst, &mut s).map_err(|e| e.to_string())?;
        if wifi == 1 {
            s.device
                .apply(&Write::set_setting("wifi", SettingValue::Bool(true)))
                .unwrap();
        }
        if open == 1 {
            s.dispatch(&AgentAction::open_app(&app)).unwrap();
        }
        let r = tasks::is_successful(&inst, &s);
        let want = (wifi + open) as f64 / 2.0;
        ensure!(r == want, "wifi={wifi} app={open}: {r} != {want}");
    }
    let three = compose(
        "WifiAppSms",
        vec![
            leaf_definition("TurnOnWifi").unwrap(),
            leaf_definition("OpenApp").unwrap(),
            leaf_definition("SendSms").unwrap(),
        ],
    )
    .map_err(|e| e.to_string())?;
    let inst = tasks::instantiate(&three, DEFAULT_SEED).map_err(|e| e.to_string())?;
    for mask in 0u8..8 {
        let mut s = Session::new();
        tasks::initialize_task(&inst, &mut s).map_err(|e| e.to_string())?;
        if mask & 4 != 0 {
            let p = &inst.parts[2];
            let fields = [
                ("number".to_string(), Scalar::str(p.param_str("number"))),
                ("body".to_string(), Scalar::str(p.param_str("message"))),
                ("sent_at".to_string(), Scalar::str("2023-10-15T15:34:00Z")),
            ];
            s.device
                .apply(&Write::insert_row("messaging", "sms", fields.into_iter().collect()))
                .unwrap();
        }
        if mask & 1 != 0 {
            s.device
                .apply(&Write::set_setting("wifi", SettingValue::Bool(true)))
                .unwrap();
        }
        if mask & 2 != 0 {
            s.dispatch(&AgentAction::open_app(inst.parts[1].param_str("app_name")))
                .unwrap();
        }
        let r = tasks::is_successful(&inst, &s);
        let want = mask.count_ones() as f64 / 3.0;
        ensure!((r - want).abs() < 1e-12, "mask {mask:03b}: {r} != {want}");
    }
    Ok("{0,1}^2 and {0,1}^3 follow the mean; (1,0) -> 0.5".into())
}

fn c6_clock() -> Check {
    let want: DateTime<Utc> = "2023-10-15T15:34:00Z".parse().unwrap();
    let mut s = Session::new();
    for def in cached_registry() {
        let inst = tasks::instantiate(def, 3).map_err(|e| e.to_string())?;
        s.reset();
        ensure!(s.device.clock == want, "clock {} after reset", s.device.clock);
        tasks::initialize_task(&inst, &mut s).map_err(|e| e.to_string())?;
        ensure!(s.device.clock == want, "{} moved the clock", def.name);
        s.device.clock += chrono::Duration::days(1);
    }
    Ok(format!("{want} on every reset"))
}

fn c7_wilson() -> Check {
    let mut n_points = 0;
    for n in [1u64, 3, 7, 10, 20, 25, 50, 100, 400, 1000] {
        for z in [1.0, 1.645, 1.96, 2.326, 2.576] {
            let s = (n * (n_points as u64 % 5)) / 4;
            let ci = wilson_interval(s, n, z).map_err(|e| e.to_string())?;
            // roots of (n + z^2) p^2 - (2s + z^2) p + s^2/n = 0
            let (sf, nf) = (s as f64, n as f64);
            let a = nf + z * z;
            let b = 2.0 * sf + z * z;
            let d = (b * b - 4.0 * a * sf * sf / nf).max(0.0).sqrt();
            let (lo, hi) = (((b - d) / (2.0 * a)).max(0.0), ((b + d) / (2.0 * a)).min(1.0));
            ensure!(
                (ci.low - lo).abs() < 1e-9 && (ci.high - hi).abs() < 1e-9,
                "s={s} n={n} z={z}"
            );
            n_points += 1;
        }
    }
    let ci = wilson_interval(0, 20, 1.96).map_err(|e| e.to_string())?;
    ensure!(
        ci.low.abs() < 1e-3 && (ci.high - 0.1611).abs() < 1e-3,
        "(0,20) -> [{}, {}]",
        ci.low,
        ci.high
    );
    Ok(format!(
        "{n_points} grid points within 1e-9; (0,20) -> [{:.4}, {:.4}]",
        ci.low, ci.high
    ))
}

fn c8_robustness() -> Check {
    let f = factory(AgentKind::Planted, None);
    let mut lines = Vec::new();
    let mut any_significant = false;
    for name in ["ExpenseAddSingle", "MarkorEditNote"] {
        let def = find(name).map_err(|e| e.to_string())?;
        let rep = robustness_experiment(&def, &f, "planted", 20, DEFAULT_SEED, 2).map_err(|e| e.to_string())?;
        let fixed = rep.fixed.success_rate;
        let varied = rep.varied.success_rate;
        ensure!(fixed == 0.0 || fixed == 1.0, "{name}: fixed SR {fixed}");
        ensure!(varied > 0.0 && varied < 1.0, "{name}: varied SR {varied}");
        ensure!(rep.render().matches("95% CI").count() == 2, "{name}: render lacks CIs");
        any_significant |= rep.test.p_value < 0.05;
        lines.push(format!(
            "{name} fixed {:.0}% varied {:.0}% p={:.4}",
            fixed * 100.0,
            varied * 100.0,
            rep.test.p_value
        ));
    }
    ensure!(any_significant, "no configuration reached p < 0.05: {lines:?}");
    Ok(lines.join("; "))
}

fn c9_ir() -> Check {
    let monday = chrono::NaiveDate::from_ymd_opt(2023, 10, 9).unwrap();
    let sunday = chrono::NaiveDate::from_ymd_opt(2023, 10, 15).unwrap();
    for name in ["SimpleCalendarEventsOnDate", "SportsTrackerActivitiesCountForWeek"] {
        let def = find(name).map_err(|e| e.to_string())?;
        for seed in 0..100 {
            let inst = tasks::instantiate(&def, seed).map_err(|e| e.to_string())?;
            let mut s = Session::new();
            tasks::initialize_task(&inst, &mut s).map_err(|e| e.to_string())?;
            let expected = inst.setup.answer.as_ref().ok_or("no answer")?;
            let brute = if name == "SimpleCalendarEventsOnDate" {
                let date = Scalar::parse(FieldKind::Date, inst.param_str("date")).unwrap();
                let rows = s.device.query("calendar", "events", &Predicate::All).unwrap();
                let titles: Vec<&str> = rows
                    .iter()
                    .filter(|r| r.get("start_date") == Some(&date))
                    .map(|r| r.get("title").unwrap().as_str().unwrap())
                    .collect();
                titles.join(", ")
            } else {
                let rows = s.device.query("tracker", "activities", &Predicate::All).unwrap();
                rows.iter()
                    .filter(|r| r.get("category").and_then(Scalar::as_str) == Some(inst.param_str("category")))
                    .filter(|r| {
                        r.get("date")
                            .and_then(Scalar::as_date)
                            .is_some_and(|d| d >= monday && d <= sunday)
                    })
                    .count()
                    .to_string()
            };
            ensure!(
                score_answer(&brute, &expected.text, expected.match_type) == 1.0,
                "{name} seed {seed}: {brute} vs {}",
                expected.text
            );
        }
    }
    let want = "Data Dive, Sync, Team Standup";
    ensure!(
        score_answer("team standup,SYNC, data dive", want, MatchType::StringMatch) == 1.0,
        "reordered list rejected"
    );
    ensure!(
        score_answer("Sync, Data Dive", want, MatchType::StringMatch) == 0.0,
        "partial list accepted"
    );
    Ok("2 IR tasks x 100 seeds match brute force; reordered/case-varied lists accepted".into())
}

fn c10_wire() -> Check {
    let server = support::Server::start();
    let reward = support::play_over_tcp(&server.addr, "SendSms", DEFAULT_SEED)?;
    ensure!(reward == 1.0, "reward {reward} over TCP");
    let mut lines = 0;
    for name in ["send_sms.jsonl", "errors.jsonl", "budget.jsonl", "annotate.jsonl"] {
        let text = read(&format!("protocol/{name}"))?;
        let mut conn = Connection::standalone();
        let mut pending = None;
        for line in text.lines() {
            if let Some(req) = line.strip_prefix("> ") {
                pending = Some(conn.handle_line(req));
            } else if let Some(want) = line.strip_prefix("< ") {
                let got = pending.take().ok_or(format!("{name}: response without request"))?;
                ensure!(got == want, "{name}: response differs at line {}", lines + 1);
                let parsed: RpcResponse = serde_json::from_str(want).map_err(|e| e.to_string())?;
                ensure!(parsed.to_line() == want, "{name}: line does not round-trip");
                lines += 1;
            }
        }
    }
    Ok(format!(
        "external client reward 1.0 over {}; {lines} fixture lines byte-exact",
        server.addr
    ))
}

fn pinned() -> Result<(String, Observation, Observation), String> {
    let v: Value = serde_json::from_str(&read("prompts/observations.json")?).map_err(|e| e.to_string())?;
    let obs = |k: &str| serde_json::from_value::<Observation>(v[k].clone()).map_err(|e| e.to_string());
    Ok((
        v["goal"].as_str().unwrap_or_default().to_string(),
        obs("before")?,
        obs("after")?,
    ))
}

fn c11_m3a() -> Check {
    // transcript replay
    let t: Transcript = serde_json::from_str(&read("transcripts/m3a_send_sms.json")?).map_err(|e| e.to_string())?;
    let def = find("SendSms").map_err(|e| e.to_string())?;
    let mut digests = Vec::new();
    for _ in 0..2 {
        let f = factory(AgentKind::M3a, Some(Arc::new(ScriptedBackend::from_transcript(&t))));
        let r = run_episode(&def, f().as_mut(), DEFAULT_SEED).map_err(|e| e.to_string())?;
        ensure!(r.reward == 1.0, "replay reward {}", r.reward);
        digests.push(r.trajectory_digest());
    }
    ensure!(digests[0] == digests[1], "replay not reproducible");

    // golden prompts
    let (goal, before, after) = pinned()?;
    let history = vec![
        HistoryEntry {
            step_index: 0,
            summary: "Opened the messaging app.".into(),
        },
        HistoryEntry {
            step_index: 1,
            summary: "Tapped the compose button; a new message form is shown.".into(),
        },
    ];
    let simple_history = [HistoryEntry {
        step_index: 0,
        summary: format!(
            "Action taken: {}",
            AgentAction::open_app("Simple SMS Messenger").to_json()
        ),
    }];
    let step = PolicyStep::new(
        AgentAction::click(before.elements[0].index),
        "Start from the first icon.",
    );
    let first = first_turn_prompt(&goal, &[], &after);
    let goldens = [
        (
            "m3a_action_start.txt",
            build_action_prompt(&goal, &after, &[], Some(GUIDELINES)),
        ),
        (
            "m3a_action_history.txt",
            build_action_prompt(&goal, &after, &history, Some(GUIDELINES)),
        ),
        (
            "m3a_simple_action.txt",
            build_action_prompt(&goal, &after, &simple_history, None),
        ),
        (
            "m3a_reflection.txt",
            build_reflection_prompt(&goal, &before, &after, &step),
        ),
        (
            "seeact_second.txt",
            second_turn_prompt(&first, "I should type the message body.", &after),
        ),
        ("seeact_first.txt", first),
    ];
    for (file, text) in &goldens {
        ensure!(read(&format!("prompts/{file}"))? == *text, "golden {file} differs");
    }

    // parser corpora
    let load = |name: &str| -> Result<Vec<(String, Value)>, String> {
        let cases: Vec<Value> =
            serde_json::from_str(&read(&format!("parsers/{name}.json"))?).map_err(|e| e.to_string())?;
        Ok(cases
            .into_iter()
            .map(|c| {
                (
                    c["output"].as_str().unwrap_or_default().to_string(),
                    c["expect"].clone(),
                )
            })
            .collect())
    };
    let expect = |got: &AgentAction, want: &Value| -> bool {
        if got.validate().is_err() {
            return false;
        }
        match want {
            Value::Null => got.action_type == ActionType::Unknown,
            w => serde_json::from_value::<AgentAction>(w.clone()).is_ok_and(|w| &w == got),
        }
    };
    let m3a = load("m3a")?;
    for (i, (text, want)) in m3a.iter().enumerate() {
        let got = catch_unwind(|| parse_action(text)).map_err(|_| format!("m3a case {i} panicked"))?;
        ensure!(expect(&got.action, want), "m3a case {i}: got {:?}", got.action);
    }
    let els: Vec<UIElement> = [
        (4, "Send", ElementClass::Button, false),
        (7, "To", ElementClass::EditText, false),
        (9, "Body", ElementClass::EditText, true),
    ]
    .into_iter()
    .map(|(index, text, class_name, is_focused)| UIElement {
        index,
        text: Some(text.into()),
        content_description: None,
        class_name,
        bbox: phonesim::screens::BBox {
            x_min: 0,
            y_min: 0,
            x_max: 10,
            y_max: 10,
        },
        is_clickable: true,
        is_scrollable: false,
        is_focused,
        is_checked: false,
    })
    .collect();
    let cands: Vec<&UIElement> = els.iter().collect();
    let seeact = load("seeact")?;
    for (i, (text, want)) in seeact.iter().enumerate() {
        let got = catch_unwind(|| parse_answer(text, &cands)).map_err(|_| format!("seeact case {i} panicked"))?;
        ensure!(expect(&got.action, want), "seeact case {i}: got {:?}", got.action);
    }
    ensure!(
        m3a.len() == 50 && seeact.len() == 50,
        "corpus sizes {} / {}",
        m3a.len(),
        seeact.len()
    );
    Ok(format!(
        "replay reward 1.0 x2 with equal digests; {} goldens match; 50+50 parser cases",
        goldens.len()
    ))
}

fn c12_budgets() -> Check {
    for def in cached_registry() {
        ensure!(
            def.max_steps() == 2 * def.oracle_steps,
            "{}: {} != 2 x {}",
            def.name,
            def.max_steps(),
            def.oracle_steps
        );
    }
    let sms = find("SendSms").map_err(|e| e.to_string())?;
    let seeds: Vec<u64> = (0..100).collect();
    let rep = run_suite(
        std::slice::from_ref(&sms),
        &factory(AgentKind::Random, None),
        "random",
        &seeds,
        4,
    );
    ensure!(
        rep.overall.success_rate <= 0.05,
        "random SR {}",
        rep.overall.success_rate
    );
    ensure!(
        rep.episodes.iter().all(|e| e.steps_taken <= e.max_steps),
        "budget exceeded"
    );
    Ok(format!(
        "max_steps = 2 x oracle_steps for 12 tasks; random SendSms SR {:.0}% over 100 seeds",
        rep.overall.success_rate * 100.0
    ))
}

fn main() {
    let checks: [Criterion; 12] = [
        ("oracle solvability", c1_oracle),
        ("determinism", c2_determinism),
        ("validator mutation soundness", c3_mutations),
        ("initialization soundness", c4_init),
        ("composite reward", c5_composite),
        ("clock", c6_clock),
        ("wilson intervals", c7_wilson),
        ("robustness methodology", c8_robustness),
        ("IR non-interference", c9_ir),
        ("wire protocol", c10_wire),
        ("M3A loop, goldens, parsers", c11_m3a),
        ("step budgets", c12_budgets),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
