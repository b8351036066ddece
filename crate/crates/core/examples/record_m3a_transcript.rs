//! Records a backend transcript in which M3A solves SendSms.
//!
//! The "model" replays the oracle's actions in order and answers every
//! reflection prompt with a one-line summary. The output is the fixture
//! used by the replay test:
//!
//!     cargo run -p phonesim --example record_m3a_transcript -- tests/fixtures/transcripts/m3a_send_sms.json

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use phonesim::agents::backend::{RecordingBackend, Transcript, DEFAULT_FALLBACK};
use phonesim::agents::{M3aAgent, M3aConfig, ModelBackend, OracleAgent};
use phonesim::harness::{run_episode, DEFAULT_SEED};
use phonesim::tasks::find;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "m3a_send_sms.json".into());
    let def = find("SendSms").expect("SendSms is registered");

    let script = run_episode(&def, &mut OracleAgent::new(), DEFAULT_SEED).expect("oracle run");
    let actions: VecDeque<String> = script.trajectory.iter().map(|s| s.action.to_json()).collect();
    let queue = Mutex::new(actions);

    let model = move |prompt: &str| -> String {
        if prompt.ends_with("Summary of this step: ") {
            return "The action went through as expected.".to_string();
        }
        match queue.lock().unwrap().pop_front() {
            Some(a) => format!("Reason: follow the plan.\nAction: {a}"),
            None => DEFAULT_FALLBACK.to_string(),
        }
    };
    let recorder = Arc::new(RecordingBackend::new(model));
    let backend: Arc<dyn ModelBackend> = recorder.clone();
    let mut agent = M3aAgent::new(backend, M3aConfig::default());
    let result = run_episode(&def, &mut agent, DEFAULT_SEED).expect("m3a run");
    assert_eq!(result.reward, 1.0, "recorded episode did not solve the task");

    let transcript = Transcript {
        fallback: DEFAULT_FALLBACK.to_string(),
        entries: recorder.entries(),
    };
    let json = serde_json::to_string_pretty(&transcript).expect("transcript serializes");
    std::fs::write(&out, json + "\n").expect("write transcript");
    eprintln!("wrote {} entries to {out}", transcript.entries.len());
}
