#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write as _};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};

use phonesim::agents::{Agent, OracleAgent};
use phonesim::screens::Observation;
use phonesim::tasks::{self, find};
use serde_json::{json, Value};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phonesim"))
}

/// A `phonesim serve` child on an ephemeral port. Killed on drop.
pub struct Server {
    child: Child,
    pub addr: String,
}

impl Server {
    pub fn start() -> Server {
        let mut child = bin()
            .args(["serve", "--listen", "127.0.0.1:0"])
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn server");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_string();
        Server { child, addr }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Plays `task` with the oracle over the wire: the client sees only the
/// observations the server sends back. Returns the evaluated reward.
pub fn play_over_tcp(addr: &str, task: &str, seed: u64) -> Result<f64, String> {
    let stream = TcpStream::connect(addr).map_err(|e| e.to_string())?;
    let mut reader = BufReader::new(stream.try_clone().map_err(|e| e.to_string())?);
    let mut writer = stream;
    let mut id = 0;
    let mut send = |method: &str, params: Value| -> Result<Value, String> {
        id += 1;
        writeln!(writer, "{}", json!({"id": id, "method": method, "params": params})).map_err(|e| e.to_string())?;
        let mut line = String::new();
        reader.read_line(&mut line).map_err(|e| e.to_string())?;
        let v: Value = serde_json::from_str(&line).map_err(|e| format!("{e}: {line}"))?;
        if v["ok"] != true {
            return Err(format!("{method} failed: {line}"));
        }
        Ok(v["result"].clone())
    };
    let reset = send("reset", json!({"task": task, "seed": seed}))?;
    let def = find(task).map_err(|e| e.to_string())?;
    let inst = tasks::instantiate(&def, seed).map_err(|e| e.to_string())?;
    if reset["goal"] != inst.goal.as_str() {
        return Err("goal mismatch".into());
    }
    let mut oracle = OracleAgent::new();
    oracle.begin(&inst);
    let mut obs: Observation = serde_json::from_value(reset["observation"].clone()).map_err(|e| e.to_string())?;
    for i in 0..inst.max_steps {
        let step = oracle.step(&obs, i);
        let r = send("step", json!({"action": step.action}))?;
        if r["done"] == true {
            break;
        }
        obs = serde_json::from_value(r["observation"].clone()).map_err(|e| e.to_string())?;
    }
    let ev = send("evaluate", Value::Null)?;
    send("teardown", Value::Null)?;
    ev["reward"].as_f64().ok_or_else(|| "no reward".to_string())
}
