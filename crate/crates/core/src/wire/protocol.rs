//! Message types and the per-connection request handler.

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::screens::AgentAction;
use crate::session::Session;
use crate::tasks::{self, cached_registry, TaskInstance};

pub const DEFAULT_SEED: u64 = 30;

/// Tag list shipped with the crate.
pub const TAGS_DOCUMENT: &str = include_str!("../../assets/annotation_tags.json");

pub fn default_tags() -> &'static [String] {
    static TAGS: OnceLock<Vec<String>> = OnceLock::new();
    TAGS.get_or_init(|| serde_json::from_str(TAGS_DOCUMENT).expect("shipped tag list parses"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpcRequest {
    pub id: i64,
    pub method: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    NoSession,
    BadAction,
    UnknownTask,
    BadRequest,
    SessionClosed,
    BudgetExhausted,
    BadAnnotation,
    BadId,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpcError {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpcResponse {
    /// `None` only when the request could not be parsed far enough to read it.
    pub id: Option<i64>,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RpcError>,
}

impl RpcResponse {
    pub fn success(id: i64, result: Value) -> Self {
        RpcResponse {
            id: Some(id),
            ok: true,
            result: Some(result),
            error: None,
        }
    }

    pub fn failure(id: Option<i64>, code: ErrorCode, message: impl Into<String>) -> Self {
        RpcResponse {
            id,
            ok: false,
            result: None,
            error: Some(RpcError {
                code,
                message: message.into(),
            }),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub task_name: String,
    pub seed: u64,
    pub difficulty: Difficulty,
    pub estimated_steps: u32,
    pub tags: Vec<String>,
    pub human_reward: f64,
    pub human_steps: u32,
}

impl AnnotationRecord {
    pub fn validate(&self, allowed_tags: &[String]) -> Result<(), String> {
        if !cached_registry().iter().any(|t| t.name == self.task_name) {
            return Err(format!("unknown task {}", self.task_name));
        }
        if self.estimated_steps < 1 {
            return Err("estimated_steps must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.human_reward) {
            return Err("human_reward must be within [0, 1]".into());
        }
        let mut seen = BTreeSet::new();
        for tag in &self.tags {
            if !allowed_tags.contains(tag) {
                return Err(format!("tag {tag:?} is not in the configured list"));
            }
            if !seen.insert(tag) {
                return Err(format!("tag {tag:?} given twice"));
            }
        }
        Ok(())
    }
}

/// Annotations shared by all connections of a server, optionally appended
/// to a JSON-lines file.
#[derive(Debug, Default)]
pub struct AnnotationStore {
    records: Mutex<Vec<AnnotationRecord>>,
    path: Option<PathBuf>,
}

impl AnnotationStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_file(path: impl Into<PathBuf>) -> Self {
        AnnotationStore {
            records: Mutex::new(Vec::new()),
            path: Some(path.into()),
        }
    }

    /// Stores `record` and returns the number of stored records.
    pub fn push(&self, record: AnnotationRecord) -> std::io::Result<usize> {
        let mut records = self.records.lock().expect("annotation lock");
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{}", serde_json::to_string(&record).expect("record serializes"))?;
        }
        records.push(record);
        Ok(records.len())
    }

    pub fn records(&self) -> Vec<AnnotationRecord> {
        self.records.lock().expect("annotation lock").clone()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResetParams {
    task: String,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepParams {
    action: Value,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

struct Episode {
    instance: TaskInstance,
    session: Session,
    steps: usize,
}

type Reply = Result<Value, (ErrorCode, String)>;

fn params<T: DeserializeOwned>(value: &Value) -> Result<T, (ErrorCode, String)> {
    let v = if value.is_null() { json!({}) } else { value.clone() };
    serde_json::from_value(v).map_err(|e| (ErrorCode::BadRequest, format!("bad params: {e}")))
}

/// State of one connection: at most one live episode.
pub struct Connection {
    store: Arc<AnnotationStore>,
    tags: Arc<Vec<String>>,
    last_id: Option<i64>,
    episode: Option<Episode>,
}

impl Connection {
    pub fn new(store: Arc<AnnotationStore>, tags: Arc<Vec<String>>) -> Self {
        Connection {
            store,
            tags,
            last_id: None,
            episode: None,
        }
    }

    /// Connection with a private in-memory store and the shipped tags.
    pub fn standalone() -> Self {
        Self::new(
            Arc::new(AnnotationStore::in_memory()),
            Arc::new(default_tags().to_vec()),
        )
    }

    /// Handles one request line and returns one response line.
    pub fn handle_line(&mut self, line: &str) -> String {
        let resp = match serde_json::from_str::<Value>(line) {
            Err(e) => RpcResponse::failure(None, ErrorCode::BadRequest, format!("not JSON: {e}")),
            Ok(raw) => {
                let id = raw.get("id").and_then(Value::as_i64);
                match serde_json::from_value::<RpcRequest>(raw) {
                    Ok(req) => self.handle(&req),
                    Err(e) => RpcResponse::failure(id, ErrorCode::BadRequest, format!("bad request: {e}")),
                }
            }
        };
        resp.to_line()
    }

    pub fn handle(&mut self, req: &RpcRequest) -> RpcResponse {
        if let Some(last) = self.last_id {
            if req.id <= last {
                return RpcResponse::failure(
                    Some(req.id),
                    ErrorCode::BadId,
                    format!("id {} is not greater than {last}", req.id),
                );
            }
        }
        self.last_id = Some(req.id);
        let reply = match req.method.as_str() {
            "list_tasks" => self.list_tasks(&req.params),
            "reset" => self.reset(&req.params),
            "get_state" => self.get_state(&req.params),
            "step" => self.step(&req.params),
            "evaluate" => self.evaluate(&req.params),
            "teardown" => self.teardown(&req.params),
            "annotate" => self.annotate(&req.params),
            other => Err((ErrorCode::BadRequest, format!("unknown method {other:?}"))),
        };
        match reply {
            Ok(v) => RpcResponse::success(req.id, v),
            Err((code, msg)) => RpcResponse::failure(Some(req.id), code, msg),
        }
    }

    /// Forced teardown, e.g. on disconnect.
    pub fn close(&mut self) {
        if let Some(mut ep) = self.episode.take() {
            tasks::teardown(&ep.instance, &mut ep.session);
        }
    }

    fn episode(&mut self) -> Result<&mut Episode, (ErrorCode, String)> {
        self.episode
            .as_mut()
            .ok_or((ErrorCode::NoSession, "call reset first".to_string()))
    }

    fn list_tasks(&mut self, p: &Value) -> Reply {
        params::<NoParams>(p)?;
        let entries: Vec<_> = cached_registry().iter().map(|t| t.catalog_entry()).collect();
        Ok(json!({ "tasks": entries }))
    }

    fn reset(&mut self, p: &Value) -> Reply {
        let p: ResetParams = params(p)?;
        let def = cached_registry()
            .iter()
            .find(|t| t.name == p.task)
            .ok_or((ErrorCode::UnknownTask, format!("unknown task {}", p.task)))?;
        self.close();
        let seed = p.seed.unwrap_or(DEFAULT_SEED);
        let internal = |e: crate::error::TaskError| (ErrorCode::Internal, e.to_string());
        let instance = tasks::instantiate(def, seed).map_err(internal)?;
        let mut session = Session::new();
        tasks::initialize_task(&instance, &mut session).map_err(internal)?;
        let result = json!({
            "task": instance.name(),
            "seed": seed,
            "goal": instance.goal,
            "max_steps": instance.max_steps,
            "observation": session.observe(),
        });
        self.episode = Some(Episode {
            instance,
            session,
            steps: 0,
        });
        Ok(result)
    }

    fn get_state(&mut self, p: &Value) -> Reply {
        params::<NoParams>(p)?;
        let ep = self.episode()?;
        let obs = ep
            .session
            .get_state(true)
            .map_err(|e| (ErrorCode::SessionClosed, e.to_string()))?;
        Ok(json!({
            "observation": obs,
            "steps_taken": ep.steps,
            "max_steps": ep.instance.max_steps,
        }))
    }

    fn step(&mut self, p: &Value) -> Reply {
        let p: StepParams = params(p)?;
        let ep = self.episode()?;
        if ep.session.is_closed() {
            return Err((ErrorCode::SessionClosed, "the episode has ended".into()));
        }
        if ep.steps >= ep.instance.max_steps {
            return Err((
                ErrorCode::BudgetExhausted,
                format!("all {} steps used", ep.instance.max_steps),
            ));
        }
        let action = AgentAction::from_json(&p.action.to_string()).map_err(|e| (ErrorCode::BadAction, e))?;
        let result = ep
            .session
            .dispatch(&action)
            .map_err(|e| (ErrorCode::SessionClosed, e.to_string()))?;
        ep.steps += 1;
        let closed = ep.session.is_closed();
        let done = closed || ep.steps >= ep.instance.max_steps;
        Ok(json!({
            "transition": result,
            "observation": (!closed).then(|| ep.session.observe()),
            "steps_taken": ep.steps,
            "done": done,
        }))
    }

    fn evaluate(&mut self, p: &Value) -> Reply {
        params::<NoParams>(p)?;
        let ep = self.episode()?;
        let reward = tasks::is_successful(&ep.instance, &ep.session);
        Ok(json!({
            "reward": reward,
            "success": reward == 1.0,
            "steps_taken": ep.steps,
            "max_steps": ep.instance.max_steps,
        }))
    }

    fn teardown(&mut self, p: &Value) -> Reply {
        params::<NoParams>(p)?;
        self.episode()?;
        self.close();
        Ok(json!({ "torn_down": true }))
    }

    fn annotate(&mut self, p: &Value) -> Reply {
        let record: AnnotationRecord =
            serde_json::from_value(p.clone()).map_err(|e| (ErrorCode::BadAnnotation, e.to_string()))?;
        record.validate(&self.tags).map_err(|e| (ErrorCode::BadAnnotation, e))?;
        let n = self
            .store
            .push(record)
            .map_err(|e| (ErrorCode::Internal, format!("could not store annotation: {e}")))?;
        Ok(json!({ "stored": n }))
    }
}
