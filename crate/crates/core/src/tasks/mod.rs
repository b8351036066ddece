//! Task lifecycle: seeded parameters, goal strings, hermetic setup, reward
//! evaluation and teardown, plus composite tasks.

mod catalog;
pub mod params;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub(crate) use catalog::ir_oracle_steps as catalog_ir_steps;
pub use catalog::{
    find, leaf_definition, open_app_choices, registry, this_weekday, week_start, EDIT_VARIANTS, FILE_FOLDERS, WEEKDAYS,
};
pub use params::{ParamSpec, Params};

use crate::device::{Fields, Write};
use crate::error::TaskError;
use crate::ir::MatchType;
use crate::rng::SplitMix64;
use crate::session::Session;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    /// Task completion: the agent changes device state.
    TC,
    /// Information retrieval: the agent answers a question.
    IR,
}

/// The answer an IR task expects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedAnswer {
    pub text: String,
    pub match_type: MatchType,
}

/// Everything a task writes during initialization, planned up front so the
/// same instance always initializes the same way.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskSetup {
    pub writes: Vec<Write>,
    /// Goal records: rows to create, delete or report, depending on the task.
    pub records: Vec<Fields>,
    /// Number of distractor records or files written.
    pub distractors: usize,
    pub answer: Option<ExpectedAnswer>,
}

/// A single-field corruption of a solved final state, used to check that
/// validators reject near misses.
#[derive(Clone)]
pub struct Mutation {
    pub label: String,
    pub apply: Arc<dyn Fn(&mut Session) + Send + Sync>,
}

impl Mutation {
    pub fn new(label: impl Into<String>, apply: impl Fn(&mut Session) + Send + Sync + 'static) -> Self {
        Mutation {
            label: label.into(),
            apply: Arc::new(apply),
        }
    }
}

impl fmt::Debug for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mutation").field("label", &self.label).finish()
    }
}

/// Behaviour of a leaf task.
pub trait TaskLogic: Send + Sync {
    /// Fills `Derived` parameters from the drawn ones.
    fn derive(&self, _params: &mut Params) {}

    /// Plans initialization. Continues the same stream that drew the params.
    fn setup(&self, params: &Params, rng: &mut SplitMix64) -> Result<TaskSetup, TaskError>;

    /// Reward in [0, 1] from the session's final state.
    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64;

    /// Corruptions of a solved state that must each drop the reward.
    fn mutations(&self, _instance: &TaskInstance) -> Vec<Mutation> {
        Vec::new()
    }
}

#[derive(Clone)]
pub(crate) enum TaskBody {
    Leaf(Arc<dyn TaskLogic>),
    /// Components with a map from each component's own parameter names to
    /// the composite's names.
    Composite(Vec<(TaskDefinition, BTreeMap<String, String>)>),
}

#[derive(Clone)]
pub struct TaskDefinition {
    pub name: String,
    pub template: String,
    pub complexity: u32,
    pub param_schema: Vec<(String, ParamSpec)>,
    pub kind: TaskKind,
    pub oracle_steps: usize,
    pub(crate) body: TaskBody,
}

impl fmt::Debug for TaskDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaskDefinition")
            .field("name", &self.name)
            .field("template", &self.template)
            .field("kind", &self.kind)
            .field("oracle_steps", &self.oracle_steps)
            .field(
                "components",
                &self.components().iter().map(|c| &c.name).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl PartialEq for TaskDefinition {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.template == other.template
    }
}

/// Catalog entry as emitted by `catalog`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub template: String,
    pub kind: TaskKind,
    pub complexity: u32,
    pub oracle_steps: usize,
    pub max_steps: usize,
    pub params: Vec<String>,
    pub components: Vec<String>,
}

impl TaskDefinition {
    pub(crate) fn leaf(
        name: &str,
        template: &str,
        complexity: u32,
        kind: TaskKind,
        oracle_steps: usize,
        param_schema: Vec<(&str, ParamSpec)>,
        logic: impl TaskLogic + 'static,
    ) -> Result<Self, TaskError> {
        let def = TaskDefinition {
            name: name.to_string(),
            template: template.to_string(),
            complexity,
            param_schema: param_schema.into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
            kind,
            oracle_steps,
            body: TaskBody::Leaf(Arc::new(logic)),
        };
        def.check()?;
        Ok(def)
    }

    fn check(&self) -> Result<(), TaskError> {
        let fail = |message: String| {
            Err(TaskError::Definition {
                name: self.name.clone(),
                message,
            })
        };
        if self.oracle_steps == 0 {
            return fail("oracle_steps must be at least 1".into());
        }
        for p in params::placeholders(&self.template) {
            if !self.param_schema.iter().any(|(n, _)| *n == p) {
                return fail(format!("placeholder {{{p}}} has no parameter"));
            }
        }
        Ok(())
    }

    pub fn max_steps(&self) -> usize {
        2 * self.oracle_steps
    }

    pub fn is_composite(&self) -> bool {
        matches!(self.body, TaskBody::Composite(_))
    }

    pub fn components(&self) -> Vec<&TaskDefinition> {
        match &self.body {
            TaskBody::Leaf(_) => Vec::new(),
            TaskBody::Composite(parts) => parts.iter().map(|(d, _)| d).collect(),
        }
    }

    pub fn catalog_entry(&self) -> CatalogEntry {
        CatalogEntry {
            name: self.name.clone(),
            template: self.template.clone(),
            kind: self.kind,
            complexity: self.complexity,
            oracle_steps: self.oracle_steps,
            max_steps: self.max_steps(),
            params: self.param_schema.iter().map(|(n, _)| n.clone()).collect(),
            components: self.components().iter().map(|c| c.name.clone()).collect(),
        }
    }
}

/// Joins component tasks into one whose reward is the mean of theirs.
/// Parameter names that collide with an earlier component's get a
/// `c{index}_` prefix.
pub fn compose(name: &str, components: Vec<TaskDefinition>) -> Result<TaskDefinition, TaskError> {
    let mut renames = Vec::new();
    let mut taken: Vec<String> = Vec::new();
    for (i, c) in components.iter().enumerate() {
        let mut map = BTreeMap::new();
        for (p, _) in &c.param_schema {
            let mut target = p.clone();
            if taken.contains(&target) {
                target = format!("c{i}_{p}");
            }
            taken.push(target.clone());
            map.insert(p.clone(), target);
        }
        renames.push(map);
    }
    let template = components
        .iter()
        .zip(&renames)
        .map(|(c, map)| {
            let mut t = c.template.clone();
            for (from, to) in map.iter().filter(|(f, t)| f != t) {
                t = t.replace(&format!("{{{from}}}"), &format!("{{{to}}}"));
            }
            t
        })
        .collect::<Vec<_>>()
        .join(" ");
    compose_with(name, &template, components.into_iter().zip(renames).collect())
}

/// Composite with an explicit template and parameter mapping. Component
/// parameters mapped to the same composite name share one drawn value.
pub(crate) fn compose_with(
    name: &str,
    template: &str,
    parts: Vec<(TaskDefinition, BTreeMap<String, String>)>,
) -> Result<TaskDefinition, TaskError> {
    if parts.len() < 2 {
        return Err(TaskError::Definition {
            name: name.to_string(),
            message: format!("a composite needs at least 2 components, got {}", parts.len()),
        });
    }
    let mut schema: Vec<(String, ParamSpec)> = Vec::new();
    for (def, map) in &parts {
        for (p, spec) in &def.param_schema {
            let target = map.get(p).cloned().unwrap_or_else(|| p.clone());
            if !schema.iter().any(|(n, _)| *n == target) {
                schema.push((target, spec.clone()));
            }
        }
    }
    let kind = if parts.iter().all(|(d, _)| d.kind == TaskKind::IR) {
        TaskKind::IR
    } else {
        TaskKind::TC
    };
    let def = TaskDefinition {
        name: name.to_string(),
        template: template.to_string(),
        complexity: parts.iter().map(|(d, _)| d.complexity).sum(),
        param_schema: schema,
        kind,
        oracle_steps: parts.iter().map(|(d, _)| d.oracle_steps).sum(),
        body: TaskBody::Composite(parts),
    };
    def.check()?;
    Ok(def)
}

/// A definition bound to a seed: parameters, goal and planned setup.
#[derive(Debug, Clone)]
pub struct TaskInstance {
    pub definition: TaskDefinition,
    pub seed: u64,
    pub params: Params,
    pub goal: String,
    pub max_steps: usize,
    pub setup: TaskSetup,
    /// Component instances of a composite, with their own parameter names.
    pub parts: Vec<TaskInstance>,
}

impl TaskInstance {
    pub fn name(&self) -> &str {
        &self.definition.name
    }

    pub fn param_str(&self, name: &str) -> &str {
        params::get_str(&self.params, name)
    }

    pub fn param_int(&self, name: &str) -> i64 {
        params::get_int(&self.params, name)
    }
}

fn draw(schema: &[(String, ParamSpec)], rng: &mut SplitMix64) -> Params {
    schema
        .iter()
        .filter_map(|(n, spec)| spec.sample(rng).map(|v| (n.clone(), v)))
        .collect()
}

/// Parameters for `seed`, without planning the setup.
pub fn generate_random_params(definition: &TaskDefinition, seed: u64) -> Params {
    let mut rng = SplitMix64::for_task(seed, &definition.name);
    let mut params = draw(&definition.param_schema, &mut rng);
    derive_all(definition, &mut params);
    params
}

fn derive_all(definition: &TaskDefinition, params: &mut Params) {
    match &definition.body {
        TaskBody::Leaf(logic) => logic.derive(params),
        TaskBody::Composite(parts) => {
            for (def, map) in parts {
                let mut local = localize(params, map);
                derive_all(def, &mut local);
                globalize(params, &local, map);
            }
        }
    }
}

fn localize(params: &Params, map: &BTreeMap<String, String>) -> Params {
    map.iter()
        .filter_map(|(local, global)| params.get(global).map(|v| (local.clone(), v.clone())))
        .collect()
}

fn globalize(params: &mut Params, local: &Params, map: &BTreeMap<String, String>) {
    for (name, value) in local {
        let global = map.get(name).cloned().unwrap_or_else(|| name.clone());
        params.insert(global, value.clone());
    }
}

/// Binds `definition` to `seed`: draws parameters, fills the goal and plans
/// the initial state.
pub fn instantiate(definition: &TaskDefinition, seed: u64) -> Result<TaskInstance, TaskError> {
    let mut rng = SplitMix64::for_task(seed, &definition.name);
    let params = draw(&definition.param_schema, &mut rng);
    build(definition, seed, params, &mut rng)
}

fn build(
    definition: &TaskDefinition,
    seed: u64,
    mut params: Params,
    rng: &mut SplitMix64,
) -> Result<TaskInstance, TaskError> {
    let (setup, parts) = match &definition.body {
        TaskBody::Leaf(logic) => {
            logic.derive(&mut params);
            (logic.setup(&params, rng)?, Vec::new())
        }
        TaskBody::Composite(components) => {
            let mut parts = Vec::new();
            for (def, map) in components {
                let part = build(def, seed, localize(&params, map), rng)?;
                globalize(&mut params, &part.params, map);
                parts.push(part);
            }
            (TaskSetup::default(), parts)
        }
    };
    let goal = params::fill(&definition.template, &params).map_err(|placeholder| TaskError::UnresolvedPlaceholder {
        name: definition.name.clone(),
        placeholder,
    })?;
    Ok(TaskInstance {
        definition: definition.clone(),
        seed,
        params,
        goal,
        max_steps: definition.max_steps(),
        setup,
        parts,
    })
}

/// Applies the planned writes, components first to last.
pub fn initialize_task(instance: &TaskInstance, session: &mut Session) -> Result<(), TaskError> {
    for part in &instance.parts {
        initialize_task(part, session)?;
    }
    session.device.apply_all(&instance.setup.writes)?;
    Ok(())
}

pub fn is_successful(instance: &TaskInstance, session: &Session) -> f64 {
    match &instance.definition.body {
        TaskBody::Leaf(logic) => logic.evaluate(instance, session).clamp(0.0, 1.0),
        TaskBody::Composite(_) => {
            let rewards: Vec<f64> = instance.parts.iter().map(|p| is_successful(p, session)).collect();
            mean(&rewards)
        }
    }
}

/// Arithmetic mean, 0 for no values.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

pub fn mutations(instance: &TaskInstance) -> Vec<Mutation> {
    match &instance.definition.body {
        TaskBody::Leaf(logic) => logic.mutations(instance),
        TaskBody::Composite(_) => instance
            .parts
            .iter()
            .flat_map(|p| {
                let name = p.name().to_string();
                mutations(p).into_iter().map(move |m| Mutation {
                    label: format!("{name}: {}", m.label),
                    apply: m.apply,
                })
            })
            .collect(),
    }
}

/// Restores the pristine device and clears UI and episode state.
pub fn teardown(_instance: &TaskInstance, session: &mut Session) {
    session.teardown();
}

/// The shipped catalog, built once.
pub fn cached_registry() -> &'static [TaskDefinition] {
    static REGISTRY: OnceLock<Vec<TaskDefinition>> = OnceLock::new();
    REGISTRY.get_or_init(|| catalog::build_registry().expect("shipped catalog is valid"))
}
