//! Declarative information-retrieval tasks.
//!
//! A task document is a JSON array of task objects. Each task names the
//! records that answer its question (`relevant_state`), the conditions that
//! separate those records from noise (`exclusion_conditions`), and how the
//! answer is computed from them (`success_criteria`). Every `{param}` is
//! drawn from `task_params`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::device::{table_schema_qualified, FieldKind, Fields, Scalar, TableSchema, Write};
use crate::error::{IrError, TaskError};
use crate::rng::SplitMix64;
use crate::session::Session;
use crate::tasks::params::{fill, placeholders, Params};
use crate::tasks::{ExpectedAnswer, ParamSpec, TaskDefinition, TaskInstance, TaskKind, TaskLogic, TaskSetup};

/// Reference document with the shipped IR tasks.
pub const SHIPPED_DOCUMENT: &str = include_str!("../assets/ir_tasks.json");

/// Attempts per record before synthesis gives up.
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Operation {
    EqualTo,
    NotEqualTo,
    GreaterThan,
    LessThan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Transform {
    Identity,
    Count,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchType {
    StringMatch,
    NumberMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordTemplate {
    /// `app.table`.
    pub table: String,
    /// Number of goal records, usually a `{param}`.
    pub copies: String,
    pub fields: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExclusionCondition {
    pub field: String,
    pub operation: Operation,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub transform: Transform,
    pub field_name: String,
    pub match_type: MatchType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskParam {
    pub name: String,
    pub possible_values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrTaskSpec {
    pub name: String,
    pub prompt: String,
    pub complexity: u32,
    pub relevant_state: Vec<RecordTemplate>,
    pub exclusion_conditions: Vec<ExclusionCondition>,
    pub success_criteria: Expectation,
    pub task_params: Vec<TaskParam>,
}

impl IrTaskSpec {
    fn err(&self, message: impl Into<String>) -> IrError {
        IrError::Spec {
            task: self.name.clone(),
            message: message.into(),
        }
    }

    fn param(&self, name: &str) -> Option<&TaskParam> {
        self.task_params.iter().find(|p| p.name == name)
    }

    fn schema(&self) -> Result<&'static TableSchema, IrError> {
        let table = &self.relevant_state[0].table;
        table_schema_qualified(table).map_err(|_| self.err(format!("unknown table {table}")))
    }

    /// Parameters fixed for the whole synthesis: those in the prompt and
    /// those that set copy counts, in declaration order.
    fn fixed_params(&self) -> Vec<&TaskParam> {
        let mut used: BTreeSet<String> = placeholders(&self.prompt).into_iter().collect();
        for r in &self.relevant_state {
            used.extend(placeholders(&r.copies));
        }
        self.task_params.iter().filter(|p| used.contains(&p.name)).collect()
    }

    fn validate(&self) -> Result<(), IrError> {
        if self.name.trim().is_empty() {
            return Err(self.err("name is empty"));
        }
        if self.relevant_state.is_empty() {
            return Err(self.err("relevant_state is empty"));
        }
        let schema = self.schema()?;
        if self
            .relevant_state
            .iter()
            .any(|r| r.table != self.relevant_state[0].table)
        {
            return Err(self.err("all relevant_state records must share one table"));
        }
        let kind_of = |field: &str| {
            schema
                .field_kind(field)
                .ok_or_else(|| self.err(format!("field {field} is not in {}", schema.qualified_name())))
        };

        let mut seen = BTreeSet::new();
        for p in &self.task_params {
            if !seen.insert(p.name.as_str()) {
                return Err(self.err(format!("task_param {} declared twice", p.name)));
            }
            if p.possible_values.is_empty() {
                return Err(self.err(format!("task_param {} has no possible_values", p.name)));
            }
        }

        let mut used = BTreeSet::new();
        let mut uses = |text: &str| -> Result<(), IrError> {
            for name in placeholders(text) {
                if self.param(&name).is_none() {
                    return Err(self.err(format!("placeholder {{{name}}} has no task_param")));
                }
                used.insert(name);
            }
            Ok(())
        };
        uses(&self.prompt)?;
        for r in &self.relevant_state {
            uses(&r.copies)?;
            for (field, template) in &r.fields {
                let kind = kind_of(field)?;
                uses(template)?;
                // a field filled by exactly one param must parse for every value
                if let [name] = placeholders(template).as_slice() {
                    if template == &format!("{{{name}}}") {
                        let p = self.param(name).expect("checked above");
                        if let Some(bad) = p.possible_values.iter().find(|v| Scalar::parse(kind, v).is_none()) {
                            return Err(self.err(format!("value {bad:?} of {name} is not a valid {kind} for {field}")));
                        }
                    }
                }
            }
            for name in placeholders(&r.copies) {
                let p = self.param(&name).expect("checked above");
                if p.possible_values
                    .iter()
                    .any(|v| v.trim().parse::<usize>().map_or(true, |n| n == 0))
                {
                    return Err(self.err(format!("copies parameter {name} must be positive integers")));
                }
            }
            if placeholders(&r.copies).is_empty() && r.copies.trim().parse::<usize>().map_or(true, |n| n == 0) {
                return Err(self.err(format!("copies {:?} is not a positive integer", r.copies)));
            }
        }
        for c in &self.exclusion_conditions {
            kind_of(&c.field)?;
            uses(&c.value)?;
        }
        let unused: Vec<&str> = self
            .task_params
            .iter()
            .map(|p| p.name.as_str())
            .filter(|n| !used.contains(*n))
            .collect();
        if let Some(name) = unused.first() {
            return Err(self.err(format!("task_param {name} is never used")));
        }

        let target = kind_of(&self.success_criteria.field_name)?;
        let c = &self.success_criteria;
        if matches!(c.transform, Transform::Count | Transform::Sum) && c.match_type != MatchType::NumberMatch {
            return Err(self.err("COUNT and SUM need NUMBER_MATCH"));
        }
        if c.transform == Transform::Sum && !matches!(target, FieldKind::Int | FieldKind::Duration) {
            return Err(self.err(format!("SUM over non-numeric field {}", c.field_name)));
        }
        Ok(())
    }
}

/// Parses and validates a task document.
pub fn load_ir_tasks(document: &str) -> Result<Vec<IrTaskSpec>, IrError> {
    let specs: Vec<IrTaskSpec> = serde_json::from_str(document).map_err(|e| IrError::Load(e.to_string()))?;
    let mut names = BTreeSet::new();
    for s in &specs {
        s.validate()?;
        if !names.insert(s.name.clone()) {
            return Err(IrError::Load(format!("duplicate task {}", s.name)));
        }
    }
    Ok(specs)
}

fn holds(row: &Fields, cond: &ExclusionCondition, value: &Scalar) -> bool {
    match (row.get(&cond.field), cond.operation) {
        (Some(v), Operation::EqualTo) => v == value,
        (Some(v), Operation::NotEqualTo) => v != value,
        (Some(v), Operation::GreaterThan) => v.kind() == value.kind() && v > value,
        (Some(v), Operation::LessThan) => v.kind() == value.kind() && v < value,
        (None, Operation::NotEqualTo) => true,
        (None, _) => false,
    }
}

/// Exclusion conditions with their values resolved.
#[derive(Debug, Clone)]
pub struct ResolvedConditions(Vec<(ExclusionCondition, Scalar)>);

impl ResolvedConditions {
    pub fn all_hold(&self, row: &Fields) -> bool {
        self.0.iter().all(|(c, v)| holds(row, c, v))
    }
}

pub fn resolve_conditions(spec: &IrTaskSpec, params: &Params) -> Result<ResolvedConditions, IrError> {
    let schema = spec.schema()?;
    spec.exclusion_conditions
        .iter()
        .map(|c| {
            let text = fill(&c.value, params).map_err(|p| spec.err(format!("unresolved {{{p}}}")))?;
            let kind = schema.field_kind(&c.field).expect("validated");
            let value = Scalar::parse(kind, &text)
                .ok_or_else(|| spec.err(format!("condition value {text:?} is not a valid {kind}")))?;
            Ok((c.clone(), value))
        })
        .collect::<Result<_, _>>()
        .map(ResolvedConditions)
}

fn draw_params(spec: &IrTaskSpec, fixed: &Params, rng: &mut SplitMix64, resample_fixed: bool) -> Params {
    let mut out = fixed.clone();
    for p in &spec.task_params {
        if resample_fixed || !fixed.contains_key(&p.name) {
            out.insert(p.name.clone(), Scalar::str(rng.pick(&p.possible_values).clone()));
        }
    }
    out
}

fn record(spec: &IrTaskSpec, template: &RecordTemplate, params: &Params) -> Result<Fields, IrError> {
    let schema = spec.schema()?;
    template
        .fields
        .iter()
        .map(|(field, t)| {
            let text = fill(t, params).map_err(|p| spec.err(format!("unresolved {{{p}}}")))?;
            let kind = schema.field_kind(field).expect("validated");
            let value = Scalar::parse(kind, &text)
                .ok_or_else(|| spec.err(format!("value {text:?} is not a valid {kind} for {field}")))?;
            Ok((field.clone(), value))
        })
        .collect()
}

/// Planned store contents for one synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub writes: Vec<Write>,
    pub goal_records: Vec<Fields>,
    pub distractors: usize,
}

/// Plans goal and distractor records. Goal records satisfy every
/// exclusion condition; each distractor violates at least one. `fixed`
/// holds the prompt parameters. `distractors` overrides the seeded count.
pub fn plan_synthesis(
    spec: &IrTaskSpec,
    fixed: &Params,
    rng: &mut SplitMix64,
    distractors: Option<usize>,
) -> Result<Synthesis, IrError> {
    let schema = spec.schema()?;
    let mut fixed = fixed.clone();
    for p in spec.fixed_params() {
        if !fixed.contains_key(&p.name) {
            fixed.insert(p.name.clone(), Scalar::str(rng.pick(&p.possible_values).clone()));
        }
    }
    let conditions = resolve_conditions(spec, &fixed)?;

    let mut goal_records = Vec::new();
    for template in &spec.relevant_state {
        let copies_text = fill(&template.copies, &fixed).map_err(|p| spec.err(format!("unresolved {{{p}}}")))?;
        let copies: usize = copies_text
            .trim()
            .parse()
            .map_err(|_| spec.err(format!("copies {copies_text:?} is not an integer")))?;
        for _ in 0..copies {
            let mut attempts = 0;
            loop {
                attempts += 1;
                let params = draw_params(spec, &fixed, rng, false);
                let row = record(spec, template, &params)?;
                if conditions.all_hold(&row) {
                    goal_records.push(row);
                    break;
                }
                if attempts >= MAX_ATTEMPTS {
                    return Err(IrError::Synthesis {
                        task: spec.name.clone(),
                        what: "goal",
                        attempts,
                    });
                }
            }
        }
    }

    let n = distractors.unwrap_or_else(|| 2 + rng.below(4) as usize);
    let mut noise = Vec::new();
    for i in 0..n {
        let template = &spec.relevant_state[i % spec.relevant_state.len()];
        let mut attempts = 0;
        loop {
            attempts += 1;
            let params = draw_params(spec, &fixed, rng, true);
            let row = record(spec, template, &params)?;
            if !conditions.all_hold(&row) {
                noise.push(row);
                break;
            }
            if attempts >= MAX_ATTEMPTS {
                return Err(IrError::Synthesis {
                    task: spec.name.clone(),
                    what: "distractor",
                    attempts,
                });
            }
        }
    }

    let mut writes = vec![Write::clear_table(schema.app, schema.table)];
    for row in goal_records.iter().chain(&noise) {
        writes.push(Write::insert_row(schema.app, schema.table, row.clone()));
    }
    Ok(Synthesis {
        writes,
        goal_records,
        distractors: n,
    })
}

/// Draws the prompt parameters, synthesizes the store for `seed` and writes
/// it into `session`. Returns the goal records.
pub fn synthesize_state(spec: &IrTaskSpec, seed: u64, session: &mut Session) -> Result<Vec<Fields>, IrError> {
    let mut rng = SplitMix64::for_task(seed, &spec.name);
    let fixed = prompt_params(spec, &mut rng);
    let plan = plan_synthesis(spec, &fixed, &mut rng, None)?;
    session.device.apply_all(&plan.writes)?;
    Ok(plan.goal_records)
}

fn prompt_schema(spec: &IrTaskSpec) -> Vec<(String, ParamSpec)> {
    let in_prompt: BTreeSet<String> = placeholders(&spec.prompt).into_iter().collect();
    spec.task_params
        .iter()
        .filter(|p| in_prompt.contains(&p.name))
        .map(|p| (p.name.clone(), ParamSpec::OneOf(p.possible_values.clone())))
        .collect()
}

fn prompt_params(spec: &IrTaskSpec, rng: &mut SplitMix64) -> Params {
    prompt_schema(spec)
        .into_iter()
        .filter_map(|(n, s)| s.sample(rng).map(|v| (n, v)))
        .collect()
}

/// Answer text computed from the goal records.
pub fn expected_answer(spec: &IrTaskSpec, records: &[Fields]) -> Result<String, IrError> {
    let c = &spec.success_criteria;
    let values = || records.iter().filter_map(|r| r.get(&c.field_name));
    match c.transform {
        Transform::Identity => {
            if records.is_empty() {
                return Err(spec.err("IDENTITY needs at least one record"));
            }
            Ok(values().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))
        }
        Transform::Count => Ok(records.len().to_string()),
        Transform::Sum => values()
            .map(|v| match v {
                Scalar::Int(n) | Scalar::Duration(n) => Ok(*n),
                other => Err(spec.err(format!("SUM over non-numeric value {other}"))),
            })
            .sum::<Result<i64, _>>()
            .map(|s| s.to_string()),
    }
}

fn list_items(text: &str) -> Vec<String> {
    let mut items: Vec<String> = text
        .split(',')
        .map(|s| s.trim().to_lowercase())
        .filter(|s| !s.is_empty())
        .collect();
    items.sort();
    items
}

fn number(text: &str) -> Option<f64> {
    let t = text.trim().trim_end_matches('.');
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// 1.0 when the answer matches. Strings compare as comma-separated
/// multisets, trimmed and case-folded; numbers compare by value.
pub fn score_answer(agent_answer: &str, expected: &str, match_type: MatchType) -> f64 {
    let ok = match match_type {
        MatchType::StringMatch => list_items(agent_answer) == list_items(expected),
        MatchType::NumberMatch => match (number(agent_answer), number(expected)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        },
    };
    f64::from(u8::from(ok))
}

struct IrTask {
    spec: IrTaskSpec,
}

impl TaskLogic for IrTask {
    fn setup(&self, params: &Params, rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        let plan = plan_synthesis(&self.spec, params, rng, None)?;
        let answer = expected_answer(&self.spec, &plan.goal_records)?;
        Ok(TaskSetup {
            writes: plan.writes,
            records: plan.goal_records,
            distractors: plan.distractors,
            answer: Some(ExpectedAnswer {
                text: answer,
                match_type: self.spec.success_criteria.match_type,
            }),
        })
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        match (&instance.setup.answer, session.answer()) {
            (Some(expected), Some(given)) => score_answer(given, &expected.text, expected.match_type),
            _ => 0.0,
        }
    }
}

/// Wraps a validated spec as a task definition.
pub fn definition(spec: IrTaskSpec, oracle_steps: usize) -> Result<TaskDefinition, TaskError> {
    let schema = prompt_schema(&spec);
    let def = TaskDefinition::leaf(
        &spec.name.clone(),
        &spec.prompt.clone(),
        spec.complexity,
        TaskKind::IR,
        oracle_steps,
        schema.iter().map(|(n, s)| (n.as_str(), s.clone())).collect(),
        IrTask { spec },
    )?;
    Ok(def)
}

pub fn shipped_specs() -> Result<Vec<IrTaskSpec>, IrError> {
    load_ir_tasks(SHIPPED_DOCUMENT)
}

pub(crate) fn shipped_definitions() -> Result<Vec<TaskDefinition>, TaskError> {
    shipped_specs()?
        .into_iter()
        .map(|spec| {
            let steps = crate::tasks::catalog_ir_steps(&spec.name).ok_or_else(|| TaskError::Definition {
                name: spec.name.clone(),
                message: "no oracle step count".into(),
            })?;
            definition(spec, steps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_document_loads() {
        let specs = shipped_specs().unwrap();
        assert_eq!(specs.len(), 2);
        let cal = &specs[0];
        assert_eq!(cal.name, "SimpleCalendarEventsOnDate");
        assert_eq!(cal.success_criteria.transform, Transform::Identity);
        assert_eq!(cal.success_criteria.field_name, "title");
    }

    #[test]
    fn empty_document() {
        assert!(load_ir_tasks("[]").unwrap().is_empty());
    }

    #[test]
    fn scoring() {
        assert_eq!(
            score_answer("sync, data dive", "Data Dive, Sync", MatchType::StringMatch),
            1.0
        );
        assert_eq!(score_answer("Sync", "Data Dive, Sync", MatchType::StringMatch), 0.0);
        assert_eq!(score_answer("3", "3", MatchType::NumberMatch), 1.0);
        assert_eq!(score_answer(" 3.0 ", "3", MatchType::NumberMatch), 1.0);
        assert_eq!(score_answer("4", "3", MatchType::NumberMatch), 0.0);
        assert_eq!(score_answer("three", "3", MatchType::NumberMatch), 0.0);
    }
}
