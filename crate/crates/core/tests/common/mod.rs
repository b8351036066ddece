#![allow(dead_code)]

use phonesim::agents::{Agent, OracleAgent};
use phonesim::session::Session;
use phonesim::tasks::{self, TaskDefinition, TaskInstance};

/// Runs the oracle on `def` with `seed` and returns the session in its
/// final state, without teardown.
pub fn solved(def: &TaskDefinition, seed: u64) -> (TaskInstance, Session) {
    let inst = tasks::instantiate(def, seed).expect("instantiate");
    let mut session = Session::new();
    tasks::initialize_task(&inst, &mut session).expect("initialize");
    let mut agent = OracleAgent::new();
    agent.begin(&inst);
    for i in 0..inst.max_steps {
        let obs = session.observe();
        let step = agent.step(&obs, i);
        session.dispatch(&step.action).expect("open session");
        if session.is_closed() {
            break;
        }
    }
    (inst, session)
}
