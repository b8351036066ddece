//! Uniform random baseline over the actions that are valid on the current
//! screen.

use super::{Agent, PolicyStep};
use crate::rng::{fnv1a64, SplitMix64};
use crate::screens::{AgentAction, AppId, Direction, Observation};
use crate::tasks::TaskInstance;

const WORDS: [&str; 6] = ["hello", "note", "12", "test", "ok", "2023-10-15"];

pub struct RandomAgent {
    base_seed: u64,
    rng: SplitMix64,
    /// First step index at which `status: complete` may be chosen.
    status_floor: usize,
}

impl RandomAgent {
    pub fn new(base_seed: u64) -> Self {
        RandomAgent {
            base_seed,
            rng: SplitMix64::new(base_seed),
            status_floor: usize::MAX,
        }
    }

    fn candidates(&mut self, obs: &Observation, step_index: usize) -> Vec<AgentAction> {
        let mut out = Vec::new();
        for e in obs.elements.iter().filter(|e| e.is_clickable) {
            out.push(AgentAction::click(e.index));
            out.push(AgentAction::long_press(e.index));
        }
        if obs.focused().is_some() {
            let word = *self.rng.pick(&WORDS);
            out.push(AgentAction::input_text(word));
            out.push(AgentAction::keyboard_enter());
        }
        for d in [Direction::Up, Direction::Down] {
            out.push(AgentAction::scroll(d));
        }
        if obs.elements.iter().any(|e| e.is_scrollable) {
            out.push(AgentAction::scroll(Direction::Left));
            out.push(AgentAction::scroll(Direction::Right));
        }
        out.push(AgentAction::navigate_home());
        out.push(AgentAction::navigate_back());
        out.push(AgentAction::wait());
        let app = *self.rng.pick(&AppId::LAUNCHABLE);
        out.push(AgentAction::open_app(app.display_name()));
        if step_index >= self.status_floor {
            out.push(AgentAction::complete());
        }
        out
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> String {
        "random".into()
    }

    fn begin(&mut self, instance: &TaskInstance) {
        let mix = self.base_seed ^ instance.seed.rotate_left(17) ^ fnv1a64(instance.name().as_bytes());
        self.rng = SplitMix64::new(mix);
        self.status_floor = instance.max_steps.saturating_sub(1);
    }

    fn step(&mut self, obs: &Observation, step_index: usize) -> PolicyStep {
        let options = self.candidates(obs, step_index);
        let action = self.rng.pick(&options).clone();
        PolicyStep::new(action, "random")
    }
}
