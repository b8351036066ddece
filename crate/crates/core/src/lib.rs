//! Simulated phone environment for benchmarking UI-control agents.
//!
//! A [`session::Session`] owns a [`device::DeviceState`] and the UI stacks
//! that render it. Tasks from [`tasks::registry`] seed the device, agents
//! act on rendered [`screens::Observation`]s, and rewards are read back
//! from device state.

pub mod agents;
pub mod device;
pub mod error;
pub mod harness;
pub mod ir;
pub mod rng;
pub mod screens;
pub mod session;
pub mod tasks;
pub mod validators;
pub mod wire;
