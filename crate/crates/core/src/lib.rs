//! Exact solver for the multi-depot electric vehicle scheduling problem with
//! partial recharging.

pub mod backend;
pub mod bench;
pub mod cli;
pub mod fixtures;
pub mod formulation;
pub mod generator;
pub mod graph;
pub mod instance;
pub mod maxflow;
pub mod objective;
pub mod oracle;
pub mod schedule;
pub mod separation;
pub mod solve;
pub mod validator;
