//! Per-instance reasoning engine.
//!
//! Solves reasoning problems one instance at a time: extract structured
//! symbols from the raw input, iteratively synthesize and structurally
//! evaluate a guest-language program that computes the answer, and route
//! each instance between program synthesis and direct chain-of-thought
//! through a calibrated confidence switch. Ships with CoT/PoT baselines, a
//! benchmark harness, and a record/replay provider cache for deterministic
//! offline runs.

pub mod answer;
pub mod baselines;
pub mod bench;
pub mod config;
pub mod error;
pub mod evaluator;
pub mod fenced;
pub mod guest;
pub mod instance;
pub mod program;
pub mod prompts;
pub mod provider;
pub mod sandbox;
pub mod stats;
pub mod switch;
pub mod symbols;
pub mod synthesis;
pub mod trace;
pub mod util;

pub use error::{Error, Result};
