//! Symbolic program execution over static/dynamic scene representations,
//! with an evaluation harness for compositional question answering.

pub mod cli;
pub mod executor;
pub mod metrics;
pub mod program;
pub mod rules;
pub mod scene;
pub mod synth;
