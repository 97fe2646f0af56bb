//! Offline specification and monitoring engine for building management
//! systems: a textual DSL for facility modes and rules, a preprocessing
//! pipeline for logged sensor data, a three-valued rule evaluator, state
//! space checking against logged mode markers, and carpet-plot reporting.

pub mod diag;
pub mod eval;
pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod spec;
pub mod statespace;
pub mod timeseries;
