//! Batch front-end for `quasidiff`: problem files in, text and JSON reports out.

pub mod commands;
pub mod problem;
pub mod report;
