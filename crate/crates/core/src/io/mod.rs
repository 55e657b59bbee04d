//! Configuration input and the files written by a run.

pub mod config;
pub mod output;
pub mod report;
