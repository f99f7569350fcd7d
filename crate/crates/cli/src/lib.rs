//! Experiments and command-line plumbing for the `polarlet` binary.

pub mod commands;
pub mod experiments;
pub mod output;
pub mod signals;
