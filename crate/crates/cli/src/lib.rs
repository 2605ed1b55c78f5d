//! Command-line driver and review service for frequency-dictionary builds.

pub mod commands;
pub mod service;
