//! Configuration, file formats, parallel ensembles and the `supwave`
//! command line on top of [`supwave_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod snapshot;

pub use supwave_core as core;
