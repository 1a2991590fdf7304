//! Library side of the `gmcpos` command-line tool: scenario configs, the
//! per-subcommand pipelines and image rendering.

pub mod config;
pub mod pipeline;
pub mod render;
