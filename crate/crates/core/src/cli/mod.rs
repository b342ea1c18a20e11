//! Command-line front end: configuration, subcommands and output files.

pub mod commands;
pub mod config;
pub mod output;

use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
pub use config::Config;
pub use output::{Cell, Format, ResultBundle, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Map,
    Orbit,
    Curves,
    Sweep,
    Staircase,
    Farey,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Map, Command::Orbit, Command::Curves, Command::Sweep, Command::Staircase, Command::Farey];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Map => "map",
            Command::Orbit => "orbit",
            Command::Curves => "curves",
            Command::Sweep => "sweep",
            Command::Staircase => "staircase",
            Command::Farey => "farey",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand `{s}`")))
    }
}

/// Runs one subcommand on a pool of `workers` threads (0 = all cores).
pub fn run(command: Command, cfg: &Config, workers: usize) -> Result<ResultBundle> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let (table, extra) = pool.install(|| match command {
        Command::Map => commands::cmd_map(cfg),
        Command::Orbit => commands::cmd_orbit(cfg),
        Command::Curves => commands::cmd_curves(cfg),
        Command::Sweep => commands::cmd_sweep(cfg),
        Command::Staircase => commands::cmd_staircase(cfg),
        Command::Farey => commands::cmd_farey(cfg),
    })?;
    Ok(ResultBundle {
        command: command.name().to_string(),
        config: cfg.to_value(),
        config_hash: cfg.hash(),
        wall_time_s: start.elapsed().as_secs_f64(),
        extra,
        table,
    })
}
