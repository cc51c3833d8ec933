//! Configuration, file output, thread pool and the subcommands of the
//! `pwc` binary, built on [`pwc_core`].

pub mod commands;
pub mod config;
pub mod exec;
pub mod export;
pub mod verify;

pub use config::{ConfigError, Resolved, RunConfig};
pub use exec::Pool;
pub use export::Format;

/// Exit status for a command result: 0 pass, 1 failed check or runtime
/// error, 2 configuration error.
pub fn exit_status(result: &anyhow::Result<commands::Outcome>) -> u8 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => 2,
        Err(_) => 1,
    }
}
