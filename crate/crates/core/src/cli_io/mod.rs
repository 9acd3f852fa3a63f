//! Configuration, diagnostics output, checkpoints and the subcommands built
//! on them.

pub mod checkpoint;
mod commands;
pub mod config;
pub mod csv;

pub use commands::{
    audit_rows, cmd_audit, cmd_inspect, cmd_resume, cmd_run, exit_code, interpolation_id,
    load_audit_config, load_run_config, AuditLine, AuditReport, Overrides, RunSummary,
    AUDIT_COLUMNS,
};
pub use config::{parse_audit_config, parse_config, AuditConfig, RunConfig};
