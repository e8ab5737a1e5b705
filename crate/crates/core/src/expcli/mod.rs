//! Experiment plans, validation, job execution and CSV output.
//!
//! A plan is a TOML file with one `[[job]]` table per job; the CLI builds
//! single-job plans from flags.

mod fig1;
mod jobs;
mod plan;
mod runner;

pub use fig1::{fig1_plan, fig1_summary, Fig1Options, FIG1_SUMMARY, FIG1_SUMMARY_HEADER};
pub use jobs::{
    execute, Artifact, ASYMPTOTIC_HEADER, CP_HEADER, DATASET_INAL_HEADER, EXPRESSIVE_HEADER, HERMITE_HEADER,
    INAL_HEADER, MOMENT_HEADER,
};
pub use plan::{has_errors, validate, Diagnostic, ExperimentPlan, Job, Mode, Severity};
pub use runner::{fingerprint, run_plan, JobStatus, RunOptions, RunReport, MANIFEST};
