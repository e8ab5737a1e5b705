use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::jobs::{execute, Artifact};
use super::plan::{has_errors, validate, Diagnostic, ExperimentPlan, Job};
use crate::error::{Error, Result};
use crate::stats::Workers;

pub const MANIFEST: &str = "manifest.txt";

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub workers: Workers,
    pub resume: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JobStatus {
    Done,
    /// Completed by an earlier run with the same job definition.
    Skipped,
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub diagnostics: Vec<Diagnostic>,
    pub statuses: Vec<JobStatus>,
    /// 0 on success, 1 if any job failed, 2 if the plan did not validate.
    pub exit_code: i32,
}

/// FNV-1a of the serialized job, used to match manifest entries on resume.
pub fn fingerprint(job: &Job) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in job.to_toml().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

struct ManifestEntry {
    ok: bool,
    output: String,
    fingerprint: String,
}

fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split(' ')
        .find_map(|part| part.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn read_manifest(path: &Path) -> Vec<ManifestEntry> {
    let Ok(text) = fs::read_to_string(path) else {
        return Vec::new();
    };
    text.lines()
        .filter(|l| l.starts_with("job="))
        .filter_map(|l| {
            Some(ManifestEntry {
                ok: field(l, "status")? == "ok",
                output: field(l, "output")?.to_string(),
                fingerprint: field(l, "fingerprint")?.to_string(),
            })
        })
        .collect()
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    for a in artifacts {
        write_atomic(&dir.join(&a.path), &a.contents)?;
    }
    Ok(())
}

/// Entries for outputs outside `plan` are carried over from `previous`.
fn manifest_text(plan: &ExperimentPlan, statuses: &[JobStatus], previous: &str) -> String {
    let mut s = String::from("# alignlab manifest: one line per job\n");
    for line in previous.lines().filter(|l| l.starts_with("job=")) {
        if field(line, "output").is_some_and(|o| plan.jobs.iter().all(|j| j.output != o)) {
            s.push_str(line);
            s.push('\n');
        }
    }
    for (i, (job, st)) in plan.jobs.iter().zip(statuses).enumerate() {
        let status = match st {
            JobStatus::Done | JobStatus::Skipped => "ok",
            JobStatus::Failed(_) => "error",
        };
        s.push_str(&format!(
            "job={} mode={} status={} output={} fingerprint={}",
            i + 1,
            job.mode.label(),
            status,
            job.output,
            fingerprint(job)
        ));
        if let JobStatus::Failed(msg) = st {
            s.push_str(&format!(" error={}", msg.replace('\n', " ")));
        }
        s.push('\n');
    }
    s
}

/// Validates, runs every job (in parallel across jobs), writes the CSVs and
/// `manifest.txt` into `opts.out_dir`.
pub fn run_plan(plan: &ExperimentPlan, opts: &RunOptions) -> Result<RunReport> {
    let diagnostics = validate(plan);
    if has_errors(&diagnostics) {
        return Ok(RunReport {
            diagnostics,
            statuses: Vec::new(),
            exit_code: 2,
        });
    }
    fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;
    let manifest_path = opts.out_dir.join(MANIFEST);
    let previous: HashMap<(String, String), bool> = if opts.resume {
        read_manifest(&manifest_path)
            .into_iter()
            .map(|e| ((e.output, e.fingerprint), e.ok))
            .collect()
    } else {
        HashMap::new()
    };
    let inner = if opts.workers == Workers::SERIAL {
        Workers::SERIAL
    } else {
        Workers(0)
    };
    let statuses = opts.workers.map_any(plan.jobs.len(), |i| {
        let job = &plan.jobs[i];
        let key = (job.output.clone(), fingerprint(job));
        if previous.get(&key) == Some(&true) && opts.out_dir.join(&job.output).exists() {
            return JobStatus::Skipped;
        }
        match execute(job, inner).and_then(|a| write_artifacts(&opts.out_dir, &a)) {
            Ok(()) => JobStatus::Done,
            Err(e) => JobStatus::Failed(e.to_string()),
        }
    });
    let previous = fs::read_to_string(&manifest_path).unwrap_or_default();
    write_atomic(&manifest_path, &manifest_text(plan, &statuses, &previous))?;
    let failed = statuses.iter().any(|s| matches!(s, JobStatus::Failed(_)));
    Ok(RunReport {
        diagnostics,
        statuses,
        exit_code: i32::from(failed),
    })
}
