use std::path::Path;

use super::jobs::csv_text;
use super::plan::{ExperimentPlan, Job, Mode};
use crate::error::{Error, Result};

pub const FIG1_SUMMARY: &str = "fig1_summary.csv";
pub const FIG1_SUMMARY_HEADER: &[&str] = &["name", "target", "inal", "inal_std_error", "final_train_acc", "final_test_acc"];

/// Majority, degree-9 staircase and 3-parity trained side by side.
#[derive(Clone, Debug)]
pub struct Fig1Options {
    pub n: usize,
    pub width: usize,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub batch: usize,
    pub gamma: f64,
    pub test_samples: usize,
    pub inal_method: String,
    pub init_samples: usize,
    pub inner_samples: usize,
    pub seed: u64,
}

impl Default for Fig1Options {
    fn default() -> Self {
        Fig1Options {
            n: 51,
            width: 512,
            epochs: 100,
            steps_per_epoch: 10,
            batch: 1000,
            gamma: 0.01,
            test_samples: 10_000,
            inal_method: "dual_kernel".into(),
            init_samples: 10_000,
            inner_samples: 1_000,
            seed: 1,
        }
    }
}

fn targets(n: usize) -> [(&'static str, String); 3] {
    [
        ("maj", format!("maj:n={n}")),
        ("staircase", format!("staircase:k=9;n={n}")),
        ("parity", format!("parity:S=1,2,3;n={n}")),
    ]
}

/// Three training jobs followed by three INAL jobs.
pub fn fig1_plan(o: &Fig1Options) -> ExperimentPlan {
    let mut jobs = Vec::new();
    for (name, t) in targets(o.n) {
        let mut j = Job::new(Mode::Train, format!("fig1_train_{name}.csv"));
        j.target = Some(t);
        j.seed = o.seed;
        j.hidden = Some(vec![o.width]);
        j.epochs = Some(o.epochs);
        j.steps_per_epoch = Some(o.steps_per_epoch);
        j.batch = Some(o.batch);
        j.gamma = Some(o.gamma);
        j.test_samples = Some(o.test_samples);
        jobs.push(j);
    }
    for (name, t) in targets(o.n) {
        let mut j = Job::new(Mode::Inal, format!("fig1_inal_{name}.csv"));
        j.target = Some(t);
        j.seed = o.seed;
        j.method = Some(o.inal_method.clone());
        j.init_samples = Some(o.init_samples);
        j.inner_samples = Some(o.inner_samples);
        jobs.push(j);
    }
    ExperimentPlan { jobs }
}

fn last_record(path: &Path) -> Result<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path)?;
    let mut last = None;
    for rec in r.records() {
        last = Some(rec?);
    }
    last.ok_or_else(|| Error::InvalidArgument(format!("{}: no rows", path.display())))
}

/// Joins the six outputs of [`fig1_plan`] into one table and writes it as
/// `fig1_summary.csv`.
pub fn fig1_summary(out_dir: &Path, o: &Fig1Options) -> Result<String> {
    let mut rows = Vec::new();
    for (name, t) in targets(o.n) {
        let train = last_record(&out_dir.join(format!("fig1_train_{name}.csv")))?;
        let inal = last_record(&out_dir.join(format!("fig1_inal_{name}.csv")))?;
        rows.push(vec![
            name.to_string(),
            t,
            inal[5].to_string(),
            inal[6].to_string(),
            train[2].to_string(),
            train[3].to_string(),
        ]);
    }
    let text = csv_text(FIG1_SUMMARY_HEADER, &rows);
    let path = out_dir.join(FIG1_SUMMARY);
    std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
    Ok(text)
}
