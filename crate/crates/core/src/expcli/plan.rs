use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::alignment::{Method, EXACT_CAP};
use crate::boolfn::FunctionSpec;
use crate::crosspred::{CpMethod, DENSE_CP_CAP};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Inal,
    Cp,
    Train,
    Hermite,
    Expressive,
    Moment,
    Asymptotic,
    #[serde(alias = "dataset-inal")]
    DatasetInal,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Inal => "inal",
            Mode::Cp => "cp",
            Mode::Train => "train",
            Mode::Hermite => "hermite",
            Mode::Expressive => "expressive",
            Mode::Moment => "moment",
            Mode::Asymptotic => "asymptotic",
            Mode::DatasetInal => "dataset_inal",
        }
    }
}

fn default_seed() -> u64 {
    1
}

/// One experiment. Unused parameters for a mode are ignored; missing ones
/// take the defaults documented on each field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub mode: Mode,
    /// Output CSV, relative to the output directory.
    pub output: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub target: Option<String>,
    /// Activation spec; default `relu`.
    pub activation: Option<String>,

    /// inal: estimator, default `mc_paired`.
    pub method: Option<String>,
    /// inal: init samples, default 10000.
    pub init_samples: Option<usize>,
    /// inal / cp pair_mc: inner samples per set, default 1000.
    pub inner_samples: Option<usize>,
    /// inal: include the bias term, default true.
    pub bias: Option<bool>,

    /// cp: extension dimension `N`.
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    /// cp: permutations or function pairs, default 10000.
    pub samples: Option<usize>,

    /// train / dataset_inal: hidden widths, default `[512]`.
    pub hidden: Option<Vec<usize>>,
    pub epochs: Option<usize>,
    pub steps_per_epoch: Option<usize>,
    pub batch: Option<usize>,
    pub gamma: Option<f64>,
    pub tau_noise: Option<f64>,
    /// Overflow range `A`; default unbounded.
    pub overflow: Option<f64>,
    pub loss: Option<String>,
    pub test_samples: Option<usize>,
    /// Init spec, default `normalized_gaussian`.
    pub init: Option<String>,

    /// hermite / expressive: largest order, default 10.
    pub order: Option<usize>,
    /// expressive: relative zero tolerance.
    pub tol: Option<f64>,
    /// hermite: smoothing variance, default 1.
    pub variance: Option<f64>,

    /// moment / asymptotic: monomial degree.
    pub k: Option<usize>,
    /// moment: power; all of `0..=k+4` when absent.
    pub nu: Option<usize>,
    /// moment: dimension, default 100.
    pub n: Option<usize>,
    /// moment: signs of `w_T`, default all `+1`.
    pub tau: Option<Vec<i8>>,
    pub bias_sign: Option<i8>,
    /// asymptotic: dimensions to tabulate, default 8, 16, …, 256.
    pub dims: Option<Vec<usize>>,

    /// dataset_inal: CSV path; falls back to the truth table of `target`.
    pub dataset: Option<String>,
    /// dataset_inal: label column name, default last column.
    pub label: Option<String>,
    /// dataset_inal: init rounds, default 1000.
    pub init_rounds: Option<usize>,
}

impl Job {
    pub fn new(mode: Mode, output: impl Into<String>) -> Self {
        Job {
            mode,
            output: output.into(),
            seed: 1,
            target: None,
            activation: None,
            method: None,
            init_samples: None,
            inner_samples: None,
            bias: None,
            big_n: None,
            samples: None,
            hidden: None,
            epochs: None,
            steps_per_epoch: None,
            batch: None,
            gamma: None,
            tau_noise: None,
            overflow: None,
            loss: None,
            test_samples: None,
            init: None,
            order: None,
            tol: None,
            variance: None,
            k: None,
            nu: None,
            n: None,
            tau: None,
            bias_sign: None,
            dims: None,
            dataset: None,
            label: None,
            init_rounds: None,
        }
    }

    /// Serialized form, one TOML table.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("job serializes")
    }

    pub fn activation_text(&self) -> &str {
        self.activation.as_deref().unwrap_or("relu")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    #[serde(rename = "job", default)]
    pub jobs: Vec<Job>,
}

impl ExperimentPlan {
    pub fn single(job: Job) -> Self {
        ExperimentPlan { jobs: vec![job] }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse("plan", e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 0-based job index.
    pub job: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.job {
            Some(j) => write!(f, "{level}: job {}: {}", j + 1, self.message),
            None => write!(f, "{level}: {}", self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

fn describe(e: &Error) -> String {
    match e {
        Error::Io { path, source } if source.kind() == std::io::ErrorKind::NotFound => {
            format!("file not found: {}", path.display())
        }
        other => other.to_string(),
    }
}

/// Static checks: specs parse, files exist, parameters are consistent and
/// within estimator caps. Never fails; problems come back as diagnostics.
pub fn validate(plan: &ExperimentPlan) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut outputs = HashSet::new();
    for (i, job) in plan.jobs.iter().enumerate() {
        let mut err = |m: String| {
            out.push(Diagnostic {
                severity: Severity::Error,
                job: Some(i),
                message: m,
            })
        };
        if job.output.trim().is_empty() {
            err("empty output path".into());
        } else if !outputs.insert(job.output.clone()) {
            err(format!("output `{}` is shared with an earlier job", job.output));
        }
        let mut local = Vec::new();
        check_job(job, &mut local);
        out.extend(local.into_iter().map(|(severity, message)| Diagnostic {
            severity,
            job: Some(i),
            message,
        }));
    }
    out
}

fn check_job(job: &Job, out: &mut Vec<(Severity, String)>) {
    let mut error = |m: String| out.push((Severity::Error, m));
    let act = match Activation::parse(job.activation_text()) {
        Ok(a) => Some(a),
        Err(e) => {
            error(describe(&e));
            None
        }
    };
    let needs_target = matches!(job.mode, Mode::Inal | Mode::Cp | Mode::Train)
        || (job.mode == Mode::DatasetInal && job.dataset.is_none());
    let mut target = None;
    match (&job.target, needs_target) {
        (Some(t), _) => match FunctionSpec::parse(t) {
            Ok(spec) => {
                for w in &spec.warnings {
                    out.push((Severity::Warning, format!("{t}: {w}")));
                }
                target = Some(spec.function);
            }
            Err(e) => out.push((Severity::Error, describe(&e))),
        },
        (None, true) => out.push((Severity::Error, format!("{} job needs a target", job.mode.label()))),
        (None, false) => {}
    }
    let mut error = |m: String| out.push((Severity::Error, m));
    match job.mode {
        Mode::Inal => {
            let method = job.method.as_deref().unwrap_or("mc_paired");
            match Method::parse(method) {
                None => error(format!("unknown INAL method `{method}`")),
                Some(Method::ExactSmallN) => {
                    if let Some(f) = &target {
                        if f.n() > EXACT_CAP {
                            error(format!("exact mode requires n ≤ {EXACT_CAP} (target has n = {})", f.n()));
                        }
                    }
                }
                Some(Method::DualKernel) => {
                    if matches!(act, Some(Activation::Pwl(_))) {
                        error("dual_kernel supports relu and sign only".into());
                    }
                }
                Some(Method::Asymptotic) => {
                    if let Some(f) = &target {
                        if f.monomial_support().is_none() {
                            error("asymptotic method applies to monomial targets only".into());
                        }
                    }
                }
                Some(_) => {}
            }
            if job.inner_samples == Some(1) {
                error("inner_samples must be at least 2".into());
            }
        }
        Mode::Cp => {
            let method = job.method.as_deref().unwrap_or("spectral_mc_perm");
            if CpMethod::parse(method).is_none() {
                error(format!("unknown CP method `{method}`"));
            }
            match (job.big_n, &target) {
                (None, _) => error("cp job needs N".into()),
                (Some(big_n), Some(f)) => {
                    if big_n <= f.n() {
                        error(format!("N = {big_n} must exceed n = {}", f.n()));
                    }
                    if f.n() > DENSE_CP_CAP && f.monomial_support().is_none() && f.staircase_order().is_none() {
                        error(format!("dense spectra are capped at n ≤ {DENSE_CP_CAP}"));
                    }
                }
                _ => {}
            }
        }
        Mode::Train | Mode::DatasetInal => {
            if let Some(h) = &job.hidden {
                if h.is_empty() || h.contains(&0) {
                    error("hidden widths must be non-empty and positive".into());
                }
            }
            if let Some(init) = &job.init {
                if let Err(e) = crate::nnet::InitSpec::parse(init) {
                    error(describe(&e));
                }
            }
            if job.mode == Mode::Train {
                if let Some(a) = &act {
                    if !a.trainable() {
                        error(format!("activation `{}` is not trainable", a.name()));
                    }
                }
                if let Some(l) = &job.loss {
                    if let Err(e) = crate::nnet::Loss::parse(l) {
                        error(describe(&e));
                    }
                }
                if job.gamma.is_some_and(|g| !(g > 0.0)) {
                    error("gamma must be positive".into());
                }
                if job.overflow.is_some_and(|a| !(a > 0.0)) {
                    error("overflow range must be positive".into());
                }
                if job.tau_noise.is_some_and(|t| !(t >= 0.0)) {
                    error("tau_noise must be non-negative".into());
                }
            }
            if let Some(d) = &job.dataset {
                if !Path::new(d).exists() {
                    error(format!("file not found: {d}"));
                }
            }
        }
        Mode::Hermite | Mode::Expressive => {
            if job.order.is_some_and(|o| o > crate::activation::MAX_ORDER) {
                error(format!("order exceeds {}", crate::activation::MAX_ORDER));
            }
        }
        Mode::Moment => {
            match job.k {
                None => error("moment job needs k".into()),
                Some(k) => {
                    if job.tau.as_ref().is_some_and(|t| t.len() != k) {
                        error("tau must have k entries".into());
                    }
                }
            }
            if job.tau.as_ref().is_some_and(|t| t.iter().any(|&s| s != 1 && s != -1))
                || job.bias_sign.is_some_and(|s| s != 1 && s != -1)
            {
                error("signs must be +1 or -1".into());
            }
            if job.nu.is_some_and(|nu| nu > crate::alignment::MOMENT_CAP) {
                error(format!("nu exceeds {}", crate::alignment::MOMENT_CAP));
            }
        }
        Mode::Asymptotic => {
            if job.k.is_none() {
                error("asymptotic job needs k".into());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn messages(plan: &ExperimentPlan) -> Vec<String> {
        validate(plan).iter().map(|d| d.to_string()).collect()
    }

    #[test]
    fn parses_and_round_trips() {
        let text = r#"
[[job]]
mode = "inal"
target = "maj:n=101"
activation = "relu"
method = "mc_paired"
init_samples = 20000
inner_samples = 4000
seed = 1
output = "inal.csv"

[[job]]
mode = "cp"
target = "parity:S=1,2,3;n=10"
N = 100
output = "cp.csv"
"#;
        let plan = ExperimentPlan::from_toml_str(text).unwrap();
        assert_eq!(plan.jobs.len(), 2);
        assert_eq!(plan.jobs[1].big_n, Some(100));
        assert_eq!(ExperimentPlan::from_toml_str(&plan.to_toml()).unwrap(), plan);
        assert!(validate(&plan).is_empty());
        assert!(ExperimentPlan::from_toml_str("[[job]]\nmode = \"inal\"\noutput = \"x\"\nbogus = 1").is_err());
    }

    #[test]
    fn diagnostics() {
        let mut maj = Job::new(Mode::Inal, "a.csv");
        maj.target = Some("maj:n=100".into());
        let mut exact = Job::new(Mode::Inal, "b.csv");
        exact.target = Some("maj:n=21".into());
        exact.method = Some("exact_small_n".into());
        let mut missing = Job::new(Mode::Inal, "c.csv");
        missing.target = Some("table:@/definitely/missing.txt".into());
        let mut dup = Job::new(Mode::Hermite, "a.csv");
        dup.activation = Some("sign".into());
        let plan = ExperimentPlan {
            jobs: vec![maj, exact, missing, dup],
        };
        let m = messages(&plan);
        assert!(m.iter().any(|s| s.starts_with("warning: job 1") && s.contains("even n: sign(0):=+1 convention applies")));
        assert!(m.iter().any(|s| s.starts_with("error: job 2") && s.contains("exact mode requires n ≤ 14")));
        assert!(m.iter().any(|s| s.starts_with("error: job 3") && s.contains("file not found")));
        assert!(m.iter().any(|s| s.starts_with("error: job 4") && s.contains("shared")));
    }

    #[test]
    fn mode_requirements() {
        let mut cp = Job::new(Mode::Cp, "cp.csv");
        cp.target = Some("maj:n=3".into());
        let mut train = Job::new(Mode::Train, "t.csv");
        train.target = Some("staircase:k=4;n=8".into());
        train.activation = Some("sign".into());
        let plan = ExperimentPlan {
            jobs: vec![cp, train, Job::new(Mode::Moment, "m.csv")],
        };
        let m = messages(&plan);
        assert!(m.iter().any(|s| s.contains("needs N")));
        assert!(m.iter().any(|s| s.contains("not trainable")));
        assert!(m.iter().any(|s| s.starts_with("warning: job 2") && s.contains("even k")));
        assert!(m.iter().any(|s| s.contains("needs k")));
    }
}
