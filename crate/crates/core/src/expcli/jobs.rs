use std::collections::BTreeMap;
use std::path::Path;

use super::plan::{Job, Mode};
use crate::activation::{
    hermite_coeffs, is_expressive, smoothing_derivatives_quadrature, Activation, DEFAULT_ZERO_TOL,
};
use crate::alignment::{
    empirical_inal_dataset, inal_decompose, inal_dual_kernel, inal_exact, inal_mc_paired,
    inal_monomial_asymptotic, moment_formula, monomial_inal_kernel, InalConfig, InalEstimate, Method,
    SignPattern, MOMENT_CAP,
};
use crate::boolfn::{BooleanFunction, FunctionSpec};
use crate::crosspred::{cp_bound, cp_exact_enum, cp_pair_mc, cp_spectral, CpConfig, CpMethod, Orbit};
use crate::error::{Error, Result};
use crate::nnet::{Dataset, FeedForwardNet, InitSpec, Loss, NetTemplate, NoisyGDConfig, Target, TrainTrace, Trainer};
use crate::stats::Workers;

pub const INAL_HEADER: &[&str] = &["target", "activation", "n", "method", "samples", "value", "std_error", "seed"];
pub const CP_HEADER: &[&str] = &[
    "target", "n", "N", "method", "perm_samples", "value", "std_error", "k_star", "bound_tight", "bound_loose", "seed",
];
pub const HERMITE_HEADER: &[&str] = &["activation", "v", "k", "derivative", "hermite_coeff"];
pub const EXPRESSIVE_HEADER: &[&str] = &["activation", "order", "derivative", "zero", "tol", "verdict"];
pub const MOMENT_HEADER: &[&str] = &["k", "nu", "n", "tau", "bias_sign", "value", "constant"];
pub const ASYMPTOTIC_HEADER: &[&str] = &[
    "activation", "k", "P", "a_P", "C_P", "leading_coefficient", "n", "envelope", "dual_kernel",
];
pub const DATASET_INAL_HEADER: &[&str] = &[
    "dataset", "activation", "neuron", "layer", "index", "value", "std_error", "init_rounds", "seed", "is_max",
];

/// A file produced by a job, path relative to the output directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub path: String,
    pub contents: String,
}

pub(crate) fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn target(job: &Job) -> Result<(String, BooleanFunction)> {
    let text = job
        .target
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("{} job needs a target", job.mode.label())))?;
    let spec = FunctionSpec::parse(text)?;
    Ok((spec.text, spec.function))
}

fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("missing parameter `{what}`")))
}

/// Runs one job. `workers` only affects speed, never the output.
pub fn execute(job: &Job, workers: Workers) -> Result<Vec<Artifact>> {
    let act = Activation::parse(job.activation_text())?;
    let main = |contents: String| Artifact {
        path: job.output.clone(),
        contents,
    };
    match job.mode {
        Mode::Inal => {
            let (text, f) = target(job)?;
            let e = inal_job(job, &f, &act, workers)?;
            let row = vec![
                text,
                act.name(),
                f.n().to_string(),
                e.method.label().to_string(),
                e.samples.to_string(),
                e.value.to_string(),
                e.std_error.to_string(),
                job.seed.to_string(),
            ];
            Ok(vec![main(csv_text(INAL_HEADER, &[row]))])
        }
        Mode::Cp => cp_job(job, workers).map(|c| vec![main(c)]),
        Mode::Train => train_job(job, &act, workers),
        Mode::Hermite => {
            let order = job.order.unwrap_or(10);
            let v = job.variance.unwrap_or(1.0);
            let derivs = smoothing_derivatives_quadrature(&act, v, order)?;
            let coeffs = if v == 1.0 { Some(hermite_coeffs(&act, order)?) } else { None };
            let rows: Vec<Vec<String>> = derivs
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    let h = match &coeffs {
                        Some(c) => c[k].to_string(),
                        None => String::new(),
                    };
                    vec![act.name(), v.to_string(), k.to_string(), d.to_string(), h]
                })
                .collect();
            Ok(vec![main(csv_text(HERMITE_HEADER, &rows))])
        }
        Mode::Expressive => {
            let r = is_expressive(&act, job.order.unwrap_or(10), job.tol.unwrap_or(DEFAULT_ZERO_TOL))?;
            let verdict = r.verdict_label();
            let rows: Vec<Vec<String>> = r
                .derivatives
                .iter()
                .zip(&r.zero)
                .enumerate()
                .map(|(m, (d, z))| {
                    vec![
                        r.activation.clone(),
                        m.to_string(),
                        d.to_string(),
                        z.to_string(),
                        r.tol.to_string(),
                        verdict.clone(),
                    ]
                })
                .collect();
            Ok(vec![main(csv_text(EXPRESSIVE_HEADER, &rows))])
        }
        Mode::Moment => {
            let k = need(job.k, "k")?;
            let n = job.n.unwrap_or(100);
            let pattern = SignPattern {
                tau: job.tau.clone().unwrap_or_else(|| vec![1; k]),
                bias_sign: job.bias_sign.unwrap_or(1),
            };
            let nus: Vec<usize> = match job.nu {
                Some(nu) => vec![nu],
                None => (0..=(k + 4).min(MOMENT_CAP)).collect(),
            };
            let tau: Vec<String> = pattern.tau.iter().map(|s| s.to_string()).collect();
            let mut rows = Vec::new();
            for nu in nus {
                let r = moment_formula(k, nu, n, &pattern)?;
                rows.push(vec![
                    k.to_string(),
                    nu.to_string(),
                    n.to_string(),
                    tau.join(" "),
                    pattern.bias_sign.to_string(),
                    // + 0.0 folds -0 into 0
                    (r.value + 0.0).to_string(),
                    (r.constant + 0.0).to_string(),
                ]);
            }
            Ok(vec![main(csv_text(MOMENT_HEADER, &rows))])
        }
        Mode::Asymptotic => {
            let k = need(job.k, "k")?;
            let p = inal_monomial_asymptotic(k, &act)?;
            let dims = job.dims.clone().unwrap_or_else(|| vec![8, 16, 32, 64, 128, 256]);
            let kernel = !matches!(act, Activation::Pwl(_));
            let mut rows = Vec::new();
            for n in dims {
                let exact = if kernel && n >= k.max(1) {
                    monomial_inal_kernel(k, n, &act, job.bias.unwrap_or(true))?.value.to_string()
                } else {
                    String::new()
                };
                rows.push(vec![
                    act.name(),
                    k.to_string(),
                    p.p.to_string(),
                    p.a_p.to_string(),
                    p.c_p.to_string(),
                    p.leading_coefficient.to_string(),
                    n.to_string(),
                    p.envelope(n).to_string(),
                    exact,
                ]);
            }
            Ok(vec![main(csv_text(ASYMPTOTIC_HEADER, &rows))])
        }
        Mode::DatasetInal => dataset_inal_job(job, act, workers).map(|c| vec![main(c)]),
    }
}

fn inal_config(job: &Job, workers: Workers) -> InalConfig {
    let d = InalConfig::default();
    InalConfig {
        init_samples: job.init_samples.unwrap_or(d.init_samples),
        inner_samples: job.inner_samples.unwrap_or(d.inner_samples),
        seed: job.seed,
        bias: job.bias.unwrap_or(d.bias),
        workers,
    }
}

fn inal_job(job: &Job, f: &BooleanFunction, act: &Activation, workers: Workers) -> Result<InalEstimate> {
    let method_text = job.method.as_deref().unwrap_or("mc_paired");
    let method = Method::parse(method_text)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown INAL method `{method_text}`")))?;
    let cfg = inal_config(job, workers);
    match method {
        Method::ExactSmallN => inal_exact(f, act, &cfg),
        Method::McPaired => inal_mc_paired(f, act, &cfg),
        Method::DualKernel => inal_dual_kernel(f, act, cfg.bias),
        Method::Asymptotic => {
            let k = f
                .monomial_support()
                .ok_or_else(|| Error::Unsupported("asymptotic method needs a monomial target".into()))?
                .len();
            Ok(inal_monomial_asymptotic(k, act)?.estimate(f.n()))
        }
        Method::Decomposition => {
            let spec = f.spectrum()?;
            let weights = spec.degree_weights();
            let mut per_degree = BTreeMap::new();
            for (k, w) in weights.iter().enumerate() {
                if *w <= 1e-12 {
                    continue;
                }
                let e = match act {
                    Activation::Pwl(_) => {
                        let m = BooleanFunction::monomial_prefix(f.n(), k)?;
                        inal_mc_paired(&m, act, &cfg)?
                    }
                    _ => monomial_inal_kernel(k, f.n(), act, cfg.bias)?,
                };
                per_degree.insert(k, e);
            }
            inal_decompose(&spec, &per_degree)
        }
    }
}

fn cp_job(job: &Job, workers: Workers) -> Result<String> {
    let (text, f) = target(job)?;
    let big_n = need(job.big_n, "N")?;
    let method_text = job.method.as_deref().unwrap_or("spectral_mc_perm");
    let method = CpMethod::parse(method_text)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown CP method `{method_text}`")))?;
    let d = CpConfig::default();
    let cfg = CpConfig {
        samples: job.samples.unwrap_or(d.samples),
        inner_samples: job.inner_samples.unwrap_or(d.inner_samples),
        seed: job.seed,
        workers,
    };
    let e = match method {
        CpMethod::SpectralMcPerm => cp_spectral(&f, big_n, &cfg)?,
        CpMethod::ExactEnum => cp_exact_enum(&f, big_n)?,
        CpMethod::PairMc => cp_pair_mc(&Orbit(f.extend(big_n)?), &cfg)?,
    };
    let bounds = cp_bound(&f.spectrum()?.degree_weights(), f.n(), big_n)?;
    let row = vec![
        text,
        f.n().to_string(),
        big_n.to_string(),
        method.label().to_string(),
        e.samples.to_string(),
        e.value.to_string(),
        e.std_error.to_string(),
        bounds.k_star.to_string(),
        bounds.best().bound.to_string(),
        bounds.best_loose().to_string(),
        job.seed.to_string(),
    ];
    Ok(csv_text(CP_HEADER, &[row]))
}

fn template(job: &Job, act: Activation, n: usize) -> Result<NetTemplate> {
    let mut sizes = vec![n];
    sizes.extend(job.hidden.clone().unwrap_or_else(|| vec![512]));
    sizes.push(1);
    let init = match &job.init {
        Some(s) => InitSpec::parse(s)?,
        None => InitSpec::NormalizedGaussian,
    };
    Ok(NetTemplate {
        sizes,
        activation: act,
        init,
    })
}

fn load_dataset(path: &str, label: Option<&str>) -> Result<Dataset> {
    Dataset::from_csv(Path::new(path), label)
}

/// Run id derived from the output file name.
fn run_id(output: &str) -> String {
    Path::new(output)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| output.to_string())
        .replace(',', "_")
}

fn train_job(job: &Job, act: &Activation, workers: Workers) -> Result<Vec<Artifact>> {
    let dataset;
    let function;
    let (target_text, target) = match &job.dataset {
        Some(path) => {
            dataset = load_dataset(path, job.label.as_deref())?;
            (path.clone(), Target::Dataset(&dataset))
        }
        None => {
            let (text, f) = target(job)?;
            function = f;
            (text, Target::Boolean(&function))
        }
    };
    let t = template(job, act.clone(), target.n())?;
    let d = NoisyGDConfig::default();
    let loss = match &job.loss {
        Some(l) => Loss::parse(l)?,
        None => d.loss,
    };
    let cfg = NoisyGDConfig {
        gamma: job.gamma.unwrap_or(d.gamma),
        tau_noise: job.tau_noise.unwrap_or(d.tau_noise),
        overflow: job.overflow.unwrap_or(d.overflow),
        epochs: job.epochs.unwrap_or(d.epochs),
        steps_per_epoch: job.steps_per_epoch.unwrap_or(d.steps_per_epoch),
        batch: job.batch.unwrap_or(d.batch),
        loss,
        seed: job.seed,
        test_samples: job.test_samples.unwrap_or(d.test_samples),
        workers,
    };
    let mut net = FeedForwardNet::init(&t.sizes, t.activation.clone(), &t.init, job.seed)?;
    let id = run_id(&job.output);
    let mut trace: TrainTrace = Trainer::new(&mut net, target, cfg)?.run(&id)?;
    trace.metadata.push(("target".into(), target_text));
    trace.metadata.push(("init".into(), t.init.label()));
    let mut csv = format!("{}\n", TrainTrace::HEADER).into_bytes();
    trace.write_csv_rows(&mut csv).map_err(|e| Error::io(&job.output, e))?;
    Ok(vec![
        Artifact {
            path: job.output.clone(),
            contents: String::from_utf8(csv).expect("ascii rows"),
        },
        Artifact {
            path: format!("{}.meta", job.output),
            contents: trace.metadata_text(),
        },
    ])
}

fn dataset_inal_job(job: &Job, act: Activation, workers: Workers) -> Result<String> {
    let (name, data) = match &job.dataset {
        Some(path) => (path.clone(), load_dataset(path, job.label.as_deref())?),
        None => {
            let (text, f) = target(job)?;
            (text, Dataset::truth_table(&f)?)
        }
    };
    let act_name = act.name();
    let t = template(job, act, data.n())?;
    let rounds = job.init_rounds.unwrap_or(1000);
    let r = empirical_inal_dataset(&data, &t, rounds, job.seed, workers)?;
    let rows: Vec<Vec<String>> = r
        .neurons
        .iter()
        .enumerate()
        .map(|(i, v)| {
            vec![
                name.clone(),
                act_name.clone(),
                v.neuron.to_string(),
                v.layer.to_string(),
                v.index.to_string(),
                v.estimate.value.to_string(),
                v.estimate.std_error.to_string(),
                rounds.to_string(),
                job.seed.to_string(),
                (i == r.best).to_string(),
            ]
        })
        .collect();
    Ok(csv_text(DATASET_INAL_HEADER, &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(mode: Mode) -> Job {
        Job::new(mode, "out.csv")
    }

    #[test]
    fn inal_row() {
        let mut j = job(Mode::Inal);
        j.target = Some("parity:S=1,2;n=6".into());
        j.method = Some("exact_small_n".into());
        j.init_samples = Some(200);
        let a = execute(&j, Workers(1)).unwrap();
        let lines: Vec<&str> = a[0].contents.lines().collect();
        assert_eq!(lines[0], INAL_HEADER.join(","));
        assert!(lines[1].starts_with("\"parity:S=1,2;n=6\",relu,6,exact_small_n,200,"));
        assert_eq!(lines.len(), 2);
    }

    #[test]
    fn cp_row_exact() {
        let mut j = job(Mode::Cp);
        j.target = Some("parity:S=1;n=4".into());
        j.big_n = Some(16);
        j.method = Some("exact_enum".into());
        let a = execute(&j, Workers(1)).unwrap();
        let row = a[0].contents.lines().nth(1).unwrap();
        assert_eq!(row, "parity:S=1;n=4,4,16,exact_enum,16,0.0625,0,1,0.25,0.6795704571147613,1");
    }

    #[test]
    fn schemas_of_small_modes() {
        let mut e = job(Mode::Expressive);
        e.activation = Some("sign".into());
        let a = execute(&e, Workers(1)).unwrap();
        assert_eq!(a[0].contents.lines().count(), 12);
        assert!(a[0].contents.lines().nth(1).unwrap().ends_with(",expressive-up-to-10"));

        let mut m = job(Mode::Moment);
        m.k = Some(2);
        m.n = Some(4);
        let a = execute(&m, Workers(1)).unwrap();
        let rows: Vec<&str> = a[0].contents.lines().collect();
        assert_eq!(rows.len(), 8);
        assert!(rows[1].starts_with("2,0,4,1 1,1,0,"));

        let mut p = job(Mode::Asymptotic);
        p.k = Some(3);
        p.dims = Some(vec![16]);
        let a = execute(&p, Workers(1)).unwrap();
        assert!(a[0].contents.lines().nth(1).unwrap().starts_with("relu,3,4,"));

        let h = job(Mode::Hermite);
        let a = execute(&h, Workers(1)).unwrap();
        assert_eq!(a[0].contents.lines().count(), 12);
    }

    #[test]
    fn decomposition_matches_kernel() {
        let mut j = job(Mode::Inal);
        j.target = Some("maj:n=7".into());
        j.method = Some("decomposition".into());
        let f = BooleanFunction::majority(7).unwrap();
        let d = inal_job(&j, &f, &Activation::Relu, Workers(1)).unwrap();
        let k = inal_dual_kernel(&f, &Activation::Relu, true).unwrap();
        assert!((d.value - k.value).abs() < 1e-12);
    }

    #[test]
    fn train_and_dataset_inal() {
        let mut t = job(Mode::Train);
        t.target = Some("parity:S=1;n=4".into());
        t.hidden = Some(vec![8]);
        t.epochs = Some(2);
        t.steps_per_epoch = Some(2);
        t.batch = Some(16);
        t.test_samples = Some(64);
        let a = execute(&t, Workers(1)).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].contents.lines().count(), 3);
        assert!(a[1].contents.contains("target=parity:S=1;n=4"));
        assert_eq!(execute(&t, Workers(3)).unwrap(), a);

        let mut d = job(Mode::DatasetInal);
        d.target = Some("maj:n=3".into());
        d.hidden = Some(vec![2]);
        d.init_rounds = Some(10);
        let a = execute(&d, Workers(1)).unwrap();
        let rows: Vec<&str> = a[0].contents.lines().collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows.iter().filter(|r| r.ends_with(",true")).count(), 1);
    }
}
