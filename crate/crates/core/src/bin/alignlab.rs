use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use alignlab::expcli::{
    fig1_plan, fig1_summary, run_plan, validate, ExperimentPlan, Fig1Options, Job, JobStatus, Mode, RunOptions,
    Severity,
};
use alignlab::stats::Workers;

#[derive(Parser)]
#[command(name = "alignlab", version, about = "Initial alignment, cross-predictability and noisy-GD experiments")]
struct Cli {
    /// Master seed for every job built from flags.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Skip jobs recorded as completed in the manifest.
    #[arg(long, global = true)]
    resume: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Activation: relu, sign, pwl:@file.csv or pwl:x=..;y=..;left=..;right=..
    #[arg(long = "act", default_value = "relu")]
    activation: String,
    /// Output CSV, relative to --out-dir.
    #[arg(long, short)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Initial alignment of a Boolean target.
    Inal {
        #[arg(long)]
        target: String,
        #[command(flatten)]
        common: Common,
        /// exact_small_n, mc_paired, decomposition, asymptotic or dual_kernel.
        #[arg(long, default_value = "mc_paired")]
        method: String,
        #[arg(long, default_value_t = 10_000)]
        init_samples: usize,
        #[arg(long = "inner", default_value_t = 1_000)]
        inner_samples: usize,
        #[arg(long)]
        no_bias: bool,
    },
    /// Cross-predictability of the orbit of an N-extension.
    Cp {
        #[arg(long)]
        target: String,
        #[arg(long = "big-n", short = 'N')]
        big_n: usize,
        /// spectral_mc_perm, pair_mc or exact_enum.
        #[arg(long, default_value = "spectral_mc_perm")]
        method: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long = "inner", default_value_t = 1_000)]
        inner_samples: usize,
        #[arg(long)]
        output: Option<String>,
    },
    /// Noisy GD on a Boolean target or a CSV dataset.
    Train {
        #[arg(long, required_unless_present = "dataset")]
        target: Option<String>,
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 10)]
        steps_per_epoch: usize,
        #[arg(long, default_value_t = 1000)]
        batch: usize,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        tau_noise: f64,
        /// Gradient clipping range A; unbounded when absent.
        #[arg(long)]
        overflow: Option<f64>,
        /// square or logistic.
        #[arg(long, default_value = "square")]
        loss: String,
        #[arg(long, default_value_t = 10_000)]
        test_samples: usize,
    },
    /// Majority, staircase and parity trained side by side, plus their INAL.
    Fig1 {
        #[arg(long, default_value_t = 51)]
        n: usize,
        #[arg(long, default_value_t = 512)]
        width: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 10)]
        steps_per_epoch: usize,
        #[arg(long, default_value_t = 1000)]
        batch: usize,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = 10_000)]
        test_samples: usize,
        #[arg(long, default_value = "dual_kernel")]
        inal_method: String,
        #[arg(long, default_value_t = 10_000)]
        init_samples: usize,
        #[arg(long = "inner", default_value_t = 1_000)]
        inner_samples: usize,
    },
    /// Smoothing derivatives and Hermite coefficients.
    Hermite {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        order: usize,
        #[arg(long, default_value_t = 1.0)]
        variance: f64,
    },
    /// Finite-order expressivity verdict.
    Expressive {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        order: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Exact Gaussian moment E[M_T G^ν].
    Moment {
        #[arg(long)]
        k: usize,
        /// All ν up to k+4 when absent.
        #[arg(long)]
        nu: Option<usize>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Comma-separated signs of the monomial's weights.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        tau: Option<Vec<i8>>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        bias_sign: i8,
        #[arg(long)]
        output: Option<String>,
    },
    /// Leading-order monomial INAL prediction.
    Asymptotic {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
    },
    /// Per-neuron empirical INAL on a dataset.
    DatasetInal {
        #[arg(long, required_unless_present = "target")]
        dataset: Option<String>,
        #[arg(long)]
        label: Option<String>,
        /// Use the truth table of a Boolean target instead of a CSV.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = 1000)]
        init_rounds: usize,
    },
    /// Check a plan file and print diagnostics.
    Validate { plan: PathBuf },
    /// Run every job of a plan file.
    Run { plan: PathBuf },
}

#[derive(Args)]
struct NetArgs {
    /// Hidden widths, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "512")]
    hidden: Vec<usize>,
    /// normalized_gaussian, gaussian:mean=..;std=.. or uniform:lo=..;hi=..
    #[arg(long)]
    init: Option<String>,
}

fn job(mode: Mode, seed: u64, output: Option<String>, default: &str) -> Job {
    let mut j = Job::new(mode, output.unwrap_or_else(|| default.to_string()));
    j.seed = seed;
    j
}

fn single(cli: &Cli) -> Option<Job> {
    let seed = cli.seed;
    Some(match &cli.command {
        Command::Inal {
            target,
            common,
            method,
            init_samples,
            inner_samples,
            no_bias,
        } => {
            let mut j = job(Mode::Inal, seed, common.output.clone(), "inal.csv");
            j.target = Some(target.clone());
            j.activation = Some(common.activation.clone());
            j.method = Some(method.clone());
            j.init_samples = Some(*init_samples);
            j.inner_samples = Some(*inner_samples);
            j.bias = Some(!no_bias);
            j
        }
        Command::Cp {
            target,
            big_n,
            method,
            samples,
            inner_samples,
            output,
        } => {
            let mut j = job(Mode::Cp, seed, output.clone(), "cp.csv");
            j.target = Some(target.clone());
            j.big_n = Some(*big_n);
            j.method = Some(method.clone());
            j.samples = Some(*samples);
            j.inner_samples = Some(*inner_samples);
            j
        }
        Command::Train {
            target,
            dataset,
            label,
            common,
            net,
            epochs,
            steps_per_epoch,
            batch,
            gamma,
            tau_noise,
            overflow,
            loss,
            test_samples,
        } => {
            let mut j = job(Mode::Train, seed, common.output.clone(), "train.csv");
            j.target = target.clone();
            j.dataset = dataset.clone();
            j.label = label.clone();
            j.activation = Some(common.activation.clone());
            j.hidden = Some(net.hidden.clone());
            j.init = net.init.clone();
            j.epochs = Some(*epochs);
            j.steps_per_epoch = Some(*steps_per_epoch);
            j.batch = Some(*batch);
            j.gamma = Some(*gamma);
            j.tau_noise = Some(*tau_noise);
            j.overflow = *overflow;
            j.loss = Some(loss.clone());
            j.test_samples = Some(*test_samples);
            j
        }
        Command::Hermite {
            common,
            order,
            variance,
        } => {
            let mut j = job(Mode::Hermite, seed, common.output.clone(), "hermite.csv");
            j.activation = Some(common.activation.clone());
            j.order = Some(*order);
            j.variance = Some(*variance);
            j
        }
        Command::Expressive { common, order, tol } => {
            let mut j = job(Mode::Expressive, seed, common.output.clone(), "expressive.csv");
            j.activation = Some(common.activation.clone());
            j.order = Some(*order);
            j.tol = *tol;
            j
        }
        Command::Moment {
            k,
            nu,
            n,
            tau,
            bias_sign,
            output,
        } => {
            let mut j = job(Mode::Moment, seed, output.clone(), "moment.csv");
            j.k = Some(*k);
            j.nu = *nu;
            j.n = Some(*n);
            j.tau = tau.clone();
            j.bias_sign = Some(*bias_sign);
            j
        }
        Command::Asymptotic { k, common, dims } => {
            let mut j = job(Mode::Asymptotic, seed, common.output.clone(), "asymptotic.csv");
            j.k = Some(*k);
            j.activation = Some(common.activation.clone());
            j.dims = dims.clone();
            j
        }
        Command::DatasetInal {
            dataset,
            label,
            target,
            common,
            net,
            init_rounds,
        } => {
            let mut j = job(Mode::DatasetInal, seed, common.output.clone(), "dataset_inal.csv");
            j.dataset = dataset.clone();
            j.label = label.clone();
            j.target = target.clone();
            j.activation = Some(common.activation.clone());
            j.hidden = Some(net.hidden.clone());
            j.init = net.init.clone();
            j.init_rounds = Some(*init_rounds);
            j
        }
        Command::Fig1 { .. } | Command::Validate { .. } | Command::Run { .. } => return None,
    })
}

fn load(path: &std::path::Path) -> Result<ExperimentPlan, ExitCode> {
    ExperimentPlan::from_file(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}

fn execute(plan: &ExperimentPlan, opts: &RunOptions, echo: bool) -> ExitCode {
    let report = match run_plan(plan, opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    for (job, status) in plan.jobs.iter().zip(&report.statuses) {
        let path = opts.out_dir.join(&job.output);
        match status {
            JobStatus::Done | JobStatus::Skipped => {
                if echo {
                    if let Ok(text) = std::fs::read_to_string(&path) {
                        print!("{text}");
                    }
                }
                let how = if *status == JobStatus::Skipped { "skipped" } else { "wrote" };
                eprintln!("{how} {}", path.display());
            }
            JobStatus::Failed(msg) => eprintln!("error: {}: {msg}", job.output),
        }
    }
    ExitCode::from(report.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        out_dir: cli.out_dir.clone(),
        workers: Workers(cli.workers),
        resume: cli.resume,
    };
    if let Some(j) = single(&cli) {
        return execute(&ExperimentPlan::single(j), &opts, true);
    }
    match &cli.command {
        Command::Validate { plan } => {
            let plan = match load(plan) {
                Ok(p) => p,
                Err(code) => return code,
            };
            let diags = validate(&plan);
            for d in &diags {
                println!("{d}");
            }
            if diags.iter().any(|d| d.severity == Severity::Error) {
                ExitCode::from(2)
            } else {
                println!("ok: {} job(s)", plan.jobs.len());
                ExitCode::SUCCESS
            }
        }
        Command::Run { plan } => match load(plan) {
            Ok(p) => execute(&p, &opts, false),
            Err(code) => code,
        },
        Command::Fig1 {
            n,
            width,
            epochs,
            steps_per_epoch,
            batch,
            gamma,
            test_samples,
            inal_method,
            init_samples,
            inner_samples,
        } => {
            let o = Fig1Options {
                n: *n,
                width: *width,
                epochs: *epochs,
                steps_per_epoch: *steps_per_epoch,
                batch: *batch,
                gamma: *gamma,
                test_samples: *test_samples,
                inal_method: inal_method.clone(),
                init_samples: *init_samples,
                inner_samples: *inner_samples,
                seed: cli.seed,
            };
            let code = execute(&fig1_plan(&o), &opts, false);
            if code != ExitCode::SUCCESS {
                return code;
            }
            match fig1_summary(&opts.out_dir, &o) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        _ => unreachable!("single-job commands handled above"),
    }
}
