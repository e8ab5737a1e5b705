use std::fmt::Write as _;
use std::io::Write;

use rand::Rng;

use super::{Dataset, FeedForwardNet, Target};
use crate::boolfn::sign_of;
use crate::error::{Error, Result};
use crate::rng::{fill_signs, normal, stream_rng, Stream};
use crate::stats::{pairwise_sum, Workers};

/// Samples per gradient chunk; chunks are reduced in index order.
const CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loss {
    /// `(out − y)² / 2`.
    Square,
    /// `ln(1 + e^{−y·out})`.
    Logistic,
}

impl Loss {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Loss::Square),
            "logistic" => Ok(Loss::Logistic),
            _ => Err(Error::parse(s, "expected `square` or `logistic`")),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Loss::Square => "square",
            Loss::Logistic => "logistic",
        }
    }

    pub fn value(self, out: f64, y: f64) -> f64 {
        match self {
            Loss::Square => 0.5 * (out - y) * (out - y),
            Loss::Logistic => {
                let m = -y * out;
                m.max(0.0) + (-m.abs()).exp().ln_1p()
            }
        }
    }

    pub fn derivative(self, out: f64, y: f64) -> f64 {
        match self {
            Loss::Square => out - y,
            Loss::Logistic => {
                let m = -y * out;
                let s = if m >= 0.0 {
                    1.0 / (1.0 + (-m).exp())
                } else {
                    let e = m.exp();
                    e / (1.0 + e)
                };
                -y * s
            }
        }
    }
}

/// Noisy SGD: per step, each gradient component is clipped to `[−A, A]`,
/// then perturbed by `N(0, τ²)`, then `θ ← θ − γ·(·)`.
#[derive(Clone, Copy, Debug)]
pub struct NoisyGDConfig {
    pub gamma: f64,
    pub tau_noise: f64,
    /// Overflow range `A`; `f64::INFINITY` disables clipping.
    pub overflow: f64,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub batch: usize,
    pub loss: Loss,
    pub seed: u64,
    /// Held-out uniform samples for Boolean targets.
    pub test_samples: usize,
    pub workers: Workers,
}

impl Default for NoisyGDConfig {
    fn default() -> Self {
        NoisyGDConfig {
            gamma: 0.01,
            tau_noise: 0.0,
            overflow: f64::INFINITY,
            epochs: 100,
            steps_per_epoch: 10,
            batch: 1000,
            loss: Loss::Square,
            seed: 1,
            test_samples: 10_000,
            workers: Workers::default(),
        }
    }
}

impl NoisyGDConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("γ must be positive and finite");
        }
        if !(self.overflow > 0.0) {
            return bad("overflow range A must be positive");
        }
        if !(self.tau_noise >= 0.0 && self.tau_noise.is_finite()) {
            return bad("τ_noise must be non-negative and finite");
        }
        if self.batch == 0 || self.steps_per_epoch == 0 || self.test_samples == 0 {
            return bad("batch, steps_per_epoch and test_samples must be positive");
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        self.epochs * self.steps_per_epoch
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    pub step: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean batch accuracy over the epoch, measured before each update.
    pub train_acc: f64,
    pub test_acc: f64,
    /// `E[f(x) · prediction]` on the test set.
    pub g: f64,
    /// Mean batch loss over the epoch.
    pub loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrace {
    pub run_id: String,
    pub records: Vec<EpochRecord>,
    pub metadata: Vec<(String, String)>,
}

impl TrainTrace {
    pub const HEADER: &'static str = "run_id,epoch,train_acc,test_acc,g,loss";

    pub fn write_csv_rows(&self, out: &mut impl Write) -> std::io::Result<()> {
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.run_id, r.epoch, r.train_acc, r.test_acc, r.g, r.loss
            )?;
        }
        Ok(())
    }

    /// `key=value` lines.
    pub fn metadata_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

struct Sample {
    keys: Vec<f64>,
    y: f64,
}

fn boolean_samples(net: &FeedForwardNet, f: &crate::boolfn::BooleanFunction, count: usize, rng: &mut impl Rng) -> Vec<Sample> {
    let mut bits = vec![0i8; net.n()];
    (0..count)
        .map(|_| {
            fill_signs(rng, &mut bits);
            let x = net.from_keys(&bits);
            Sample {
                keys: bits.iter().map(|&b| b as f64).collect(),
                y: f.eval_unchecked(&x) as f64,
            }
        })
        .collect()
}

fn dataset_samples(net: &FeedForwardNet, d: &Dataset, count: usize, rng: &mut impl Rng) -> Vec<Sample> {
    (0..count)
        .map(|_| {
            let i = rng.random_range(0..d.len());
            Sample {
                keys: net.to_keys(d.row(i)),
                y: d.label(i),
            }
        })
        .collect()
}

fn check_target(net: &FeedForwardNet, target: &Target) -> Result<()> {
    if target.n() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            got: target.n(),
        });
    }
    if let Target::Dataset(d) = target {
        if d.is_empty() {
            return Err(Error::InvalidArgument("dataset is empty".into()));
        }
    }
    Ok(())
}

fn test_set(net: &FeedForwardNet, target: &Target, test_samples: usize, seed: u64) -> Vec<Sample> {
    match target {
        Target::Boolean(f) => {
            let mut rng = stream_rng(seed, Stream::TestSet, 0);
            boolean_samples(net, f, test_samples, &mut rng)
        }
        Target::Dataset(d) => (0..d.len())
            .map(|i| Sample {
                keys: net.to_keys(d.row(i)),
                y: d.label(i),
            })
            .collect(),
    }
}

fn score(net: &FeedForwardNet, samples: &[Sample], workers: Workers) -> (f64, f64) {
    let preds = workers.map(samples.len(), |i| sign_of(net.output_keyed(&samples[i].keys)) as f64);
    let matches = samples
        .iter()
        .zip(&preds)
        .filter(|(s, &p)| sign_of(s.y) as f64 == p)
        .count();
    let products: Vec<f64> = samples.iter().zip(&preds).map(|(s, p)| s.y * p).collect();
    let m = samples.len().max(1) as f64;
    (matches as f64 / m, pairwise_sum(&products) / m)
}

/// `(accuracy, g)` where `g = mean of y · prediction`; for ±1 labels
/// `accuracy = (1 + g)/2`. Boolean targets use `test_samples` fresh uniform
/// points from `seed`; datasets use every row.
pub fn evaluate(net: &FeedForwardNet, target: &Target, test_samples: usize, seed: u64) -> Result<(f64, f64)> {
    check_target(net, target)?;
    Ok(score(net, &test_set(net, target, test_samples, seed), Workers::default()))
}

/// Stepwise driver; [`train_noisy_gd`] runs it to completion.
pub struct Trainer<'a> {
    net: &'a mut FeedForwardNet,
    target: Target<'a>,
    cfg: NoisyGDConfig,
    step: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(net: &'a mut FeedForwardNet, target: Target<'a>, cfg: NoisyGDConfig) -> Result<Self> {
        cfg.validate()?;
        check_target(net, &target)?;
        if !net.activation().trainable() {
            return Err(Error::Unsupported(format!(
                "activation `{}` is not trainable",
                net.activation().name()
            )));
        }
        Ok(Trainer {
            net,
            target,
            cfg,
            step: 0,
        })
    }

    pub fn net(&self) -> &FeedForwardNet {
        self.net
    }

    pub fn step(&mut self) -> Result<StepStats> {
        let cfg = self.cfg;
        let mut rng = stream_rng(cfg.seed, Stream::Batch, self.step as u64);
        let batch = match self.target {
            Target::Boolean(f) => boolean_samples(self.net, f, cfg.batch, &mut rng),
            Target::Dataset(d) => dataset_samples(self.net, d, cfg.batch, &mut rng),
        };
        let net: &FeedForwardNet = self.net;
        let chunks = batch.len().div_ceil(CHUNK);
        let parts = cfg.workers.map_any(chunks, |c| {
            let mut grad = vec![0.0; net.num_params()];
            let mut loss = 0.0;
            let mut correct = 0usize;
            for s in &batch[c * CHUNK..((c + 1) * CHUNK).min(batch.len())] {
                let tape = net.forward_tape(&s.keys);
                let out = tape.a.last().unwrap()[0];
                loss += cfg.loss.value(out, s.y);
                correct += (sign_of(out) == sign_of(s.y)) as usize;
                net.backprop(&tape, cfg.loss.derivative(out, s.y), &mut grad);
            }
            (grad, loss, correct)
        });
        let m = batch.len() as f64;
        let mut grad = vec![0.0; net.num_params()];
        let mut loss = 0.0;
        let mut correct = 0;
        for (g, l, c) in &parts {
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
            loss += l;
            correct += c;
        }
        loss /= m;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                step: self.step,
                value: loss,
            });
        }
        let mut noise = stream_rng(cfg.seed, Stream::Noise, self.step as u64);
        for (p, g) in self.net.params_mut().iter_mut().zip(&grad) {
            let mut u = (g / m).clamp(-cfg.overflow, cfg.overflow);
            if cfg.tau_noise > 0.0 {
                u += cfg.tau_noise * normal(&mut noise);
            }
            *p -= cfg.gamma * u;
        }
        let stats = StepStats {
            step: self.step,
            loss,
            accuracy: correct as f64 / m,
        };
        self.step += 1;
        Ok(stats)
    }

    pub fn metadata(&self, run_id: &str) -> Vec<(String, String)> {
        let c = &self.cfg;
        let sizes: Vec<String> = self.net.layer_sizes().iter().map(|s| s.to_string()).collect();
        let (kind, sampling) = match self.target {
            Target::Boolean(_) => ("boolean", "online_uniform"),
            Target::Dataset(_) => ("dataset", "dataset_with_replacement"),
        };
        [
            ("run_id", run_id.to_string()),
            ("layer_sizes", sizes.join("-")),
            ("activation", self.net.activation().name()),
            ("gamma", c.gamma.to_string()),
            ("tau_noise", c.tau_noise.to_string()),
            ("overflow_a", c.overflow.to_string()),
            ("epochs", c.epochs.to_string()),
            ("steps_per_epoch", c.steps_per_epoch.to_string()),
            ("batch", c.batch.to_string()),
            ("loss", c.loss.label().to_string()),
            ("seed", c.seed.to_string()),
            ("test_samples", c.test_samples.to_string()),
            ("target_kind", kind.to_string()),
            ("sampling", sampling.to_string()),
            ("update_order", "clip_then_noise".to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Runs every remaining epoch and records the trace.
    pub fn run(mut self, run_id: &str) -> Result<TrainTrace> {
        let cfg = self.cfg;
        let metadata = self.metadata(run_id);
        let tests = test_set(self.net, &self.target, cfg.test_samples, cfg.seed);
        let mut records = Vec::with_capacity(cfg.epochs);
        for epoch in 0..cfg.epochs {
            let (mut loss, mut acc) = (0.0, 0.0);
            for _ in 0..cfg.steps_per_epoch {
                let s = self.step()?;
                loss += s.loss;
                acc += s.accuracy;
            }
            let (test_acc, g) = score(self.net, &tests, cfg.workers);
            let k = cfg.steps_per_epoch as f64;
            records.push(EpochRecord {
                epoch: epoch + 1,
                train_acc: acc / k,
                test_acc,
                g,
                loss: loss / k,
            });
        }
        Ok(TrainTrace {
            run_id: run_id.to_string(),
            records,
            metadata,
        })
    }
}

/// Trains `net` in place and returns the per-epoch trace.
pub fn train_noisy_gd(net: &mut FeedForwardNet, target: Target, cfg: &NoisyGDConfig, run_id: &str) -> Result<TrainTrace> {
    Trainer::new(net, target, *cfg)?.run(run_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;
    use crate::boolfn::{BooleanFunction, Permutation};
    use crate::nnet::InitSpec;

    fn net(sizes: &[usize], seed: u64) -> FeedForwardNet {
        FeedForwardNet::init(sizes, Activation::Relu, &InitSpec::NormalizedGaussian, seed).unwrap()
    }

    fn small_cfg() -> NoisyGDConfig {
        NoisyGDConfig {
            gamma: 0.05,
            epochs: 4,
            steps_per_epoch: 5,
            batch: 64,
            test_samples: 500,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn loss_derivatives() {
        for loss in [Loss::Square, Loss::Logistic] {
            for (out, y) in [(0.3, 1.0), (-2.0, 1.0), (40.0, -1.0), (-0.1, -1.0)] {
                let h = 1e-6;
                let fd = (loss.value(out + h, y) - loss.value(out - h, y)) / (2.0 * h);
                assert!((fd - loss.derivative(out, y)).abs() < 1e-6);
            }
        }
        assert!(Loss::Logistic.value(-800.0, 1.0).is_finite());
    }

    #[test]
    fn plain_gd_descends_on_two_points() {
        let d = Dataset::new(2, vec![1.0, -1.0, -1.0, 1.0], vec![1.0, -1.0]).unwrap();
        let mut n = net(&[2, 6, 1], 2);
        let cfg = NoisyGDConfig {
            gamma: 0.01,
            batch: 2,
            ..small_cfg()
        };
        let mut t = Trainer::new(&mut n, Target::Dataset(&d), cfg).unwrap();
        // full batch: evaluate the exact loss at each iterate
        let exact = |net: &FeedForwardNet| {
            (0..2)
                .map(|i| Loss::Square.value(net.forward(d.row(i)).unwrap().0, d.label(i)))
                .sum::<f64>()
                / 2.0
        };
        let mut prev = exact(t.net());
        for _ in 0..20 {
            // with replacement, so average the exact loss not the batch loss
            t.step().unwrap();
            let now = exact(t.net());
            assert!(now <= prev + 1e-3 * prev, "{now} > {prev}");
            prev = now;
        }
    }

    #[test]
    fn reproducible() {
        let f = BooleanFunction::majority(7).unwrap();
        let run = |w| {
            let mut n = net(&[7, 16, 1], 5);
            let cfg = NoisyGDConfig {
                tau_noise: 0.01,
                workers: Workers(w),
                ..small_cfg()
            };
            train_noisy_gd(&mut n, Target::Boolean(&f), &cfg, "r").unwrap()
        };
        let a = run(1);
        assert_eq!(a, run(1));
        assert_eq!(a, run(3));
        assert_eq!(a.records.len(), 4);
        assert!(a.metadata_text().contains("update_order=clip_then_noise"));
    }

    #[test]
    fn permutation_equivariance_is_literal() {
        let f = BooleanFunction::staircase(3, 6).unwrap();
        let perm = Permutation::new(vec![4, 0, 5, 2, 1, 3]).unwrap();
        let g = f.permute(&perm).unwrap();
        let cfg = NoisyGDConfig {
            tau_noise: 0.02,
            ..small_cfg()
        };
        let mut a = net(&[6, 12, 1], 8);
        let mut b = a.permute_inputs(&perm).unwrap();
        let ta = train_noisy_gd(&mut a, Target::Boolean(&f), &cfg, "x").unwrap();
        let tb = train_noisy_gd(&mut b, Target::Boolean(&g), &cfg, "x").unwrap();
        assert_eq!(ta.records, tb.records);
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn noise_std_matches_gamma_tau() {
        let f = BooleanFunction::majority(5).unwrap();
        let mut n = net(&[5, 4, 1], 1);
        let cfg = NoisyGDConfig {
            gamma: 1e-6,
            tau_noise: 50.0,
            batch: 8,
            ..small_cfg()
        };
        let mut t = Trainer::new(&mut n, Target::Boolean(&f), cfg).unwrap();
        let mut diffs = Vec::new();
        for _ in 0..400 {
            let before = t.net().params().to_vec();
            t.step().unwrap();
            diffs.extend(t.net().params().iter().zip(&before).map(|(a, b)| a - b));
        }
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64).sqrt();
        let expect = cfg.gamma * cfg.tau_noise;
        assert!((sd / expect - 1.0).abs() < 0.1, "{sd} vs {expect}");
    }

    #[test]
    fn clipping_bounds_movement() {
        let f = BooleanFunction::monomial(6, &[0, 1]).unwrap();
        let mut n = net(&[6, 10, 1], 2);
        let cfg = NoisyGDConfig {
            gamma: 0.1,
            tau_noise: 0.01,
            overflow: 1e-9,
            ..small_cfg()
        };
        let p = n.num_params() as f64;
        let bound = cfg.gamma * (cfg.overflow + 5.0 * cfg.tau_noise) * p.sqrt();
        let mut t = Trainer::new(&mut n, Target::Boolean(&f), cfg).unwrap();
        let mut ok = 0;
        for _ in 0..200 {
            let before = t.net().params().to_vec();
            t.step().unwrap();
            let moved: f64 = t.net().params().iter().zip(&before).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            ok += (moved <= bound) as usize;
        }
        assert!(ok >= 198);
    }

    #[test]
    fn evaluate_identities() {
        // single hidden relu pair computing x1 = relu(x1) − relu(−x1)
        let mut n = net(&[3, 2, 1], 1);
        n.params_mut().copy_from_slice(&[1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0]);
        let m1 = BooleanFunction::monomial(3, &[0]).unwrap();
        assert_eq!(evaluate(&n, &Target::Boolean(&m1), 1000, 1).unwrap(), (1.0, 1.0));
        let maj = BooleanFunction::majority(3).unwrap();
        let (acc, g) = evaluate(&n, &Target::Boolean(&maj), 4000, 2).unwrap();
        assert!((acc - (1.0 + g) / 2.0).abs() < 1e-15);
        assert!((acc - 0.75).abs() < 0.03);
        let p = BooleanFunction::monomial(3, &[0, 1, 2]).unwrap();
        let (acc, _) = evaluate(&n, &Target::Boolean(&p), 4000, 3).unwrap();
        assert!((acc - 0.5).abs() <= 3.0 / 4000f64.sqrt());
    }

    #[test]
    fn rejects_bad_configs() {
        let f = BooleanFunction::majority(3).unwrap();
        let mut n = net(&[3, 2, 1], 1);
        for cfg in [
            NoisyGDConfig { gamma: 0.0, ..small_cfg() },
            NoisyGDConfig { overflow: 0.0, ..small_cfg() },
            NoisyGDConfig { tau_noise: -1.0, ..small_cfg() },
        ] {
            assert!(Trainer::new(&mut n, Target::Boolean(&f), cfg).is_err());
        }
        let g = BooleanFunction::majority(5).unwrap();
        assert!(Trainer::new(&mut n, Target::Boolean(&g), small_cfg()).is_err());
        let mut s = FeedForwardNet::init(&[3, 2, 1], Activation::Sign, &InitSpec::NormalizedGaussian, 1).unwrap();
        assert!(Trainer::new(&mut s, Target::Boolean(&f), small_cfg()).is_err());
    }

    #[test]
    fn non_finite_loss_aborts() {
        let f = BooleanFunction::majority(3).unwrap();
        let mut n = net(&[3, 2, 1], 1);
        n.params_mut()[0] = f64::NAN;
        n.params_mut().iter_mut().skip(6).for_each(|p| *p = f64::NAN);
        let err = train_noisy_gd(&mut n, Target::Boolean(&f), &small_cfg(), "nan").unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { step: 0, .. }));
    }
}
