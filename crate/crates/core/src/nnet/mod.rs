//! Fully connected feed-forward networks with a linear output neuron read
//! through `sign`, trained by noisy (clipped, Gaussian-perturbed) SGD.
//!
//! Inputs are stored in *key order*: internal feature `k` is
//! `x[input_order[k]]`. First-layer weights, sampled inputs and test sets are
//! all indexed by key, so relabelling the input coordinates of a net (and of
//! its target) reproduces a run bit for bit.

mod data;
mod train;

pub use data::{Dataset, Target};
pub use train::{evaluate, train_noisy_gd, EpochRecord, Loss, NoisyGDConfig, StepStats, TrainTrace, Trainer};

use crate::activation::Activation;
use crate::boolfn::{sign_of, Permutation};
use crate::error::{Error, Result};
use crate::rng::{normal, stream_rng2, Stream};
use rand::Rng;

/// Initialization distribution for weights and biases.
#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    /// `N(0, 1/fan_in)` for every weight and bias.
    NormalizedGaussian,
    Gaussian { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl InitSpec {
    /// `normalized_gaussian`, `gaussian:mean=0;std=0.1`, `uniform:lo=-1;hi=1`.
    pub fn parse(text: &str) -> Result<Self> {
        let (head, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut kv = std::collections::HashMap::new();
        for part in rest.split(';').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(text, format!("expected key=value, got `{part}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::parse(text, format!("bad number `{v}`")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let get = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| Error::parse(text, format!("missing `{k}`")))
        };
        let spec = match head.trim() {
            "normalized_gaussian" => InitSpec::NormalizedGaussian,
            "gaussian" => InitSpec::Gaussian {
                mean: get("mean")?,
                std: get("std")?,
            },
            "uniform" => InitSpec::Uniform {
                lo: get("lo")?,
                hi: get("hi")?,
            },
            other => return Err(Error::parse(text, format!("unknown init `{other}`"))),
        };
        match spec {
            InitSpec::Gaussian { std, .. } if !(std >= 0.0) => {
                Err(Error::parse(text, "std must be non-negative"))
            }
            InitSpec::Uniform { lo, hi } if !(lo < hi) => Err(Error::parse(text, "need lo < hi")),
            s => Ok(s),
        }
    }

    pub fn label(&self) -> String {
        match self {
            InitSpec::NormalizedGaussian => "normalized_gaussian".into(),
            InitSpec::Gaussian { mean, std } => format!("gaussian:mean={mean};std={std}"),
            InitSpec::Uniform { lo, hi } => format!("uniform:lo={lo};hi={hi}"),
        }
    }

    fn draw<R: Rng>(&self, fan_in: usize, rng: &mut R) -> f64 {
        match *self {
            InitSpec::NormalizedGaussian => normal(rng) / (fan_in as f64).sqrt(),
            InitSpec::Gaussian { mean, std } => mean + std * normal(rng),
            InitSpec::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }
}

/// Architecture and initialization, without weights.
#[derive(Clone, Debug, PartialEq)]
pub struct NetTemplate {
    pub sizes: Vec<usize>,
    pub activation: Activation,
    pub init: InitSpec,
}

impl NetTemplate {
    pub fn build(&self, seed: u64, round: u32) -> Result<FeedForwardNet> {
        FeedForwardNet::init_round(&self.sizes, self.activation.clone(), &self.init, seed, round)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct LayerOffsets {
    weights: usize,
    bias: usize,
}

/// Layered fully connected network; hidden layers apply σ, the single output
/// neuron is linear and thresholded by `sign` (with `sign(0) = +1`).
#[derive(Clone, Debug, PartialEq)]
pub struct FeedForwardNet {
    sizes: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<LayerOffsets>,
    act: Activation,
    input_order: Vec<usize>,
}

/// Per-sample forward state kept for backprop.
pub(crate) struct Tape {
    /// Pre-activations per non-input layer.
    z: Vec<Vec<f64>>,
    /// Outputs per layer; `a[0]` is the key-ordered input.
    a: Vec<Vec<f64>>,
}

impl FeedForwardNet {
    /// `sizes = [n, h_1, …, h_L, 1]` with at least one hidden layer.
    pub fn init(sizes: &[usize], act: Activation, init: &InitSpec, seed: u64) -> Result<Self> {
        Self::init_round(sizes, act, init, seed, 0)
    }

    /// Independent initialization number `round` under the same seed.
    pub fn init_round(sizes: &[usize], act: Activation, init: &InitSpec, seed: u64, round: u32) -> Result<Self> {
        if sizes.len() < 3 {
            return Err(Error::InvalidArgument(
                "need input, at least one hidden layer, and an output layer".into(),
            ));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidArgument(format!("layer {i} has width 0")));
        }
        if *sizes.last().unwrap() != 1 {
            return Err(Error::InvalidArgument("output layer must have width 1".into()));
        }
        let mut offsets = Vec::with_capacity(sizes.len() - 1);
        let mut total = 0;
        for pair in sizes.windows(2) {
            let weights = total;
            total += pair[0] * pair[1];
            offsets.push(LayerOffsets { weights, bias: total });
            total += pair[1];
        }
        let mut params = vec![0.0; total];
        for (l, pair) in sizes.windows(2).enumerate() {
            let (fan_in, width) = (pair[0], pair[1]);
            let off = offsets[l];
            for j in 0..width {
                let mut rng = stream_rng2(seed, Stream::NetInit, ((round as u64) << 32) | l as u64, j as u64);
                for k in 0..fan_in {
                    params[off.weights + j * fan_in + k] = init.draw(fan_in, &mut rng);
                }
                params[off.bias + j] = init.draw(fan_in, &mut rng);
            }
        }
        Ok(FeedForwardNet {
            sizes: sizes.to_vec(),
            params,
            offsets,
            act,
            input_order: (0..sizes[0]).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.sizes[0]
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activation(&self) -> &Activation {
        &self.act
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_order(&self) -> &[usize] {
        &self.input_order
    }

    /// Weight from input coordinate `input` into first-layer neuron `neuron`.
    pub fn first_layer_weight(&self, neuron: usize, input: usize) -> f64 {
        let key = self
            .input_order
            .iter()
            .position(|&c| c == input)
            .expect("input coordinate in range");
        self.params[self.offsets[0].weights + neuron * self.n() + key]
    }

    /// Relabels input coordinates: coordinate `i` of this net becomes
    /// coordinate `perm(i)`. Training the result on `f∘π` replays training
    /// this net on `f` exactly.
    pub fn permute_inputs(&self, perm: &Permutation) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: perm.len(),
            });
        }
        let mut out = self.clone();
        out.input_order = self.input_order.iter().map(|&c| perm.apply(c)).collect();
        Ok(out)
    }

    /// Gathers `x` into key order.
    pub(crate) fn to_keys(&self, x: &[f64]) -> Vec<f64> {
        self.input_order.iter().map(|&c| x[c]).collect()
    }

    /// Scatters key-ordered values back to coordinates.
    pub(crate) fn from_keys<T: Copy + Default>(&self, keys: &[T]) -> Vec<T> {
        let mut x = vec![T::default(); keys.len()];
        for (k, &c) in self.input_order.iter().enumerate() {
            x[c] = keys[k];
        }
        x
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn forward_tape(&self, keys: &[f64]) -> Tape {
        let layers = self.sizes.len() - 1;
        let mut z = Vec::with_capacity(layers);
        let mut a = Vec::with_capacity(layers + 1);
        a.push(keys.to_vec());
        for l in 0..layers {
            let (fan_in, width) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offsets[l];
            let input = &a[l];
            let zl: Vec<f64> = (0..width)
                .map(|j| {
                    let row = &self.params[off.weights + j * fan_in..off.weights + (j + 1) * fan_in];
                    row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>() + self.params[off.bias + j]
                })
                .collect();
            let al = if l + 1 == layers {
                zl.clone()
            } else {
                zl.iter().map(|&v| self.act.eval(v)).collect()
            };
            z.push(zl);
            a.push(al);
        }
        Tape { z, a }
    }

    pub(crate) fn output_keyed(&self, keys: &[f64]) -> f64 {
        self.forward_tape(keys).a.last().unwrap()[0]
    }

    /// `(pre-threshold output, sign prediction)`.
    pub fn forward(&self, x: &[f64]) -> Result<(f64, i8)> {
        self.check_input(x)?;
        let out = self.output_keyed(&self.to_keys(x));
        Ok((out, sign_of(out)))
    }

    /// Output of every non-input neuron, layer by layer; the last entry is
    /// the (linear) output neuron.
    pub fn neuron_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let tape = self.forward_tape(&self.to_keys(x));
        Ok(tape.a.into_iter().skip(1).flatten().collect())
    }

    /// Adds `scale · ∂out/∂θ · dout` into `grad`, given the tape of one sample.
    pub(crate) fn backprop(&self, tape: &Tape, dout: f64, grad: &mut [f64]) {
        let layers = self.sizes.len() - 1;
        let mut delta = vec![dout];
        for l in (0..layers).rev() {
            let (fan_in, width) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offsets[l];
            let input = &tape.a[l];
            for j in 0..width {
                let d = delta[j];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off.weights + j * fan_in..off.weights + (j + 1) * fan_in];
                for (g, v) in row.iter_mut().zip(input) {
                    *g += d * v;
                }
                grad[off.bias + j] += d;
            }
            if l == 0 {
                break;
            }
            let mut prev = vec![0.0; fan_in];
            for (j, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                let row = &self.params[off.weights + j * fan_in..off.weights + (j + 1) * fan_in];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            for (p, z) in prev.iter_mut().zip(&tape.z[l - 1]) {
                *p *= self.act.derivative(*z);
            }
            delta = prev;
        }
    }

    /// Loss and its gradient at one sample (coordinates, not keys).
    pub fn loss_gradient(&self, x: &[f64], y: f64, loss: Loss) -> Result<(f64, Vec<f64>)> {
        self.check_input(x)?;
        let tape = self.forward_tape(&self.to_keys(x));
        let out = tape.a.last().unwrap()[0];
        let mut grad = vec![0.0; self.params.len()];
        self.backprop(&tape, loss.derivative(out, y), &mut grad);
        Ok((loss.value(out, y), grad))
    }

    /// Smallest `|z|` distance of any hidden pre-activation to a kink of σ.
    pub fn kink_margin(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let tape = self.forward_tape(&self.to_keys(x));
        let kinks = self.act.breakpoints();
        let hidden = &tape.z[..tape.z.len() - 1];
        Ok(hidden
            .iter()
            .flatten()
            .flat_map(|z| kinks.iter().map(move |k| (z - k).abs()))
            .fold(f64::INFINITY, f64::min))
    }
}
