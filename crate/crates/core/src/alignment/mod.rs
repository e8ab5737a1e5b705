//! Initial alignment (INAL) between a target function and a single neuron
//! `σ(w·x + b)` with `w_i, b ~ N(0, 1/n)` iid, i.e.
//! `INAL(f, σ) = E_{w,b}[⟨f, σ(w·x + b)⟩²]` under uniform `x ∈ {±1}^n`.
//!
//! Estimators:
//! * [`inal_exact`]: exact inner correlation (`n <= 14`), Monte Carlo over the init;
//! * [`inal_mc_paired`]: two independent inner sample sets per init, whose
//!   product is unbiased for the squared correlation;
//! * [`inal_dual_kernel`]: deterministic, via the arc-cosine kernel of the init;
//! * [`inal_decompose`]: `Σ_k W^k · INAL(M_k, σ)` from per-degree values;
//! * [`inal_monomial_asymptotic`]: dominant-term lower envelope for monomials.

mod asymptotic;
mod cross;
mod dataset;
mod decompose;
mod exact;
mod kernel;
mod mc;
mod moment;

pub use asymptotic::{inal_monomial_asymptotic, AsymptoticPrediction};
pub use cross::{cross_term, CrossTermEstimate};
pub use dataset::{empirical_inal_dataset, Dataset, DatasetInal, NeuronInal};
pub use decompose::inal_decompose;
pub use exact::{exact_correlation, exact_preactivations, inal_exact, EXACT_CAP};
pub use kernel::{inal_dual_kernel, monomial_inal_kernel};
pub use mc::inal_mc_paired;
pub use moment::{abs_gaussian_moment, moment_formula, MomentFormulaResult, SignPattern, MOMENT_CAP};

use crate::rng::{normal, stream_rng, Stream};
use crate::stats::Workers;

/// How an [`InalEstimate`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ExactSmallN,
    McPaired,
    Decomposition,
    Asymptotic,
    DualKernel,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ExactSmallN => "exact_small_n",
            Method::McPaired => "mc_paired",
            Method::Decomposition => "decomposition",
            Method::Asymptotic => "asymptotic",
            Method::DualKernel => "dual_kernel",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Some(match s {
            "exact_small_n" | "exact" => Method::ExactSmallN,
            "mc_paired" | "mc" => Method::McPaired,
            "decomposition" => Method::Decomposition,
            "asymptotic" => Method::Asymptotic,
            "dual_kernel" | "kernel" => Method::DualKernel,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InalEstimate {
    pub value: f64,
    /// Standard error for Monte-Carlo methods; a floating-point error bound
    /// for `dual_kernel`; zero for `asymptotic`.
    pub std_error: f64,
    pub method: Method,
    /// Init samples (outer Monte Carlo).
    pub samples: usize,
    /// Inner samples per set, for `mc_paired`.
    pub inner_samples: usize,
}

impl InalEstimate {
    /// `|a − b| <= k · sqrt(se_a² + se_b²)`.
    pub fn agrees_with(&self, other: &InalEstimate, k_sigma: f64) -> bool {
        (self.value - other.value).abs() <= k_sigma * self.std_error.hypot(other.std_error)
    }
}

/// Single-neuron initialization `w_i, b ~ N(0, 1/n)` iid.
#[derive(Clone, Copy, Debug)]
pub struct NeuronInit {
    pub n: usize,
    /// When false, `b ≡ 0`.
    pub bias: bool,
    pub seed: u64,
}

impl NeuronInit {
    pub fn new(n: usize, seed: u64) -> Self {
        NeuronInit { n, bias: true, seed }
    }

    pub fn variance(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Init sample `index`; depends only on `(seed, index)`.
    pub fn sample(&self, index: u64) -> (Vec<f64>, f64) {
        let mut rng = stream_rng(self.seed, Stream::Init, index);
        let sd = self.variance().sqrt();
        let w = (0..self.n).map(|_| sd * normal(&mut rng)).collect();
        let b = sd * normal(&mut rng);
        (w, if self.bias { b } else { 0.0 })
    }
}

/// Shared Monte-Carlo settings.
#[derive(Clone, Copy, Debug)]
pub struct InalConfig {
    pub init_samples: usize,
    /// Per inner set, for `mc_paired`.
    pub inner_samples: usize,
    pub seed: u64,
    pub bias: bool,
    pub workers: Workers,
}

impl Default for InalConfig {
    fn default() -> Self {
        InalConfig {
            init_samples: 10_000,
            inner_samples: 1_000,
            seed: 1,
            bias: true,
            workers: Workers::default(),
        }
    }
}
