//! Cross-predictability of orbit classes of N-extensions.
//!
//! For `f` on `n` coordinates and its extension `f̄` to `N`, the orbit class
//! is `{f̄∘π}` with uniform `π ∈ S_N`, and
//! `CP = E_π[⟨f̄, f̄∘π⟩²]` with `⟨f̄, f̄∘π⟩ = Σ_T f̂(T) f̂(π(T)) 1[π(T) ⊆ [n]]`.

mod estimate;

pub use estimate::{
    cp_exact_enum, cp_pair_mc, cp_spectral, CpConfig, FunctionClass, Orbit, Singleton, DENSE_CP_CAP,
    ENUM_CAP,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpMethod {
    SpectralMcPerm,
    PairMc,
    ExactEnum,
}

impl CpMethod {
    pub fn label(self) -> &'static str {
        match self {
            CpMethod::SpectralMcPerm => "spectral_mc_perm",
            CpMethod::PairMc => "pair_mc",
            CpMethod::ExactEnum => "exact_enum",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "spectral_mc_perm" | "spectral" => CpMethod::SpectralMcPerm,
            "pair_mc" | "pair" => CpMethod::PairMc,
            "exact_enum" | "exact" => CpMethod::ExactEnum,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: CpMethod,
    pub n: usize,
    pub big_n: usize,
    /// Permutations (or function pairs, or enumerated injections).
    pub samples: usize,
}

/// `C(n,k) / C(N,k)`, the chance a fixed `k`-subset of `[n]` lands inside
/// `[n]` under a uniform permutation of `[N]`.
pub fn survival_probability(n: usize, big_n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    if big_n < n {
        return Err(Error::ExtensionSize { n, big_n });
    }
    Ok((0..k).fold(1.0, |p, i| p * (n - i) as f64 / (big_n - i) as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpBound {
    pub k: usize,
    /// `W^{<k}(f)`.
    pub low_weight: f64,
    pub survival: f64,
    /// `low_weight + survival`.
    pub bound: f64,
    /// `low_weight + e^k n^{−εk}`.
    pub loose_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpBounds {
    pub n: usize,
    pub big_n: usize,
    /// `ln N / ln n − 1`; infinite for `n = 1`.
    pub epsilon: f64,
    pub per_k: Vec<CpBound>,
    /// Split degree minimizing the tight bound.
    pub k_star: usize,
}

impl CpBounds {
    pub fn best(&self) -> &CpBound {
        &self.per_k[self.k_star - 1]
    }

    pub fn best_loose(&self) -> f64 {
        self.per_k.iter().map(|b| b.loose_bound).fold(f64::INFINITY, f64::min)
    }
}

/// Tight and loose bounds for `k = 1..=n` from degree weights `W^0..`.
pub fn cp_bound(degree_weights: &[f64], n: usize, big_n: usize) -> Result<CpBounds> {
    if big_n <= n {
        return Err(Error::ExtensionSize { n, big_n });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let epsilon = (big_n as f64).ln() / (n as f64).ln() - 1.0;
    let ratio = n as f64 / big_n as f64;
    let mut per_k = Vec::with_capacity(n);
    let mut low = 0.0;
    for k in 1..=n {
        low += degree_weights.get(k - 1).copied().unwrap_or(0.0);
        let survival = survival_probability(n, big_n, k)?;
        // n^{−ε} = n/N
        let loose = (std::f64::consts::E * ratio).powi(k as i32);
        per_k.push(CpBound {
            k,
            low_weight: low,
            survival,
            bound: low + survival,
            loose_bound: low + loose,
        });
    }
    let k_star = per_k
        .iter()
        .fold(&per_k[0], |best, b| if b.bound < best.bound { b } else { best })
        .k;
    Ok(CpBounds {
        n,
        big_n,
        epsilon,
        per_k,
        k_star,
    })
}
