use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use super::{CpEstimate, CpMethod};
use crate::boolfn::{BooleanFunction, Coeffs, FourierSpectrum, Permutation};
use crate::error::{Error, Result};
use crate::rng::{fill_signs, stream_rng, Stream};
use crate::stats::{mean_se, Workers};

/// Dense spectra above this `n` are refused by the spectral estimators.
pub const DENSE_CP_CAP: usize = 14;

/// Largest number of injections `exact_enum` will visit.
pub const ENUM_CAP: u64 = 20_000_000;

#[derive(Clone, Copy, Debug)]
pub struct CpConfig {
    /// Permutations, or function pairs for `pair_mc`.
    pub samples: usize,
    /// Inner samples per set, for `pair_mc`.
    pub inner_samples: usize,
    pub seed: u64,
    pub workers: Workers,
}

impl Default for CpConfig {
    fn default() -> Self {
        CpConfig {
            samples: 10_000,
            inner_samples: 1_000,
            seed: 1,
            workers: Workers::default(),
        }
    }
}

/// Nonzero coefficients and a lookup table.
struct SparseSpectrum {
    terms: Vec<(u64, f64)>,
    lookup: HashMap<u64, f64>,
    /// Union of supports.
    support: u64,
}

fn prepare(f: &BooleanFunction, big_n: usize) -> Result<SparseSpectrum> {
    let n = f.n();
    if big_n < n {
        return Err(Error::ExtensionSize { n, big_n });
    }
    if n > 64 {
        return Err(Error::Unsupported("spectral CP needs n <= 64".into()));
    }
    let spec: FourierSpectrum = f.spectrum()?;
    if matches!(spec.coeffs(), Coeffs::Dense(_)) && n > DENSE_CP_CAP {
        return Err(Error::DenseCap { n, cap: DENSE_CP_CAP });
    }
    let terms = spec.nonzero();
    let lookup = terms.iter().copied().collect();
    let support = terms.iter().fold(0, |acc, (m, _)| acc | m);
    Ok(SparseSpectrum {
        terms,
        lookup,
        support,
    })
}

impl SparseSpectrum {
    /// `Σ_T f̂(T) f̂(π(T)) 1[π(T) ⊆ [n]]` with `image(i) = π(i)`.
    fn inner(&self, n: usize, image: impl Fn(usize) -> usize) -> f64 {
        let mut acc = 0.0;
        'terms: for &(mask, c) in &self.terms {
            let mut img = 0u64;
            let mut rest = mask;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let j = image(i);
                if j >= n {
                    continue 'terms;
                }
                img |= 1 << j;
            }
            if let Some(d) = self.lookup.get(&img) {
                acc += c * d;
            }
        }
        acc
    }
}

/// CP of the orbit of `extend(f, N)` by Monte Carlo over permutations; the
/// inner correlation is exact for each permutation.
pub fn cp_spectral(f: &BooleanFunction, big_n: usize, cfg: &CpConfig) -> Result<CpEstimate> {
    let n = f.n();
    let spec = prepare(f, big_n)?;
    let squares = cfg.workers.map(cfg.samples, |i| {
        let mut rng = stream_rng(cfg.seed, Stream::Permutation, i as u64);
        let perm = Permutation::random(big_n, &mut rng);
        spec.inner(n, |c| perm.apply(c)).powi(2)
    });
    let (value, std_error) = mean_se(&squares);
    Ok(CpEstimate {
        value,
        std_error,
        method: CpMethod::SpectralMcPerm,
        n,
        big_n,
        samples: cfg.samples,
    })
}

/// Exact CP: every injection of the spectral support into `[N]` is equally
/// likely under a uniform permutation, so averaging over injections equals
/// averaging over `S_N`.
pub fn cp_exact_enum(f: &BooleanFunction, big_n: usize) -> Result<CpEstimate> {
    let n = f.n();
    let spec = prepare(f, big_n)?;
    let coords: Vec<usize> = (0..n).filter(|i| (spec.support >> i) & 1 == 1).collect();
    let u = coords.len();
    let count = (0..u).try_fold(1u64, |acc, i| acc.checked_mul((big_n - i) as u64));
    let count = match count {
        Some(c) if c <= ENUM_CAP => c,
        _ => {
            return Err(Error::Unsupported(format!(
                "exact enumeration needs N!/(N-{u})! <= {ENUM_CAP} injections"
            )))
        }
    };
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; big_n];
    let mut total = 0.0;
    fn visit(
        depth: usize,
        coords: &[usize],
        image: &mut [usize],
        used: &mut [bool],
        spec: &SparseSpectrum,
        n: usize,
        total: &mut f64,
    ) {
        if depth == coords.len() {
            *total += spec.inner(n, |c| image[c]).powi(2);
            return;
        }
        for j in 0..used.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            image[coords[depth]] = j;
            visit(depth + 1, coords, image, used, spec, n, total);
            used[j] = false;
        }
    }
    visit(0, &coords, &mut image, &mut used, &spec, n, &mut total);
    Ok(CpEstimate {
        value: total / count as f64,
        std_error: 0.0,
        method: CpMethod::ExactEnum,
        n,
        big_n,
        samples: count as usize,
    })
}

/// A distribution over ±1-valued functions on `{±1}^N`.
pub trait FunctionClass: Sync {
    fn dimension(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> BooleanFunction;
}

/// Uniform orbit `{f∘π : π ∈ S_N}` of an already extended function.
pub struct Orbit(pub BooleanFunction);

impl FunctionClass for Orbit {
    fn dimension(&self) -> usize {
        self.0.n()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> BooleanFunction {
        self.0.orbit_sample(rng)
    }
}

/// The class containing one function.
pub struct Singleton(pub BooleanFunction);

impl FunctionClass for Singleton {
    fn dimension(&self) -> usize {
        self.0.n()
    }

    fn sample(&self, _rng: &mut ChaCha8Rng) -> BooleanFunction {
        self.0.clone()
    }
}

fn inner_mean(f: &BooleanFunction, g: &BooleanFunction, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut x = vec![0i8; f.n()];
    let mut acc = 0i64;
    for _ in 0..samples {
        fill_signs(rng, &mut x);
        acc += (f.eval_unchecked(&x) * g.eval_unchecked(&x)) as i64;
    }
    acc as f64 / samples as f64
}

/// CP straight from the definition: independent pairs `F, F'` from the
/// class, and per pair the product of two independent inner means over
/// uniform inputs.
pub fn cp_pair_mc<C: FunctionClass>(class: &C, cfg: &CpConfig) -> Result<CpEstimate> {
    if cfg.inner_samples < 2 {
        return Err(Error::InvalidArgument(
            "paired estimator needs inner_samples >= 2".into(),
        ));
    }
    let products = cfg.workers.map(cfg.samples, |i| {
        let mut rng = stream_rng(cfg.seed, Stream::PairClass, i as u64);
        let f = class.sample(&mut rng);
        let g = class.sample(&mut rng);
        let a = inner_mean(&f, &g, cfg.inner_samples, &mut stream_rng(cfg.seed, Stream::PairInputA, i as u64));
        let b = inner_mean(&f, &g, cfg.inner_samples, &mut stream_rng(cfg.seed, Stream::PairInputB, i as u64));
        a * b
    });
    let (value, std_error) = mean_se(&products);
    Ok(CpEstimate {
        value,
        std_error,
        method: CpMethod::PairMc,
        n: class.dimension(),
        big_n: class.dimension(),
        samples: cfg.samples,
    })
}
