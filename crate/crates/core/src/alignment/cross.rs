use super::exact::{check_exact, exact_preactivations};
use super::{InalConfig, NeuronInit};
use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::stats::mean_se;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossTermEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

fn mask_of(set: &[usize], n: usize) -> Result<u64> {
    let mut mask = 0u64;
    for &i in set {
        if i >= n {
            return Err(Error::InvalidArgument(format!("coordinate {i} out of range for n = {n}")));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

/// `(⟨M_S, σ⟩, ⟨M_T, σ⟩)` at one weight vector, summed over the cube.
pub(crate) fn monomial_pair(act: &Activation, w: &[f64], b: f64, s: u64, t: u64) -> (f64, f64) {
    let pre = exact_preactivations(w, b);
    let (mut cs, mut ct) = (0.0, 0.0);
    for (x, z) in pre.iter().enumerate() {
        let a = act.eval(*z);
        let x = x as u64;
        cs += if (x & s).count_ones().is_multiple_of(2) { a } else { -a };
        ct += if (x & t).count_ones().is_multiple_of(2) { a } else { -a };
    }
    let size = pre.len() as f64;
    (cs / size, ct / size)
}

/// `E_{w,b}[⟨M_S, σ⟩⟨M_T, σ⟩]` for `S ≠ T` (0-based coordinates), exact
/// inner sums, `n <= 14`.
pub fn cross_term(s: &[usize], t: &[usize], act: &Activation, n: usize, cfg: &InalConfig) -> Result<CrossTermEstimate> {
    check_exact(n)?;
    let (sm, tm) = (mask_of(s, n)?, mask_of(t, n)?);
    if sm == tm {
        return Err(Error::InvalidArgument("cross term needs S != T".into()));
    }
    let init = NeuronInit {
        n,
        bias: cfg.bias,
        seed: cfg.seed,
    };
    let products = cfg.workers.map(cfg.init_samples, |i| {
        let (w, b) = init.sample(i as u64);
        let (a, c) = monomial_pair(act, &w, b, sm, tm);
        a * c
    });
    let (value, std_error) = mean_se(&products);
    Ok(CrossTermEstimate {
        value,
        std_error,
        samples: cfg.init_samples,
    })
}
